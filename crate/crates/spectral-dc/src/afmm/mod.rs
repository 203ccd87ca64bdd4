//! Kernel sums `f(x_i) = Σ_j c_j k(x_i − y_j)` for `k ∈ {log|x|, 1/x, 1/x²}`:
//! a direct evaluator and a hierarchical fast one with absolute error `ε`.

mod chebyshev;
mod tree;

pub use tree::{FmmTree, TargetMap, LEAF_CAPACITY};

use crate::error::{Error, Result};
use crate::flops::OpCounter;
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kernel {
    Log,
    Inverse,
    InverseSquare,
}

impl Kernel {
    #[inline]
    pub fn eval(self, r: f64) -> f64 {
        match self {
            Kernel::Log => r.abs().ln(),
            Kernel::Inverse => 1.0 / r,
            Kernel::InverseSquare => 1.0 / (r * r),
        }
    }

    /// Flops charged per kernel evaluation.
    pub fn cost(self) -> u64 {
        match self {
            Kernel::Log => 20,
            Kernel::Inverse => 2,
            Kernel::InverseSquare => 3,
        }
    }
}

/// A real number carried as an unevaluated sum `hi + lo`.
///
/// Secular roots are stored as a pole plus a small offset; differences
/// against nearby poles are then formed as `(hi − hi') + (lo − lo')`, where the
/// first subtraction is exact for close values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub hi: f64,
    pub lo: f64,
}

impl Point {
    pub fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn offset(origin: f64, mu: f64) -> Self {
        Self { hi: origin, lo: mu }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn diff(self, y: Point) -> f64 {
        (self.hi - y.hi) + (self.lo - y.lo)
    }
}

impl From<f64> for Point {
    fn from(x: f64) -> Self {
        Point::new(x)
    }
}

/// Weighted sources and a kernel; all `|y_j|` and `|c_j|` are below `bound`.
#[derive(Clone, Debug)]
pub struct KernelSum {
    pub kernel: Kernel,
    pub sources: Vec<Point>,
    pub weights: Vec<f64>,
    pub bound: f64,
}

impl KernelSum {
    pub fn new(kernel: Kernel, sources: Vec<f64>, weights: Vec<f64>, bound: f64) -> Result<Self> {
        Self::from_points(kernel, sources.into_iter().map(Point::new).collect(), weights, bound)
    }

    pub fn from_points(kernel: Kernel, sources: Vec<Point>, weights: Vec<f64>, bound: f64) -> Result<Self> {
        if sources.len() != weights.len() {
            return Err(Error::ShapeMismatch("one weight per source".into()));
        }
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(Error::InvalidInput("bound must be positive".into()));
        }
        if sources.iter().any(|y| !(y.value().abs() < bound)) || weights.iter().any(|c| !(c.abs() < bound)) {
            return Err(Error::InvalidInput(format!("sources and weights must lie inside (-{bound}, {bound})")));
        }
        Ok(Self { kernel, sources, weights, bound })
    }
}

#[derive(Clone, Debug)]
pub struct EvalRequest {
    pub targets: Vec<Point>,
    /// Minimum admissible target–source distance.
    pub delta: f64,
    /// Absolute accuracy.
    pub eps: f64,
    /// When set, target `i` omits source `i` (targets coincide with sources).
    pub exclude_self: bool,
}

impl EvalRequest {
    pub fn new(targets: Vec<f64>, delta: f64, eps: f64) -> Self {
        Self {
            targets: targets.into_iter().map(Point::new).collect(),
            delta,
            eps,
            exclude_self: false,
        }
    }
}

/// Chebyshev order for accuracy `eps` over `n` sources.
///
/// Far-field boxes are separated by at least the larger box width, which
/// bounds the interpolation error by `ρ^{-p}` with `ρ = 3 + √8`; the slope is
/// `1/ln ρ` and the offset was calibrated against [`eval_exact`].
pub fn chebyshev_order(n: usize, eps: f64) -> usize {
    const A: f64 = 0.5673;
    const B: f64 = 4.0;
    let p = (A * ((n.max(1) as f64) / eps).ln() + B).ceil();
    p.clamp(4.0, 48.0) as usize
}

fn validate(ks: &KernelSum, req: &EvalRequest) -> Result<()> {
    if req.exclude_self && req.targets.len() != ks.sources.len() {
        return Err(Error::ShapeMismatch("exclude_self needs one target per source".into()));
    }
    if req.targets.iter().any(|x| !(x.value().abs() < ks.bound)) {
        return Err(Error::InvalidInput("target outside the kernel-sum bound".into()));
    }
    check_separation(&ks.sources, &req.targets, req.delta, req.exclude_self)
}

/// Fails when some target lies within `delta` of a source it interacts with.
pub fn check_separation(sources: &[Point], targets: &[Point], delta: f64, exclude_self: bool) -> Result<()> {
    if sources.is_empty() {
        return Ok(());
    }
    let mut order: Vec<usize> = (0..sources.len()).collect();
    order.sort_by(|&a, &b| sources[a].value().total_cmp(&sources[b].value()));
    let values: Vec<f64> = order.iter().map(|&j| sources[j].value()).collect();
    for (i, &x) in targets.iter().enumerate() {
        let at = values.partition_point(|&v| v < x.value());
        let lo = at.saturating_sub(3);
        let hi = (at + 3).min(values.len());
        for &j in &order[lo..hi] {
            if exclude_self && j == i {
                continue;
            }
            if !(x.diff(sources[j]).abs() >= delta) {
                return Err(Error::SeparationViolation { target: i, source_index: j, delta });
            }
        }
    }
    Ok(())
}

/// Direct summation; the reference for [`eval_fmm`].
///
/// Terms of singular kernels near a target can exceed the sum by orders of
/// magnitude, so the accumulation is compensated (Neumaier) and the result
/// is limited only by the rounding of the individual terms.
pub fn eval_exact(ks: &KernelSum, req: &EvalRequest, ops: &OpCounter) -> Result<Vec<f64>> {
    validate(ks, req)?;
    let out = req
        .targets
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let (mut acc, mut comp) = (0.0f64, 0.0f64);
            for (j, (&y, &c)) in ks.sources.iter().zip(&ks.weights).enumerate() {
                if req.exclude_self && i == j {
                    continue;
                }
                let term = c * ks.kernel.eval(x.diff(y));
                let next = acc + term;
                comp += if acc.abs() >= term.abs() { (acc - next) + term } else { (term - next) + acc };
                acc = next;
            }
            acc + comp
        })
        .collect();
    ops.add(req.targets.len() as u64 * ks.sources.len() as u64 * (ks.kernel.cost() + 6));
    Ok(out)
}

/// Hierarchical evaluation with `|f̃(x_i) − f(x_i)| ≤ ε`.
pub fn eval_fmm(ks: &KernelSum, req: &EvalRequest, ops: &OpCounter) -> Result<Vec<f64>> {
    if !(req.eps > 0.0 && req.eps < 1.0) {
        return Err(Error::InvalidInput("eps must lie in (0, 1)".into()));
    }
    validate(ks, req)?;
    let p = chebyshev_order(ks.sources.len(), req.eps);
    let tree = FmmTree::new(ks.kernel, &ks.sources, ks.bound, p, ops);
    let skip: Vec<usize> = (0..req.targets.len()).collect();
    let map = tree.locate(&req.targets, req.exclude_self.then_some(&skip[..]), ops);
    Ok(tree.evaluate(&ks.weights, 1, &map, ops))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn both(ks: &KernelSum, req: &EvalRequest) -> (Vec<f64>, Vec<f64>) {
        let ops = OpCounter::new();
        (eval_exact(ks, req, &ops).unwrap(), eval_fmm(ks, req, &ops).unwrap())
    }

    #[test]
    fn single_and_pair_sums() {
        let ks = KernelSum::new(Kernel::Inverse, vec![0.0], vec![1.0], 4.0).unwrap();
        let (e, f) = both(&ks, &EvalRequest::new(vec![2.0], 1e-3, 1e-10));
        assert_eq!(e, vec![0.5]);
        assert!((f[0] - 0.5).abs() <= 1e-10);

        let ks = KernelSum::new(Kernel::Log, vec![0.0], vec![1.0], 4.0).unwrap();
        let (e, f) = both(&ks, &EvalRequest::new(vec![1.0], 1e-3, 1e-10));
        assert_eq!(e, vec![0.0]);
        assert!(f[0].abs() <= 1e-10);

        let ks = KernelSum::new(Kernel::InverseSquare, vec![0.0, 1.0], vec![1.0, 1.0], 4.0).unwrap();
        let (e, f) = both(&ks, &EvalRequest::new(vec![3.0], 1e-3, 1e-10));
        assert!((e[0] - (1.0 / 9.0 + 0.25)).abs() < 1e-16);
        assert!((f[0] - e[0]).abs() <= 1e-10);
    }

    #[test]
    fn chebyshev_spaced_inverse() {
        let n = 1024;
        let ys: Vec<f64> = (0..n)
            .map(|j| ((2 * j + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos())
            .collect();
        let mut sorted = ys.clone();
        sorted.sort_by(f64::total_cmp);
        let xs: Vec<f64> = sorted.windows(2).map(|w| 0.5 * (w[0] + w[1])).chain([1.0 - 1e-9]).collect();
        let cs: Vec<f64> = (0..n).map(|j| ((j * 37 % 101) as f64 / 101.0 - 0.5) / n as f64).collect();
        let ks = KernelSum::new(Kernel::Inverse, ys, cs, 2.0).unwrap();
        let (e, f) = both(&ks, &EvalRequest::new(xs, 1e-12, 1e-8));
        let err = e.iter().zip(&f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-8, "{err}");
    }

    #[test]
    fn empty_sources_give_zeros() {
        let ks = KernelSum::new(Kernel::Log, vec![], vec![], 1.0).unwrap();
        let (e, f) = both(&ks, &EvalRequest::new(vec![0.1, 0.2], 1e-3, 1e-6));
        assert_eq!(e, vec![0.0, 0.0]);
        assert_eq!(f, vec![0.0, 0.0]);
    }

    #[test]
    fn separation_violations_are_errors() {
        let ks = KernelSum::new(Kernel::Inverse, vec![0.0, 0.5], vec![1.0, 1.0], 2.0).unwrap();
        let req = EvalRequest::new(vec![0.5 + 1e-9], 1e-6, 1e-6);
        let ops = OpCounter::new();
        assert!(matches!(eval_exact(&ks, &req, &ops), Err(Error::SeparationViolation { .. })));
        assert!(matches!(eval_fmm(&ks, &req, &ops), Err(Error::SeparationViolation { .. })));
        let bad = EvalRequest::new(vec![0.25], 1e-6, 1.5);
        assert!(eval_fmm(&ks, &bad, &ops).is_err());
    }

    #[test]
    fn exclude_self_drops_the_diagonal() {
        let ys = vec![-0.5, 0.1, 0.7];
        let ks = KernelSum::new(Kernel::Log, ys.clone(), vec![1.0; 3], 2.0).unwrap();
        let mut req = EvalRequest::new(ys, 1e-3, 1e-12);
        req.exclude_self = true;
        let (e, f) = both(&ks, &req);
        let expect = (0.6f64).ln() + (1.2f64).ln();
        assert!((e[0] - expect).abs() < 1e-15);
        assert!((f[0] - expect).abs() < 1e-12);
    }

    #[test]
    fn two_term_points_resolve_tiny_offsets() {
        let ks = KernelSum::new(Kernel::Inverse, vec![0.3], vec![1.0], 2.0).unwrap();
        let req = EvalRequest {
            targets: vec![Point::offset(0.3, 1e-20)],
            delta: 1e-25,
            eps: 1e-6,
            exclude_self: false,
        };
        let (e, f) = both(&ks, &req);
        assert_eq!(e[0], 1e20);
        assert_eq!(f[0], 1e20);
    }
}
