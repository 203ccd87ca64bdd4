//! Bisection on the secular equation `f(λ) = λ − α + Σ z_j²/(d_j − λ)`.
//!
//! Each root is carried as a pole plus an offset. The origin is the pole
//! nearer to the root, decided by the sign of `f` at the midpoint of the pole
//! interval, so that `λ − d_j` is available to full relative accuracy for the
//! two poles that bracket it.

use super::{Arrowhead, Backend};
use crate::afmm::{FmmTree, Kernel, Point};
use crate::error::{Error, Result};
use crate::flops::OpCounter;
use crate::scalar::UNIT_ROUNDOFF;
use rayon::prelude::*;

/// Roots `λ_0 < d_0 < λ_1 < … < d_{m−2} < λ_{m−1}` of a core arrowhead.
#[derive(Clone, Debug)]
pub struct SecularRoots {
    pub lambdas: Vec<Point>,
    /// Final bracket of each root.
    pub intervals: Vec<(Point, Point)>,
    /// Bisection rounds taken by the slowest root.
    pub rounds: usize,
}

impl SecularRoots {
    pub fn values(&self) -> Vec<f64> {
        self.lambdas.iter().map(|p| p.value()).collect()
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }
}

/// Accuracy controls for [`secular_eigenvalues`].
#[derive(Clone, Copy, Debug)]
pub struct SecularTolerances {
    /// Deflation threshold the core satisfies.
    pub tau: f64,
    /// Bracket width at which a root is accepted.
    pub eps_lambda: f64,
    /// Accuracy of each evaluation of `f`; a point with `|f̃| ≤ eps_eval`
    /// is accepted immediately.
    pub eps_eval: f64,
}

/// Smallest admissible distance between a root and a pole.
pub fn root_separation(tau: f64, n: usize) -> f64 {
    tau * tau * tau / (n as f64 + 1.0)
}

/// Verifies that `core` has strictly increasing poles with gaps and shaft
/// entries of at least `tau`.
pub fn check_desiderata(core: &Arrowhead, tau: f64) -> Result<()> {
    if let Some(i) = core.d.windows(2).position(|w| !(w[1] - w[0] >= tau)) {
        return Err(Error::Desiderata(format!("poles {i} and {} are closer than {tau:e}", i + 1)));
    }
    if let Some(i) = core.z.iter().position(|z| !(z.abs() >= tau)) {
        return Err(Error::Desiderata(format!("shaft entry {i} is below {tau:e}")));
    }
    Ok(())
}

struct Bracket {
    origin: f64,
    lo: f64,
    hi: f64,
    done: Option<f64>,
}

impl Bracket {
    fn mid(&self) -> f64 {
        self.lo + 0.5 * (self.hi - self.lo)
    }

    fn exhausted(&self, eps: f64) -> bool {
        let w = self.hi - self.lo;
        let m = self.mid();
        w <= eps || w <= 4.0 * UNIT_ROUNDOFF * self.lo.abs().max(self.hi.abs()) || m <= self.lo || m >= self.hi
    }
}

/// Evaluates `f` at a batch of points.
pub(crate) struct SecularFunction<'a> {
    core: &'a Arrowhead,
    poles: Vec<Point>,
    weights: Vec<f64>,
    tree: Option<FmmTree>,
}

impl<'a> SecularFunction<'a> {
    pub(crate) fn new(core: &'a Arrowhead, backend: Backend, eps: f64, bound: f64, ops: &OpCounter) -> Self {
        let poles: Vec<Point> = core.d.iter().map(|&d| Point::new(d)).collect();
        let weights: Vec<f64> = core.z.iter().map(|z| -z * z).collect();
        let tree = match backend {
            Backend::Exact => None,
            Backend::Fmm => {
                let p = crate::afmm::chebyshev_order(poles.len(), eps);
                Some(FmmTree::new(Kernel::Inverse, &poles, bound, p, ops))
            }
        };
        Self { core, poles, weights, tree }
    }

    pub(crate) fn eval(&self, at: &[Point], ops: &OpCounter) -> Vec<f64> {
        let sums = match &self.tree {
            Some(tree) => {
                let map = tree.locate(at, None, ops);
                tree.evaluate(&self.weights, 1, &map, ops)
            }
            None => {
                ops.add(at.len() as u64 * self.poles.len() as u64 * 4);
                at.par_iter()
                    .map(|&x| self.poles.iter().zip(&self.weights).map(|(&p, &w)| w / x.diff(p)).sum())
                    .collect()
            }
        };
        at.iter().zip(sums).map(|(x, s)| ((x.hi - self.core.alpha) + x.lo) + s).collect()
    }
}

/// Roots of the secular equation of a core that satisfies the deflation
/// guarantees with `tol.tau`.
pub fn secular_eigenvalues(core: &Arrowhead, tol: SecularTolerances, backend: Backend, ops: &OpCounter) -> Result<SecularRoots> {
    check_desiderata(core, tol.tau)?;
    if !(tol.eps_lambda > 0.0 && tol.eps_lambda < 1.0 && tol.eps_eval > 0.0 && tol.eps_eval < 1.0) {
        return Err(Error::InvalidInput("secular tolerances must lie in (0, 1)".into()));
    }
    let m = core.n();
    if m == 1 {
        let a = Point::new(core.alpha);
        return Ok(SecularRoots { lambdas: vec![a], intervals: vec![(a, a)], rounds: 0 });
    }
    let p = &core.d;
    let delta = root_separation(tol.tau, m);
    let znorm = core.z.iter().map(|z| z * z).sum::<f64>().sqrt();
    let pad = |x: f64| 4.0 * UNIT_ROUNDOFF * (x.abs() + 1.0);
    let lower = core.alpha.min(p[0]) - znorm;
    let upper = core.alpha.max(p[m - 2]) + znorm;
    let (lower, upper) = (lower - pad(lower), upper + pad(upper));
    let bound = 2.0 * [1.0, lower.abs(), upper.abs()].into_iter().fold(0.0, f64::max);
    let f = SecularFunction::new(core, backend, tol.eps_eval, bound, ops);

    // Interior roots: pick the origin from the sign of f at the midpoint.
    let mids: Vec<Point> = p.windows(2).map(|w| Point::offset(w[0], 0.5 * (w[1] - w[0]))).collect();
    let fm = f.eval(&mids, ops);
    let mut brackets = Vec::with_capacity(m);
    brackets.push(Bracket { origin: p[0], lo: (lower - p[0]).min(-delta), hi: -delta, done: None });
    for (i, &v) in fm.iter().enumerate() {
        let half = 0.5 * (p[i + 1] - p[i]);
        brackets.push(if v.abs() <= tol.eps_eval {
            Bracket { origin: p[i], lo: half, hi: half, done: Some(half) }
        } else if v > 0.0 {
            Bracket { origin: p[i], lo: delta, hi: half, done: None }
        } else {
            Bracket { origin: p[i + 1], lo: -half, hi: -delta, done: None }
        });
    }
    brackets.push(Bracket { origin: p[m - 2], lo: delta, hi: (upper - p[m - 2]).max(delta), done: None });

    let mut rounds = 0;
    loop {
        for b in brackets.iter_mut().filter(|b| b.done.is_none()) {
            if b.exhausted(tol.eps_lambda) {
                b.done = Some(b.mid());
            }
        }
        let active: Vec<usize> = (0..m).filter(|&i| brackets[i].done.is_none()).collect();
        if active.is_empty() {
            break;
        }
        rounds += 1;
        let at: Vec<Point> = active.iter().map(|&i| Point::offset(brackets[i].origin, brackets[i].mid())).collect();
        let vals = f.eval(&at, ops);
        for (&i, v) in active.iter().zip(vals) {
            let b = &mut brackets[i];
            let mid = b.mid();
            if v.abs() <= tol.eps_eval {
                b.done = Some(mid);
            } else if v > 0.0 {
                b.hi = mid;
            } else {
                b.lo = mid;
            }
        }
    }

    let lambdas: Vec<Point> = brackets.iter().map(|b| Point::offset(b.origin, b.done.expect("settled"))).collect();
    let intervals = brackets
        .iter()
        .map(|b| (Point::offset(b.origin, b.lo), Point::offset(b.origin, b.hi)))
        .collect();
    let roots = SecularRoots { lambdas, intervals, rounds };
    check_interlacing(&roots.lambdas, p)?;
    Ok(roots)
}

/// Strict interlacing `λ_0 < d_0 < λ_1 < … < d_{m−2} < λ_{m−1}`, tested on
/// the two-term representation.
pub fn check_interlacing(lambdas: &[Point], poles: &[f64]) -> Result<()> {
    if lambdas.len() != poles.len() + 1 {
        return Err(Error::ShapeMismatch("need one more root than poles".into()));
    }
    for (i, l) in lambdas.iter().enumerate() {
        let above = i == 0 || l.diff(Point::new(poles[i - 1])) > 0.0;
        let below = i == poles.len() || l.diff(Point::new(poles[i])) < 0.0;
        if !(above && below) {
            return Err(Error::Interlacing(i));
        }
    }
    Ok(())
}
