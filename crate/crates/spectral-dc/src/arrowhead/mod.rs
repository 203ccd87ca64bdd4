//! Symmetric arrowhead matrices `H = [[α, zᵀ], [z, diag(d)]]`: deflation,
//! secular-equation bisection, reconstruction of a nearby arrowhead with
//! exactly the computed eigenvalues, and eigenvector inner products.

mod deflate;
mod inner;
mod reconstruct;
mod secular;

pub use deflate::{deflate, DeflationOutcome};
pub use inner::eigvec_inner_products;
pub use reconstruct::{reconstruct, ReconstructedArrowhead};
pub use secular::{check_desiderata, check_interlacing, root_separation, secular_eigenvalues, SecularRoots, SecularTolerances};

use crate::error::{Error, Result};
use crate::flops::OpCounter;
use crate::matrix::Matrix;
use crate::scalar::{check_precision, UNIT_ROUNDOFF};

/// Evaluator used for kernel sums inside the arrowhead solver.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Backend {
    /// Direct summation, quadratic per merge.
    Exact,
    /// Hierarchical fast evaluation.
    #[default]
    Fmm,
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Backend::Exact),
            "fmm" => Ok(Backend::Fmm),
            _ => Err(Error::InvalidInput(format!("unknown backend `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arrowhead {
    pub alpha: f64,
    pub z: Vec<f64>,
    pub d: Vec<f64>,
}

impl Arrowhead {
    pub fn new(alpha: f64, z: Vec<f64>, d: Vec<f64>) -> Result<Self> {
        if z.len() != d.len() {
            return Err(Error::ShapeMismatch(format!("shaft has {} entries, diagonal {}", z.len(), d.len())));
        }
        if !alpha.is_finite() || z.iter().chain(&d).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("arrowhead entries must be finite".into()));
        }
        Ok(Self { alpha, z, d })
    }

    pub fn n(&self) -> usize {
        self.d.len() + 1
    }

    pub fn to_dense(&self) -> Matrix<f64> {
        let n = self.n();
        let mut m = Matrix::zeros(n, n);
        m[(0, 0)] = self.alpha;
        for (i, (&z, &d)) in self.z.iter().zip(&self.d).enumerate() {
            m[(0, i + 1)] = z;
            m[(i + 1, 0)] = z;
            m[(i + 1, i + 1)] = d;
        }
        m
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.z.iter().chain(&self.d).fold(self.alpha.abs(), |m, x| m.max(x.abs()))
    }

    /// Certified upper bound on `‖H‖₂`.
    pub fn norm_upper(&self) -> f64 {
        let zz: f64 = self.z.iter().map(|z| z * z).sum();
        let dmax = self.d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        self.alpha.abs().max(dmax) + zz.sqrt()
    }
}

/// Accuracy of each kernel-sum evaluation never drops below this.
pub const FMM_FLOOR: f64 = 1e-14;

/// A tolerance from the error analysis next to the value actually used;
/// the latter is raised to what double precision can resolve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub paper: f64,
    pub effective: f64,
}

impl Tolerance {
    fn floored(paper: f64, floor: f64) -> Self {
        Self { paper, effective: paper.max(floor) }
    }
}

/// Internal thresholds of one arrowhead solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArrowheadParams {
    pub eps: f64,
    pub n: usize,
    /// Deflation threshold.
    pub tau: Tolerance,
    pub eps_prime: Tolerance,
    /// Accuracy of each secular root.
    pub eps_lambda: Tolerance,
    /// Accuracy of the reconstruction and inner-product sums.
    pub eps_z: Tolerance,
}

impl ArrowheadParams {
    /// Full diagonalization cascade: `τ = ε/2n`, `ε' = ε/4n`,
    /// `ε_λ = ε⁴/(64n⁴(n+1))`, `ε_z = ε⁷/(147·64·n⁸(n+1)²)`.
    pub fn full(h: &Arrowhead, eps: f64) -> Self {
        let n = h.n() as f64;
        Self {
            eps,
            n: h.n(),
            tau: Self::tau(h, eps / (2.0 * n)),
            eps_prime: Tolerance::floored(eps / (4.0 * n), FMM_FLOOR),
            eps_lambda: Tolerance::floored(eps.powi(4) / (64.0 * n.powi(4) * (n + 1.0)), 2.0 * FMM_FLOOR),
            eps_z: Tolerance::floored(eps.powi(7) / (147.0 * 64.0 * n.powi(8) * (n + 1.0).powi(2)), FMM_FLOOR),
        }
    }

    /// Eigenvalues only: `τ = ε/2n`, `ε_λ = ε/2`.
    pub fn values_only(h: &Arrowhead, eps: f64) -> Self {
        let n = h.n() as f64;
        Self {
            eps,
            n: h.n(),
            tau: Self::tau(h, eps / (2.0 * n)),
            eps_prime: Tolerance::floored(eps / (4.0 * n), FMM_FLOOR),
            eps_lambda: Tolerance::floored(eps / 2.0, 2.0 * FMM_FLOOR),
            eps_z: Tolerance::floored(eps, FMM_FLOOR),
        }
    }

    fn tau(h: &Arrowhead, paper: f64) -> Tolerance {
        let floor = 8.0 * UNIT_ROUNDOFF * h.max_abs();
        let t = Tolerance::floored(paper, floor);
        Tolerance { effective: t.effective.min(0.5), ..t }
    }

    /// Bisection runs down to the unfloored bracket width, which for the full
    /// cascade means the resolution of the offset from the nearest pole; the
    /// reconstruction needs those offsets to full relative accuracy. The
    /// floored value is what the early `|f̃|` stop can guarantee.
    pub fn secular(&self) -> SecularTolerances {
        SecularTolerances {
            tau: self.tau.effective,
            eps_lambda: self.eps_lambda.paper.clamp(f64::MIN_POSITIVE, 0.5),
            eps_eval: (0.5 * self.eps_lambda.effective).clamp(FMM_FLOOR, 0.5),
        }
    }
}

/// Eigenvalues in ascending order and `Q̃_B ≈ QᵀB` with rows in the same order.
#[derive(Clone, Debug)]
pub struct ArrowheadEig {
    pub values: Vec<f64>,
    pub qtb: Matrix<f64>,
    pub params: ArrowheadParams,
    /// Size of the core left after deflation.
    pub core_size: usize,
}

/// Diagonalizes `H` (with `‖H‖ ≤ 1`) and returns `Λ̃` together with `QᵀB`.
pub fn arrowhead_diagonalize(h: &Arrowhead, b: &Matrix<f64>, eps: f64, backend: Backend, ops: &OpCounter) -> Result<ArrowheadEig> {
    check_eps(eps, h.n())?;
    diagonalize_with(h, b, ArrowheadParams::full(h, eps), backend, ops)
}

/// Eigenvalues of `H` to absolute accuracy `eps`, ascending.
pub fn arrowhead_eigenvalues(h: &Arrowhead, eps: f64, backend: Backend, ops: &OpCounter) -> Result<Vec<f64>> {
    check_eps(eps, h.n())?;
    eigenvalues_with(h, ArrowheadParams::values_only(h, eps), backend, ops)
}

/// Eigenvalues with explicit thresholds; no precision-floor check.
pub fn eigenvalues_with(h: &Arrowhead, params: ArrowheadParams, backend: Backend, ops: &OpCounter) -> Result<Vec<f64>> {
    let out = deflate(h, params.tau.effective)?;
    let mut values = secular_eigenvalues(&out.core, params.secular(), backend, ops)?.values();
    values.extend(out.deflated.iter().map(|&(_, l)| l));
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn check_eps(eps: f64, n: usize) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!("eps = {eps} outside (0, 1)")));
    }
    check_precision(eps, n)
}

/// Diagonalization with explicit thresholds; no precision-floor check.
pub fn diagonalize_with(
    h: &Arrowhead,
    b: &Matrix<f64>,
    params: ArrowheadParams,
    backend: Backend,
    ops: &OpCounter,
) -> Result<ArrowheadEig> {
    let n = h.n();
    if b.rows() != n {
        return Err(Error::ShapeMismatch(format!("B has {} rows, H has dimension {n}", b.rows())));
    }
    let out = deflate(h, params.tau.effective)?;
    let mut qtb = b.clone();
    out.g.apply_transpose(&mut qtb);
    ops.add(n as u64 * b.cols() as u64 * 6);

    let core = &out.core;
    let m = core.n();
    let mut values = Vec::with_capacity(n);
    if m == 1 {
        values.push(core.alpha);
    } else {
        let roots = secular_eigenvalues(core, params.secular(), backend, ops)?;
        let signs: Vec<f64> = core.z.iter().map(|z| 1f64.copysign(*z)).collect();
        let eps_z = params.eps_z.effective;
        let rec = reconstruct(&roots.lambdas, &core.d, &signs, backend, eps_z, ops)?;
        let head = qtb.submatrix(0, 0, m, qtb.cols());
        let rotated = eigvec_inner_products(&roots.lambdas, &rec.z_hat, &core.d, &head, eps_z, backend, ops)?;
        qtb.set_submatrix(0, 0, &rotated);
        values.extend(roots.values());
    }
    values.extend(out.deflated.iter().map(|&(_, l)| l));

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    if order.iter().enumerate().any(|(i, &o)| i != o) {
        let src = qtb.clone();
        for (i, &o) in order.iter().enumerate() {
            qtb.row_mut(i).copy_from_slice(src.row(o));
        }
        values = order.iter().map(|&o| values[o]).collect();
    }
    Ok(ArrowheadEig { values, qtb, params, core_size: m })
}
