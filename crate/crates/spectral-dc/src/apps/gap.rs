use super::eig::diagonalize;
use super::pencil::{reduce_pencil, solve_lower_adjoint};
use super::{Reduced, ROUND_CAP};
use crate::arrowhead::Backend;
use crate::error::{Error, Result};
use crate::flops::OpCounter;
use crate::matrix::{matmul, DenseHermitian, Matrix};
use crate::scalar::{check_precision, C64};

/// A Hermitian matrix or a definite pencil `(H, S)`.
#[derive(Clone, Copy, Debug)]
pub enum Spectrum<'a> {
    Matrix(&'a DenseHermitian),
    Pencil { h: &'a DenseHermitian, s: &'a DenseHermitian },
}

impl Spectrum<'_> {
    fn n(&self) -> usize {
        match self {
            Spectrum::Matrix(a) => a.n(),
            Spectrum::Pencil { h, .. } => h.n(),
        }
    }

    /// The Hermitian matrix carrying the spectrum, and the Cholesky factor
    /// for pencils.
    fn hermitian(&self) -> Result<(DenseHermitian, Option<Matrix<C64>>)> {
        match self {
            Spectrum::Matrix(a) => Ok(((*a).clone(), None)),
            Spectrum::Pencil { h, s } => reduce_pencil(h, s).map(|(m, l)| (m, Some(l))),
        }
    }
}

/// Midpoint and width of the gap between the `k`-th and `(k+1)`-th
/// smallest eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapResult {
    pub mu_k: f64,
    pub gap_k: f64,
    /// Eigenvalue solves performed.
    pub iterations: usize,
}

/// Squares the accuracy `ε_t = (1/2)^(2^t)` until
/// `ε_t ≤ (eps/2)·|λ̃_{k+1} − λ̃_k|`; then `μ̃` lies within `eps·gap` of the
/// true midpoint and `gap̃ ∈ (1 ± eps)·gap`.
pub fn spectral_gap(input: Spectrum, k: usize, eps: f64) -> Result<GapResult> {
    let n = input.n();
    if k == 0 || k >= n {
        return Err(Error::InvalidInput(format!("gap index {k} outside 1..{n}")));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidInput(format!("eps = {eps} outside (0, 1/2)")));
    }
    let (a, _) = input.hermitian()?;
    let ops = OpCounter::new();
    let reduced = Reduced::new(&a, Backend::default(), &ops)?;
    let mut eps_t: f64 = 0.5;
    for t in 0..ROUND_CAP {
        let (values, achieved) = reduced.eigenvalues(eps_t, &ops)?;
        let gap = values[k] - values[k - 1];
        if gap > 0.0 && achieved <= 0.5 * eps * gap {
            return Ok(GapResult { mu_k: 0.5 * (values[k] + values[k - 1]), gap_k: gap, iterations: t + 1 });
        }
        if eps_t <= reduced.attainable() {
            // Further squaring cannot improve on the precision floor.
            return Err(Error::IterationCap {
                cap: ROUND_CAP,
                what: format!("gap {k} ≈ {gap:e} is unresolved at the attainable accuracy {achieved:e} after {} rounds", t + 1),
            });
        }
        eps_t *= eps_t;
    }
    Err(Error::IterationCap { cap: ROUND_CAP, what: format!("gap {k} unresolved") })
}

/// Projector onto the invariant subspace of the `k` smallest eigenvalues,
/// within `eps` in norm. For a pencil this is the `S`-orthogonal projector
/// `C_k·C_k*·S`.
pub fn spectral_projector(input: Spectrum, k: usize, eps: f64) -> Result<Matrix<C64>> {
    let n = input.n();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("projector rank {k} outside 1..={n}")));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidInput(format!("eps = {eps} outside (0, 1/2)")));
    }
    if k == n {
        return Ok(Matrix::identity(n));
    }
    let gap = spectral_gap(input, k, 0.25)?;
    let (a, l) = input.hermitian()?;
    let target = eps * gap.gap_k / 8.0;
    check_precision(target, n)?;
    let e = diagonalize(&a, target, false, Backend::default(), &OpCounter::new())?;
    let uk = e.vectors.columns(0, k);
    match (input, l) {
        (Spectrum::Pencil { s, .. }, Some(l)) => {
            let c = solve_lower_adjoint(&l, &uk);
            matmul(&matmul(&c, &c.adjoint())?, s.matrix())
        }
        _ => {
            let mut p = matmul(&uk, &uk.adjoint())?;
            p.hermitize();
            Ok(p)
        }
    }
}
