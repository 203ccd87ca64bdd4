use super::{pow2_at_least, Reduced};
use crate::arrowhead::Backend;
use crate::band::tridiagonalize_counted;
use crate::dc::{diagonalize_counted, scale_for};
use crate::error::{Error, Result};
use crate::flops::OpCounter;
use crate::matrix::{matmul_counted, DenseHermitian, Matrix};
use crate::scalar::{check_precision, precision_floor, C64};

/// `A ≈ Q̃·diag(values)·Q̃*` for a Hermitian `A`.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    /// Ascending.
    pub values: Vec<f64>,
    /// Eigenvectors as columns.
    pub vectors: Matrix<C64>,
    /// Bound on `‖A − Q̃Λ̃Q̃*‖`.
    pub backward_bound: f64,
    /// Bound on `‖Q̃*Q̃ − I‖`.
    pub orth_bound: f64,
}

/// Eigenvalues of `a` with absolute error at most `eps`.
pub fn hermitian_eigenvalues(a: &DenseHermitian, eps: f64) -> Result<Vec<f64>> {
    hermitian_eigenvalues_with(a, eps, Backend::default())
}

pub fn hermitian_eigenvalues_with(a: &DenseHermitian, eps: f64, backend: Backend) -> Result<Vec<f64>> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidInput(format!("eps = {eps} outside (0, 1/2)")));
    }
    let ops = OpCounter::new();
    let reduced = Reduced::new(a, backend, &ops)?;
    let (values, achieved) = reduced.eigenvalues(eps, &ops)?;
    if achieved > eps {
        return Err(Error::PrecisionFloor { eps, floor: achieved, n: a.n() });
    }
    Ok(values)
}

/// Reduces to tridiagonal form, diagonalizes that, and multiplies the two
/// factors. With `‖A‖ ≤ 1` the results satisfy `‖A − Q̃Λ̃Q̃*‖ ≤ eps` and
/// `‖Q̃*Q̃ − I‖ ≲ eps/n²`.
pub fn hermitian_diagonalize(a: &DenseHermitian, eps: f64) -> Result<HermitianEig> {
    hermitian_diagonalize_with(a, eps, Backend::default(), &OpCounter::new())
}

pub fn hermitian_diagonalize_with(a: &DenseHermitian, eps: f64, backend: Backend, ops: &OpCounter) -> Result<HermitianEig> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidInput(format!("eps = {eps} outside (0, 1/2)")));
    }
    check_precision(eps, a.n())?;
    diagonalize(a, eps, false, backend, ops)
}

/// With `clamp`, an accuracy below the precision floor is raised to it and
/// the bounds report what was achieved.
pub(crate) fn diagonalize(a: &DenseHermitian, eps: f64, clamp: bool, backend: Backend, ops: &OpCounter) -> Result<HermitianEig> {
    let n = a.n();
    let s = pow2_at_least(a.matrix().spectral_norm_upper());
    let scaled = DenseHermitian::new(a.matrix().scaled(1.0 / s))?;
    let red = tridiagonalize_counted(&scaled, true, ops)?;
    let st = scale_for(&red.t);
    let mut eps_dc = 0.5 * eps / st;
    if clamp {
        eps_dc = eps_dc.max(precision_floor(n));
    }
    let d = diagonalize_counted(&red.t, eps_dc, backend, ops)?;
    let z = red.q.expect("requested");
    let vectors = matmul_counted(&z, &d.vectors.to_complex(), ops)?;
    let dz = red.orth_defect;
    Ok(HermitianEig {
        values: d.values.iter().map(|x| x * s).collect(),
        vectors,
        backward_bound: s * (red.backward_bound + (1.0 + dz) * (1.0 + dz) * d.backward_bound),
        orth_bound: (1.0 + d.orth_bound) * dz + d.orth_bound,
    })
}
