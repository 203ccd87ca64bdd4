//! Routines composed from the tridiagonal reduction and the
//! divide-and-conquer solver: Hermitian diagonalization, SVD, singular values,
//! condition numbers, definite pencils, spectral gaps and projectors.

mod eig;
mod gap;
mod pencil;
mod svd;

pub use eig::{hermitian_diagonalize, hermitian_diagonalize_with, hermitian_eigenvalues, hermitian_eigenvalues_with, HermitianEig};
pub use gap::{spectral_gap, spectral_projector, GapResult, Spectrum};
pub use pencil::{cholesky, pencil_eigenvalues, reduce_pencil};
pub use svd::{condition_number, singular_value, svd, SvdResult};

use crate::arrowhead::Backend;
use crate::band::tridiagonalize_counted;
use crate::dc::{eigenvalues_only_counted, scale_for};
use crate::error::Result;
use crate::flops::OpCounter;
use crate::matrix::DenseHermitian;
use crate::scalar::precision_floor;
use crate::tridiagonal::SymTridiagonal;

/// Cap on accuracy-squaring and accuracy-halving loops.
pub const ROUND_CAP: usize = 64;

/// Smallest power of two `≥ x` (1 for `x ≤ 0`); scaling by it is exact.
pub fn pow2_at_least(x: f64) -> f64 {
    if !(x > 0.0) {
        return 1.0;
    }
    let mut p = 2f64.powi(x.log2().floor() as i32);
    while p < x {
        p *= 2.0;
    }
    while p / 2.0 >= x {
        p /= 2.0;
    }
    p
}

/// A Hermitian matrix reduced once to tridiagonal form whose eigenvalues
/// are then requested at varying accuracy.
pub(crate) struct Reduced {
    t: SymTridiagonal,
    scale: f64,
    reduction_error: f64,
    backend: Backend,
}

impl Reduced {
    pub(crate) fn new(a: &DenseHermitian, backend: Backend, ops: &OpCounter) -> Result<Self> {
        let r = tridiagonalize_counted(a, false, ops)?;
        let scale = scale_for(&r.t);
        Ok(Self { reduction_error: r.backward_bound * scale, t: r.t, scale, backend })
    }

    pub(crate) fn n(&self) -> usize {
        self.t.n()
    }

    /// Best absolute accuracy the precision floor permits.
    pub(crate) fn attainable(&self) -> f64 {
        precision_floor(self.n()) * self.scale + self.reduction_error
    }

    /// Ascending eigenvalues and their guaranteed absolute accuracy, which
    /// is at most `max(target, attainable())`.
    pub(crate) fn eigenvalues(&self, target: f64, ops: &OpCounter) -> Result<(Vec<f64>, f64)> {
        let eps = ((target - self.reduction_error) / self.scale).clamp(precision_floor(self.n()), 0.25);
        let values = eigenvalues_only_counted(&self.t, eps, self.backend, ops)?;
        Ok((values, eps * self.scale + self.reduction_error))
    }
}
