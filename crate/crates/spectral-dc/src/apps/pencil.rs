//! Definite pencils `(H, S)` via the congruence `L⁻¹·H·L⁻*`, `S = L·L*`.

use super::eig::hermitian_eigenvalues;
use crate::error::{Error, Result};
use crate::matrix::{DenseHermitian, Matrix};
use crate::scalar::C64;

/// Lower triangular `L` with positive diagonal and `S = L·L*`.
pub fn cholesky(s: &DenseHermitian) -> Result<Matrix<C64>> {
    let n = s.n();
    let a = s.matrix();
    let mut l: Matrix<C64> = Matrix::zeros(n, n);
    for j in 0..n {
        let d = a[(j, j)].re - l.row(j)[..j].iter().map(|x| x.norm_sqr()).sum::<f64>();
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let djj = d.sqrt();
        l[(j, j)] = C64::new(djj, 0.0);
        for i in j + 1..n {
            let dot: C64 = (0..j).map(|k| l[(i, k)] * l[(j, k)].conj()).sum();
            l[(i, j)] = (a[(i, j)] - dot) / djj;
        }
    }
    Ok(l)
}

/// Solves `L·X = B` by forward substitution.
pub(crate) fn solve_lower(l: &Matrix<C64>, b: &Matrix<C64>) -> Matrix<C64> {
    let (n, r) = (l.rows(), b.cols());
    let mut x = b.clone();
    for i in 0..n {
        for k in 0..i {
            let lik = l[(i, k)];
            let (xi, xk) = x.row_pair_mut(i, k);
            for c in 0..r {
                xi[c] -= lik * xk[c];
            }
        }
        let d = l[(i, i)];
        x.row_mut(i).iter_mut().for_each(|v| *v /= d);
    }
    x
}

/// Solves `L*·X = B` by back substitution.
pub(crate) fn solve_lower_adjoint(l: &Matrix<C64>, b: &Matrix<C64>) -> Matrix<C64> {
    let (n, r) = (l.rows(), b.cols());
    let mut x = b.clone();
    for i in (0..n).rev() {
        for k in i + 1..n {
            let uik = l[(k, i)].conj();
            let (xi, xk) = x.row_pair_mut(i, k);
            for c in 0..r {
                xi[c] -= uik * xk[c];
            }
        }
        let d = l[(i, i)].conj();
        x.row_mut(i).iter_mut().for_each(|v| *v /= d);
    }
    x
}

/// The Hermitian matrix `L⁻¹·H·L⁻*` with the pencil's eigenvalues, and `L`.
pub fn reduce_pencil(h: &DenseHermitian, s: &DenseHermitian) -> Result<(DenseHermitian, Matrix<C64>)> {
    if h.n() != s.n() {
        return Err(Error::ShapeMismatch(format!("pencil of sizes {} and {}", h.n(), s.n())));
    }
    let l = cholesky(s)?;
    let x = solve_lower(&l, h.matrix());
    let reduced = solve_lower(&l, &x.adjoint()).adjoint();
    Ok((DenseHermitian::from_nearly_hermitian(reduced)?, l))
}

/// Eigenvalues of `H·x = λ·S·x`, ascending, within `eps` when `‖H‖ ≤ 1` and
/// `‖S⁻¹‖ ≤ 1`.
pub fn pencil_eigenvalues(h: &DenseHermitian, s: &DenseHermitian, eps: f64) -> Result<Vec<f64>> {
    let (reduced, _) = reduce_pencil(h, s)?;
    hermitian_eigenvalues(&reduced, 0.5 * eps)
}
