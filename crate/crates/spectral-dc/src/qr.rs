//! Householder QR with a fixed reflector sign convention.

use crate::error::{Error, Result};
use crate::flops::OpCounter;
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct QrResult<T> {
    pub q: Matrix<T>,
    pub r: Matrix<T>,
}

/// Elementary reflector `H = I - tau·v·v*` with `v[0] = 1`.
struct Reflector<T> {
    v: Vec<T>,
    tau: T,
}

/// Reflector mapping `x` onto `beta·e1` with `beta = -sign(Re x0)·‖x‖`.
///
/// When `x[1..]` is exactly zero no reflection is applied (`tau = 0`), so
/// columns that are already reduced, including identity padding, are left
/// untouched bit for bit.
fn make_reflector<T: Scalar>(x: &[T]) -> (Reflector<T>, T) {
    let alpha = x[0];
    let tail2: f64 = x[1..].iter().map(|t| t.abs2()).sum();
    if tail2 == 0.0 {
        let mut v = vec![T::zero(); x.len()];
        v[0] = T::one();
        return (Reflector { v, tau: T::zero() }, alpha);
    }
    let scale = x.iter().map(|t| t.abs()).fold(0.0, f64::max);
    let inv = 1.0 / scale;
    let norm = scale * x.iter().map(|t| t.scale(inv).abs2()).sum::<f64>().sqrt();
    let beta = if alpha.re() >= 0.0 { -norm } else { norm };
    let beta_t = T::from_real(beta);
    let tau = (beta_t - alpha) / beta_t;
    let denom = alpha - beta_t;
    let mut v = Vec::with_capacity(x.len());
    v.push(T::one());
    v.extend(x[1..].iter().map(|&t| t / denom));
    (Reflector { v, tau }, beta_t)
}

/// Applies `H* = I - conj(tau)·v·v*` to rows `r0..` of columns `c0..` of `m`.
fn apply_left<T: Scalar>(m: &mut Matrix<T>, h: &Reflector<T>, r0: usize, c0: usize) {
    if h.tau == T::zero() {
        return;
    }
    let tau_c = h.tau.conj();
    for j in c0..m.cols() {
        let mut w = T::zero();
        for (k, &vk) in h.v.iter().enumerate() {
            w += vk.conj() * m[(r0 + k, j)];
        }
        let w = tau_c * w;
        for (k, &vk) in h.v.iter().enumerate() {
            m[(r0 + k, j)] -= vk * w;
        }
    }
}

/// Householder QR of an `m×n` matrix, `m ≥ n`: `A = Q·R` with `Q` unitary
/// (`m×m`) and `R` upper triangular (`m×n`, exact zeros below the diagonal).
pub fn householder_qr<T: Scalar>(a: &Matrix<T>) -> Result<QrResult<T>> {
    householder_qr_counted(a, &OpCounter::new())
}

pub fn householder_qr_counted<T: Scalar>(a: &Matrix<T>, ops: &OpCounter) -> Result<QrResult<T>> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::ShapeMismatch(format!("QR needs m >= n, got {m}x{n}")));
    }
    if !a.is_finite() {
        return Err(Error::InvalidInput("non-finite entry".into()));
    }
    let mut r = a.clone();
    let mut hs = Vec::with_capacity(n);
    for k in 0..n.min(m.saturating_sub(1)) {
        let x: Vec<T> = (k..m).map(|i| r[(i, k)]).collect();
        let (h, beta) = make_reflector(&x);
        apply_left(&mut r, &h, k, k + 1);
        r[(k, k)] = beta;
        for i in k + 1..m {
            r[(i, k)] = T::zero();
        }
        hs.push(h);
    }
    // Q = H_0 H_1 ⋯ H_{n-1}, accumulated backwards onto the identity.
    let mut q = Matrix::identity(m);
    for (k, h) in hs.iter().enumerate().rev() {
        apply_left_plain(&mut q, h, k);
    }
    let (mf, nf) = (m as u64, n as u64);
    ops.add(T::FMA_FLOPS * (2 * mf * nf * nf + 2 * mf * mf * nf));
    Ok(QrResult { q, r })
}

/// `m ← H·m` on rows `r0..` (no conjugation of tau), used to build `Q`.
fn apply_left_plain<T: Scalar>(m: &mut Matrix<T>, h: &Reflector<T>, r0: usize) {
    if h.tau == T::zero() {
        return;
    }
    for j in r0..m.cols() {
        let mut w = T::zero();
        for (k, &vk) in h.v.iter().enumerate() {
            w += vk.conj() * m[(r0 + k, j)];
        }
        let w = h.tau * w;
        for (k, &vk) in h.v.iter().enumerate() {
            m[(r0 + k, j)] -= vk * w;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::matmul;
    use crate::scalar::C64;

    fn residuals<T: Scalar>(a: &Matrix<T>, qr: &QrResult<T>) -> (f64, f64) {
        let back = matmul(&qr.q, &qr.r).unwrap().sub(a).unwrap().norm_fro();
        let orth = matmul(&qr.q.adjoint(), &qr.q).unwrap().minus_identity().norm_fro();
        (back, orth)
    }

    #[test]
    fn identity_factors_trivially() {
        let qr = householder_qr(&Matrix::<f64>::identity(3)).unwrap();
        assert_eq!(qr.q, Matrix::identity(3));
        assert_eq!(qr.r, Matrix::identity(3));
    }

    #[test]
    fn two_vector() {
        let a = Matrix::from_rows(&[vec![3.0], vec![4.0]]).unwrap();
        let qr = householder_qr(&a).unwrap();
        assert!((qr.r[(0, 0)].abs() - 5.0).abs() < 1e-15);
        assert_eq!(qr.r[(1, 0)], 0.0);
        assert!(residuals(&a, &qr).0 <= 1e-14);
        // Sign convention: the pivot 3 is positive, so beta is negative.
        assert!(qr.r[(0, 0)] < 0.0);
    }

    #[test]
    fn complex_tall() {
        let a = Matrix::from_fn(8, 5, |i, j| {
            let t = (i * 5 + j) as f64;
            C64::new((t * 0.7).sin(), (t * 1.3).cos())
        });
        let norms: Vec<f64> = (0..5)
            .map(|j| a.col(j).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt())
            .collect();
        let a = Matrix::from_fn(8, 5, |i, j| a[(i, j)] / norms[j]);
        let qr = householder_qr(&a).unwrap();
        let (back, orth) = residuals(&a, &qr);
        assert!(back <= 1e-13 * a.norm_fro(), "{back}");
        assert!(orth <= 1e-13, "{orth}");
        for i in 0..8 {
            for j in 0..i.min(5) {
                assert_eq!(qr.r[(i, j)], C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn zero_subcolumn_is_skipped() {
        let a = Matrix::from_rows(&[vec![C64::new(0.0, 2.0), C64::new(1.0, 0.0)], vec![
            C64::new(0.0, 0.0),
            C64::new(3.0, 0.0),
        ]])
        .unwrap();
        let qr = householder_qr(&a).unwrap();
        assert_eq!(qr.r[(0, 0)], C64::new(0.0, 2.0));
        assert_eq!(qr.q, Matrix::identity(2));
    }

    #[test]
    fn non_finite_rejected() {
        let a = Matrix::from_rows(&[vec![f64::NAN]]).unwrap();
        assert!(matches!(householder_qr(&a), Err(Error::InvalidInput(_))));
    }
}
