use super::eig::diagonalize;
use super::{pow2_at_least, Reduced, ROUND_CAP};
use crate::arrowhead::Backend;
use crate::error::{Error, Result};
use crate::flops::OpCounter;
use crate::matrix::{matmul, DenseHermitian, Matrix};
use crate::scalar::{precision_floor, C64};

/// `A ≈ Ũ·diag(sigma)·Ṽ*` for an `m×n` matrix with `m ≥ n`.
#[derive(Clone, Debug)]
pub struct SvdResult {
    /// `m×n`.
    pub u: Matrix<C64>,
    /// Descending, positive.
    pub sigma: Vec<f64>,
    /// `n×n`.
    pub v: Matrix<C64>,
    /// Bound on `‖Ũ*Ũ − I‖`.
    pub orth_u: f64,
    /// Bound on `‖Ṽ*Ṽ − I‖`.
    pub orth_v: f64,
    /// Bound on `‖A − ŨΣ̃Ṽ*‖`.
    pub residual: f64,
}

/// SVD through the Gramian `A*A` of `A/‖A‖_F`.
///
/// The smallest Gramian eigenvalue is first bracketed by halving the
/// accuracy until `ε ≤ λ̃_min/4`, giving `κ̃ = λ̃_min^{-1/2}`. The Gramian is
/// then diagonalized at `ε' = eps/(n·κ̃)²` and `Ũ = A·Ṽ^{-*}·Σ̃^{-1}`.
pub fn svd(a: &Matrix<C64>, eps: f64) -> Result<SvdResult> {
    let (m, n) = (a.rows(), a.cols());
    if m < n || n == 0 {
        return Err(Error::ShapeMismatch(format!("SVD needs m ≥ n ≥ 1, got {m}x{n}")));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidInput(format!("eps = {eps} outside (0, 1/2)")));
    }
    if !a.is_finite() {
        return Err(Error::InvalidInput("non-finite entry".into()));
    }
    let f = a.norm_fro();
    if f == 0.0 {
        return Err(Error::RankDeficient("zero matrix".into()));
    }
    let ops = OpCounter::new();
    let a1 = a.scaled(1.0 / f);
    let gram = DenseHermitian::from_nearly_hermitian(matmul(&a1.adjoint(), &a1)?)?;

    let reduced = Reduced::new(&gram, Backend::default(), &ops)?;
    let mut e = 0.5;
    let lambda_min = loop {
        let (values, achieved) = reduced.eigenvalues(e, &ops)?;
        if values[0] > 0.0 && achieved <= values[0] / 4.0 {
            break values[0];
        }
        if e <= reduced.attainable() {
            return Err(Error::RankDeficient(format!(
                "smallest Gramian eigenvalue {:e} is not resolved at the precision floor {achieved:e}",
                values[0]
            )));
        }
        e *= 0.5;
    };
    let kappa = lambda_min.sqrt().recip();
    let eps_v = eps / (n as f64 * kappa).powi(2);
    let eig = diagonalize(&gram, eps_v, true, Backend::default(), &ops)?;

    let order: Vec<usize> = (0..n).rev().collect();
    let lambdas: Vec<f64> = order.iter().map(|&i| eig.values[i]).collect();
    if let Some(bad) = lambdas.iter().position(|&l| !(l > 0.0)) {
        return Err(Error::RankDeficient(format!("Gramian eigenvalue {bad} is {:e}", lambdas[bad])));
    }
    let v = Matrix::from_fn(n, n, |r, c| eig.vectors[(r, order[c])]);
    let s1: Vec<f64> = lambdas.iter().map(|l| l.sqrt()).collect();

    // Ṽ^{-*} = Ṽ·(Ṽ*Ṽ)^{-1} ≈ Ṽ·(I − E + E²) with E = Ṽ*Ṽ − I tiny.
    let err = matmul(&v.adjoint(), &v)?.minus_identity();
    let inv = Matrix::identity(n).sub(&err)?.add(&matmul(&err, &err)?)?;
    let mut u = matmul(&a1, &matmul(&v, &inv)?)?;
    for r in 0..m {
        for (x, s) in u.row_mut(r).iter_mut().zip(&s1) {
            *x /= *s;
        }
    }
    let backward = eig.backward_bound.max(precision_floor(n));
    Ok(SvdResult {
        u,
        sigma: s1.iter().map(|s| s * f).collect(),
        v,
        orth_u: 2.0 * backward / lambdas[n - 1],
        orth_v: eig.orth_bound,
        residual: eps * f,
    })
}

/// `σ_k(A)` (descending order) within relative error `eps`.
///
/// Eigenvalues of the dilation `[[0, A], [A*, 0]]`, which are `±σ_i`, are
/// computed at accuracies `ε_t = (1/2)^(2^t)` until `ε_t ≤ (eps/2)·σ̃_k`.
pub fn singular_value(a: &Matrix<C64>, k: usize, eps: f64) -> Result<f64> {
    let (m, n) = (a.rows(), a.cols());
    if k == 0 || k > m.min(n) {
        return Err(Error::InvalidInput(format!("singular value index {k} outside 1..={}", m.min(n))));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidInput(format!("eps = {eps} outside (0, 1/2)")));
    }
    sigma_k(a, k, eps)
}

/// The squaring loop of [`singular_value`]; valid for `eps ≤ 1/2`.
fn sigma_k(a: &Matrix<C64>, k: usize, eps: f64) -> Result<f64> {
    let (m, n) = (a.rows(), a.cols());
    if !a.is_finite() {
        return Err(Error::InvalidInput("non-finite entry".into()));
    }
    let scale = pow2_at_least(2.0 * a.spectral_norm_upper());
    let mut h = Matrix::zeros(m + n, m + n);
    let a1 = a.scaled(1.0 / scale);
    h.set_submatrix(0, m, &a1);
    h.set_submatrix(m, 0, &a1.adjoint());
    let ops = OpCounter::new();
    let reduced = Reduced::new(&DenseHermitian::new(h)?, Backend::default(), &ops)?;

    let mut eps_t: f64 = 0.5;
    for t in 0..ROUND_CAP {
        let (values, achieved) = reduced.eigenvalues(eps_t, &ops)?;
        let sigma = values[m + n - k];
        if sigma > 0.0 && achieved <= 0.5 * eps * sigma {
            return Ok(sigma * scale);
        }
        if eps_t <= reduced.attainable() {
            return Err(Error::IterationCap {
                cap: ROUND_CAP,
                what: format!("σ_{k} ≈ {:e} is below the attainable accuracy after {} rounds", sigma * scale, t + 1),
            });
        }
        eps_t *= eps_t;
    }
    Err(Error::IterationCap { cap: ROUND_CAP, what: format!("σ_{k} unresolved") })
}

/// `κ̃` with `κ ≤ κ̃ ≤ 3nκ` for a square nonsingular `A`: `A` is divided by
/// the power of two `M ≥ 2n·‖A‖_max` and `κ̃ = 1/σ̃_min(A/M)` at relative
/// accuracy 1/2.
pub fn condition_number(a: &Matrix<C64>) -> Result<f64> {
    let n = a.rows();
    if !a.is_square() || n == 0 {
        return Err(Error::ShapeMismatch("condition number needs a square matrix".into()));
    }
    let max = a.norm_max();
    if max == 0.0 {
        return Err(Error::RankDeficient("zero matrix".into()));
    }
    let big_m = pow2_at_least(2.0 * n as f64 * max);
    let sigma = sigma_k(&a.scaled(1.0 / big_m), n, 0.5)?;
    Ok(sigma.recip())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: &[f64]) -> Matrix<C64> {
        Matrix::from_diag(d).to_complex()
    }

    #[test]
    fn diagonal_svd() {
        let r = svd(&diag(&[0.6, 0.3]), 1e-8).unwrap();
        assert!((r.sigma[0] - 0.6).abs() <= 1e-8 && (r.sigma[1] - 0.3).abs() <= 1e-8);
        let swap = Matrix::from_rows(&[vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap().to_complex();
        let r = svd(&swap, 1e-8).unwrap();
        assert!(r.sigma.iter().all(|s| (s - 0.5).abs() <= 1e-8));
        assert!(matches!(svd(&Matrix::zeros(3, 2), 1e-6), Err(Error::RankDeficient(_))));
        assert!(svd(&Matrix::zeros(2, 3), 1e-6).is_err());
    }

    #[test]
    fn singular_values_of_a_diagonal() {
        let s = singular_value(&diag(&[0.5, 0.25]), 2, 0.1).unwrap();
        assert!((0.225..=0.275).contains(&s));
        let s = singular_value(&diag(&[0.5, 0.25]), 1, 1e-6).unwrap();
        assert!((s - 0.5).abs() <= 0.5e-6);
        assert!(matches!(singular_value(&diag(&[0.5, 0.0]), 2, 0.1), Err(Error::IterationCap { .. })));
    }

    #[test]
    fn condition_numbers_of_diagonals() {
        let k = condition_number(&Matrix::identity(8)).unwrap();
        assert!((1.0..=24.0).contains(&k), "{k}");
        let k = condition_number(&diag(&[1.0, 1e-3])).unwrap();
        assert!((1e3..=6e3).contains(&k), "{k}");
        let a = diag(&[0.7, 0.2, 0.05]);
        assert_eq!(condition_number(&a).unwrap(), condition_number(&a.scaled(2.0)).unwrap());
    }
}
