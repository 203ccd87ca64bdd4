//! Slow, trusted reference solvers used as test baselines.
//!
//! None of these routines is called by the production algorithms.

use crate::error::{Error, Result};
use crate::matrix::{DenseHermitian, Matrix};
use crate::scalar::{Scalar, C64};
use crate::tridiagonal::SymTridiagonal;

/// Largest dimension the oracles accept.
pub const ORACLE_MAX_N: usize = 1024;
const MAX_SWEEPS: usize = 100;

#[derive(Clone, Debug)]
pub struct OracleEig {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Unit eigenvectors as columns, in the order of `values`.
    pub vectors: Matrix<C64>,
}

#[derive(Clone, Debug)]
pub struct OracleSvd {
    /// Descending singular values.
    pub values: Vec<f64>,
    pub u: Matrix<C64>,
    pub v: Matrix<C64>,
}

/// Unitary 2×2 that diagonalizes `[[app, apq], [conj(apq), aqq]]` when applied
/// as `Vᴴ·A·V`; returns `(c, s, phase)` with `V = [[c, s], [−s·ph̄, c·ph̄]]`.
fn jacobi_rotation(app: f64, aqq: f64, apq: C64) -> (f64, f64, C64) {
    let r = apq.norm();
    let ph = apq / r;
    let zeta = (aqq - app) / (2.0 * r);
    let t = if zeta >= 0.0 {
        1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
    } else {
        -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, t * c, ph)
}

/// Cyclic Jacobi eigensolver for a Hermitian matrix.
pub fn jacobi_eig(a: &DenseHermitian) -> Result<OracleEig> {
    let n = a.n();
    if n > ORACLE_MAX_N {
        return Err(Error::InvalidInput(format!("oracle limited to n <= {ORACLE_MAX_N}")));
    }
    let mut m = a.matrix().clone();
    let mut v = Matrix::<C64>::identity(n);
    let total = m.norm_fro();
    let target = 1e-15 * total;
    let mut converged = n < 2 || total == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.norm() == 0.0 {
                    continue;
                }
                let (app, aqq) = (m[(p, p)].re, m[(q, q)].re);
                // Entries negligible next to both diagonals are dropped outright.
                if apq.norm() <= 1e-18 * (app.abs() + aqq.abs()) {
                    m[(p, q)] = C64::zero();
                    m[(q, p)] = C64::zero();
                    continue;
                }
                let (c, s, ph) = jacobi_rotation(app, aqq, apq);
                let phc = ph.conj();
                for k in 0..n {
                    let (x, y) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = x.scale(c) - y * phc.scale(s);
                    m[(k, q)] = x.scale(s) + y * phc.scale(c);
                }
                for k in 0..n {
                    let (x, y) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = x.scale(c) - y * ph.scale(s);
                    m[(q, k)] = x.scale(s) + y * ph.scale(c);
                }
                m[(p, q)] = C64::zero();
                m[(q, p)] = C64::zero();
                m[(p, p)] = C64::from_real(m[(p, p)].re);
                m[(q, q)] = C64::from_real(m[(q, q)].re);
                for k in 0..n {
                    let (x, y) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = x.scale(c) - y * phc.scale(s);
                    v[(k, q)] = x.scale(s) + y * phc.scale(c);
                }
            }
        }
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        converged = off <= target;
    }
    if !converged {
        return Err(Error::NoConvergence(format!("Jacobi after {MAX_SWEEPS} sweeps")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    Ok(OracleEig {
        values: order.iter().map(|&i| m[(i, i)].re).collect(),
        vectors: Matrix::from_fn(n, n, |i, j| v[(i, order[j])]),
    })
}

/// Real symmetric convenience wrapper around [`jacobi_eig`].
pub fn jacobi_eig_real(a: &Matrix<f64>) -> Result<OracleEig> {
    jacobi_eig(&DenseHermitian::from_real_symmetric(a)?)
}

/// Number of eigenvalues of `t` strictly below `x` (Sturm count via the
/// LDLᵀ pivot recurrence, with tiny pivots pushed to `-pivmin`).
pub fn sturm_count(t: &SymTridiagonal, x: f64) -> usize {
    let (d, e) = (t.diag(), t.off());
    let pivmin = f64::MIN_POSITIVE * e.iter().fold(1.0f64, |m, b| m.max(b * b));
    let mut count = 0;
    let mut q = 0.0;
    for i in 0..d.len() {
        q = if i == 0 { d[0] - x } else { (d[i] - x) - e[i - 1] * e[i - 1] / q };
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues of `t`, ascending, each within `eps` of the exact value.
pub fn sturm_bisect_eigenvalues(t: &SymTridiagonal, eps: f64) -> Result<Vec<f64>> {
    if eps <= 0.0 || eps.is_nan() {
        return Err(Error::InvalidInput("eps must be positive".into()));
    }
    let n = t.n();
    let (d, e) = (t.diag(), t.off());
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    let pad = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let (lo, hi) = (lo - pad, hi + pad);
    Ok((0..n)
        .map(|k| {
            let (mut a, mut b) = (lo, hi);
            loop {
                let mid = 0.5 * (a + b);
                if b - a <= eps || mid <= a || mid >= b {
                    return mid;
                }
                if sturm_count(t, mid) > k {
                    b = mid;
                } else {
                    a = mid;
                }
            }
        })
        .collect())
}

/// One-sided (Hestenes) Jacobi SVD of an `m×n` matrix with `m ≥ n`.
///
/// Singular values come out with small relative error, which makes this the
/// reference for condition numbers and tiny singular values.
pub fn jacobi_svd(a: &Matrix<C64>) -> Result<OracleSvd> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::ShapeMismatch("jacobi_svd needs m >= n".into()));
    }
    if n > ORACLE_MAX_N {
        return Err(Error::InvalidInput(format!("oracle limited to n <= {ORACLE_MAX_N}")));
    }
    // Work on columns stored as rows of the transpose.
    let mut w = a.transpose();
    let mut v = Matrix::<C64>::identity(n);
    // Columns count as orthogonal once |γ| is within the rounding error of
    // an m-term inner product.
    let tol = m as f64 * f64::EPSILON;
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        converged = true;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (wp, wq) = (w.row(p), w.row(q));
                    let alpha: f64 = wp.iter().map(|x| x.norm_sqr()).sum();
                    let beta: f64 = wq.iter().map(|x| x.norm_sqr()).sum();
                    let gamma: C64 = wp.iter().zip(wq).map(|(x, y)| x.conj() * y).sum();
                    (alpha, beta, gamma)
                };
                if gamma.norm() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                converged = false;
                let (c, s, ph) = jacobi_rotation(alpha, beta, gamma);
                let phc = ph.conj();
                let (wp, wq) = w.row_pair_mut(p, q);
                for (x, y) in wp.iter_mut().zip(wq.iter_mut()) {
                    let (a0, b0) = (*x, *y);
                    *x = a0.scale(c) - b0 * phc.scale(s);
                    *y = a0.scale(s) + b0 * phc.scale(c);
                }
                for k in 0..n {
                    let (x, y) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = x.scale(c) - y * phc.scale(s);
                    v[(k, q)] = x.scale(s) + y * phc.scale(c);
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence(format!("one-sided Jacobi after {MAX_SWEEPS} sweeps")));
    }
    let norms: Vec<f64> = (0..n)
        .map(|j| w.row(j).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let u = Matrix::from_fn(m, n, |i, j| {
        let k = order[j];
        if norms[k] > 0.0 {
            w[(k, i)] / norms[k]
        } else {
            C64::zero()
        }
    });
    Ok(OracleSvd {
        values: order.iter().map(|&k| norms[k]).collect(),
        u,
        v: Matrix::from_fn(n, n, |i, j| v[(i, order[j])]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::matmul;

    fn hermitian(n: usize, seed: u64) -> DenseHermitian {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut m = Matrix::from_fn(n, n, |_, _| C64::new(next(), next()));
        m.hermitize();
        DenseHermitian::new(m).unwrap()
    }

    #[test]
    fn diagonal_is_fixed_point() {
        let a = DenseHermitian::from_real_symmetric(&Matrix::from_diag(&[0.3, -1.0, 2.0])).unwrap();
        let e = jacobi_eig(&a).unwrap();
        assert_eq!(e.values, vec![-1.0, 0.3, 2.0]);
    }

    #[test]
    fn swap_matrix() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let e = jacobi_eig_real(&a).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e.vectors[(0, 0)].norm() - h).abs() < 1e-15);
        assert!((e.vectors[(0, 0)] + e.vectors[(1, 0)]).norm() < 1e-15);
    }

    #[test]
    fn random_residual_and_orthogonality() {
        let a = hermitian(16, 7);
        let e = jacobi_eig(&a).unwrap();
        let av = matmul(a.matrix(), &e.vectors).unwrap();
        let scale = a.matrix().norm_fro();
        for j in 0..16 {
            let r: f64 = (0..16)
                .map(|i| (av[(i, j)] - e.vectors[(i, j)].scale(e.values[j])).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(r <= 1e-13 * scale, "pair {j}: {r}");
        }
        let o = matmul(&e.vectors.adjoint(), &e.vectors).unwrap().minus_identity().norm_fro();
        assert!(o <= 1e-13);
    }

    #[test]
    fn sturm_examples() {
        let t = SymTridiagonal::new(vec![0.0; 3], vec![1.0, 1.0]).unwrap();
        let v = sturm_bisect_eigenvalues(&t, 1e-14).unwrap();
        let r2 = 2f64.sqrt();
        for (x, y) in v.iter().zip([-r2, 0.0, r2]) {
            assert!((x - y).abs() <= 1e-14);
        }
        let t = SymTridiagonal::new(vec![0.5, -0.2, 0.9], vec![0.0, 0.0]).unwrap();
        let v = sturm_bisect_eigenvalues(&t, 1e-15).unwrap();
        for (x, y) in v.iter().zip([-0.2, 0.5, 0.9]) {
            assert!((x - y).abs() <= 1e-15);
        }
        assert!(sturm_bisect_eigenvalues(&t, 0.0).is_err());
    }

    #[test]
    fn svd_of_planted_matrix() {
        let a = Matrix::from_rows(&[
            vec![C64::new(0.0, 0.0), C64::new(0.5, 0.0)],
            vec![C64::new(0.5, 0.0), C64::new(0.0, 0.0)],
            vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
        ])
        .unwrap();
        let s = jacobi_svd(&a).unwrap();
        assert!((s.values[0] - 0.5).abs() < 1e-15 && (s.values[1] - 0.5).abs() < 1e-15);
        let b = hermitian(6, 3).into_matrix();
        let s = jacobi_svd(&b).unwrap();
        let us = Matrix::from_fn(6, 6, |i, j| s.u[(i, j)].scale(s.values[j]));
        let back = matmul(&us, &s.v.adjoint()).unwrap().sub(&b).unwrap().norm_fro();
        assert!(back < 1e-14 * b.norm_fro());
    }
}
