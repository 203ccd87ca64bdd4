//! Inner products of the reconstructed eigenvectors with given vectors.
//!
//! With `u_i ∝ (−1, ẑ_j/(d_j − λ_i))`, the product with `q` is
//! `(−q_0 + Φ(λ_i)) / √(1 + Ψ(λ_i))`, `Φ(λ) = Σ ẑ_j q_j/(d_j − λ)` and
//! `Ψ(λ) = Σ ẑ_j²/(d_j − λ)²`.

use super::Backend;
use crate::afmm::{chebyshev_order, FmmTree, Kernel, Point};
use crate::error::{Error, Result};
use crate::flops::OpCounter;
use crate::matrix::Matrix;
use rayon::prelude::*;

/// Columns handled by one batched far-field pass.
const BATCH: usize = 64;

/// Returns `Ûᵀ·q` for every column of `q` (`m×r`, row 0 the corner coordinate).
pub fn eigvec_inner_products(
    lambdas: &[Point],
    z_hat: &[f64],
    d: &[f64],
    q: &Matrix<f64>,
    eps_z: f64,
    backend: Backend,
    ops: &OpCounter,
) -> Result<Matrix<f64>> {
    let m = lambdas.len();
    if d.len() + 1 != m || z_hat.len() != d.len() || q.rows() != m {
        return Err(Error::ShapeMismatch("inner products need m roots, m−1 poles and m-row vectors".into()));
    }
    super::secular::check_interlacing(lambdas, d)?;
    match backend {
        Backend::Exact => Ok(direct(lambdas, z_hat, d, q, ops)),
        Backend::Fmm => fast(lambdas, z_hat, d, q, eps_z, ops),
    }
}

fn direct(lambdas: &[Point], z_hat: &[f64], d: &[f64], q: &Matrix<f64>, ops: &OpCounter) -> Matrix<f64> {
    let (m, r) = (lambdas.len(), q.cols());
    let mut out = Matrix::zeros(m, r);
    out.as_mut_slice().par_chunks_mut(r.max(1)).zip(lambdas.par_iter()).for_each(|(row, &l)| {
        let w: Vec<f64> = z_hat.iter().zip(d).map(|(&z, &p)| -z / l.diff(Point::new(p))).collect();
        let norm = (1.0 + w.iter().map(|x| x * x).sum::<f64>()).sqrt();
        row.iter_mut().zip(q.row(0)).for_each(|(o, &q0)| *o = -q0);
        for (j, &wj) in w.iter().enumerate() {
            for (o, &x) in row.iter_mut().zip(q.row(j + 1)) {
                *o += wj * x;
            }
        }
        row.iter_mut().for_each(|o| *o /= norm);
    });
    ops.add(m as u64 * d.len() as u64 * (5 + 2 * r as u64));
    out
}

fn fast(lambdas: &[Point], z_hat: &[f64], d: &[f64], q: &Matrix<f64>, eps: f64, ops: &OpCounter) -> Result<Matrix<f64>> {
    let (m, r) = (lambdas.len(), q.cols());
    let poles: Vec<Point> = d.iter().map(|&x| Point::new(x)).collect();
    let reach = lambdas
        .iter()
        .map(|l| l.value().abs())
        .chain(d.iter().map(|x| x.abs()))
        .chain(z_hat.iter().map(|z| z * z))
        .chain(q.as_slice().iter().map(|x| x.abs()))
        .fold(1.0, f64::max);
    let bound = 2.0 * reach;
    let p = chebyshev_order(poles.len(), eps);

    let squares: Vec<f64> = z_hat.iter().map(|z| z * z).collect();
    let psi_tree = FmmTree::new(Kernel::InverseSquare, &poles, bound, p, ops);
    let psi_map = psi_tree.locate(lambdas, None, ops);
    let norms: Vec<f64> = psi_tree.evaluate(&squares, 1, &psi_map, ops).iter().map(|s| (1.0 + s).sqrt()).collect();

    let phi_tree = FmmTree::new(Kernel::Inverse, &poles, bound, p, ops);
    let map = phi_tree.locate(lambdas, None, ops);
    let mut out = Matrix::zeros(m, r);
    for c0 in (0..r).step_by(BATCH) {
        let w = BATCH.min(r - c0);
        let mut weights = vec![0.0; d.len() * w];
        for (j, &z) in z_hat.iter().enumerate() {
            let src = &q.row(j + 1)[c0..c0 + w];
            for (dst, &x) in weights[j * w..(j + 1) * w].iter_mut().zip(src) {
                *dst = -z * x;
            }
        }
        let phi = phi_tree.evaluate(&weights, w, &map, ops);
        let q0 = &q.row(0)[c0..c0 + w];
        for i in 0..m {
            let row = &mut out.row_mut(i)[c0..c0 + w];
            for ((o, &f), &a) in row.iter_mut().zip(&phi[i * w..(i + 1) * w]).zip(q0) {
                *o = (f - a) / norms[i];
            }
        }
    }
    ops.add(m as u64 * r as u64 * 3 + d.len() as u64 * r as u64);
    Ok(out)
}
