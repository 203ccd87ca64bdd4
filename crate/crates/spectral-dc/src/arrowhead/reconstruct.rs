//! Shaft of the arrowhead whose eigenvalues are exactly the computed roots.

use super::Backend;
use crate::afmm::{chebyshev_order, FmmTree, Kernel, Point};
use crate::error::{Error, Result};
use crate::flops::OpCounter;
use rayon::prelude::*;

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructedArrowhead {
    pub alpha_hat: f64,
    pub z_hat: Vec<f64>,
}

/// Builds `[[α̂, ẑᵀ], [ẑ, diag(d)]]` with eigenvalues `lambdas`; the sign of
/// `ẑ_q` is taken from `z_signs[q]`.
pub fn reconstruct(
    lambdas: &[Point],
    d: &[f64],
    z_signs: &[f64],
    backend: Backend,
    eps_z: f64,
    ops: &OpCounter,
) -> Result<ReconstructedArrowhead> {
    super::secular::check_interlacing(lambdas, d)?;
    if z_signs.len() != d.len() {
        return Err(Error::ShapeMismatch("one sign per pole".into()));
    }
    let m = lambdas.len();
    let alpha_hat = lambdas[0].value()
        + lambdas[1..].iter().zip(d).map(|(l, &p)| l.diff(Point::new(p))).sum::<f64>();
    let magnitudes = match backend {
        Backend::Exact => product_formula(lambdas, d, ops),
        Backend::Fmm => log_sums(lambdas, d, eps_z, ops)?,
    };
    let z_hat = magnitudes.iter().zip(z_signs).map(|(a, s)| a.copysign(*s)).collect();
    ops.add(2 * m as u64);
    Ok(ReconstructedArrowhead { alpha_hat, z_hat })
}

/// `ẑ_q² = (d_q − λ_0)(λ_{m−1} − d_q) Π_{j≤q} (λ_j − d_q)/(d_{j−1} − d_q)
/// Π_{j>q} (λ_j − d_q)/(d_j − d_q)`; every factor is positive.
fn product_formula(lambdas: &[Point], d: &[f64], ops: &OpCounter) -> Vec<f64> {
    let m = lambdas.len();
    ops.add(d.len() as u64 * m as u64 * 6);
    (0..d.len())
        .into_par_iter()
        .map(|q| {
            let pq = Point::new(d[q]);
            let mut acc = -lambdas[0].diff(pq) * lambdas[m - 1].diff(pq);
            for (j, l) in lambdas.iter().enumerate().take(m - 1).skip(1) {
                let den = if j <= q { d[j - 1] - d[q] } else { d[j] - d[q] };
                acc *= l.diff(pq) / den;
            }
            acc.sqrt()
        })
        .collect()
}

/// `2 log|ẑ_q| = Σ_j log|λ_j − d_q| − Σ_{j≠q} log|d_j − d_q|`, both sums by FMM.
fn log_sums(lambdas: &[Point], d: &[f64], eps: f64, ops: &OpCounter) -> Result<Vec<f64>> {
    let poles: Vec<Point> = d.iter().map(|&x| Point::new(x)).collect();
    let reach = lambdas.iter().map(|l| l.value().abs()).chain(d.iter().map(|x| x.abs())).fold(1.0, f64::max);
    let bound = 2.0 * reach;
    let m = lambdas.len();

    let roots_tree = FmmTree::new(Kernel::Log, lambdas, bound, chebyshev_order(m, eps), ops);
    let map = roots_tree.locate(&poles, None, ops);
    let upper = roots_tree.evaluate(&vec![1.0; m], 1, &map, ops);

    let poles_tree = FmmTree::new(Kernel::Log, &poles, bound, chebyshev_order(poles.len(), eps), ops);
    let skip: Vec<usize> = (0..poles.len()).collect();
    let map = poles_tree.locate(&poles, Some(&skip), ops);
    let lower = poles_tree.evaluate(&vec![1.0; poles.len()], 1, &map, ops);

    ops.add(poles.len() as u64 * 22);
    Ok(upper.iter().zip(&lower).map(|(a, b)| (0.5 * (a - b)).exp()).collect())
}
