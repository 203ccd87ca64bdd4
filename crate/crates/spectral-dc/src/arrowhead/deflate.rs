use super::Arrowhead;
use crate::error::{Error, Result};
use crate::orthogonal::{OrthoOp, OrthogonalFactor};

/// `H ≈ G·(core ⊕ diag(deflated))·Gᵀ`, with the core in the leading block.
#[derive(Clone, Debug)]
pub struct DeflationOutcome {
    pub g: OrthogonalFactor,
    pub core: Arrowhead,
    /// `(position, eigenvalue)` of every deflated entry; positions follow the core.
    pub deflated: Vec<(usize, f64)>,
    pub tau: f64,
}

impl DeflationOutcome {
    /// The deflated matrix `core ⊕ diag(deflated)`.
    pub fn reduced_dense(&self) -> crate::Matrix<f64> {
        let n = self.g.n();
        let mut m = crate::Matrix::zeros(n, n);
        m.set_submatrix(0, 0, &self.core.to_dense());
        for &(pos, lambda) in &self.deflated {
            m[(pos, pos)] = lambda;
        }
        m
    }
}

/// Extracts exact eigenvalues from `H` so that the remaining core has
/// diagonal gaps above `tau` and shaft entries of magnitude at least `tau`.
///
/// Coordinates are numbered with the corner at 0 and `d_i` at `i + 1`.
pub fn deflate(h: &Arrowhead, tau: f64) -> Result<DeflationOutcome> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidInput(format!("deflation threshold {tau} outside (0, 1)")));
    }
    let n = h.n();
    let k = n - 1;
    let mut ops = Vec::new();

    // Step 1: stable sort of the diagonal.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| h.d[a].total_cmp(&h.d[b]));
    let mut d: Vec<f64> = order.iter().map(|&i| h.d[i]).collect();
    let mut z: Vec<f64> = order.iter().map(|&i| h.z[i]).collect();
    if order.iter().enumerate().any(|(i, &o)| i != o) {
        ops.push(OrthoOp::Permute(std::iter::once(0).chain(order.iter().map(|&i| i + 1)).collect()));
    }

    // Step 2: drop small shaft entries and move them behind the rest.
    let (keep, small): (Vec<usize>, Vec<usize>) = (0..k).partition(|&i| z[i].abs() >= tau);
    if !small.is_empty() {
        let perm: Vec<usize> = keep.iter().chain(&small).copied().collect();
        ops.push(OrthoOp::Permute(std::iter::once(0).chain(perm.iter().map(|&i| i + 1)).collect()));
        d = perm.iter().map(|&i| d[i]).collect();
        z = perm.iter().enumerate().map(|(pos, &i)| if pos < keep.len() { z[i] } else { 0.0 }).collect();
    }
    let m = keep.len();

    // Step 3: merge close diagonal pairs, scanning downward so that a kept
    // entry only ever moves up towards an already separated neighbour.
    let mut active: Vec<usize> = (0..m).collect();
    let mut merged = Vec::new();
    let mut pos = m;
    while pos >= 2 {
        let (lo, hi) = (active[pos - 2], active[pos - 1]);
        if d[hi] - d[lo] <= tau {
            let r = z[lo].hypot(z[hi]);
            let (s, c) = (z[lo] / r, z[hi] / r);
            let (dl, dh) = (d[lo], d[hi]);
            d[lo] = s * s * dl + c * c * dh;
            d[hi] = c * c * dl + s * s * dh;
            z[lo] = r;
            z[hi] = 0.0;
            ops.push(OrthoOp::Plane { i: lo + 1, j: hi + 1, m: [s, c, c, -s] });
            active.remove(pos - 1);
            merged.push(hi);
        }
        pos -= 1;
    }

    // Core to the front: corner, surviving poles in order, then the rest.
    let core_len = active.len();
    let mut tail: Vec<usize> = merged;
    tail.sort_unstable();
    let perm: Vec<usize> = active.iter().chain(&tail).copied().chain(m..k).collect();
    if perm.iter().enumerate().any(|(i, &o)| i != o) {
        ops.push(OrthoOp::Permute(std::iter::once(0).chain(perm.iter().map(|&i| i + 1)).collect()));
    }
    let core = Arrowhead {
        alpha: h.alpha,
        z: active.iter().map(|&i| z[i]).collect(),
        d: active.iter().map(|&i| d[i]).collect(),
    };
    let deflated = perm[core_len..]
        .iter()
        .enumerate()
        .map(|(off, &i)| (core_len + 1 + off, d[i]))
        .collect();
    Ok(DeflationOutcome { g: OrthogonalFactor::Composed { n, ops }, core, deflated, tau })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::matmul;

    fn residual(h: &Arrowhead, out: &DeflationOutcome) -> f64 {
        let g = out.g.to_dense();
        let rebuilt = matmul(&matmul(&g, &out.reduced_dense()).unwrap(), &g.transpose()).unwrap();
        h.to_dense().sub(&rebuilt).unwrap().norm_fro()
    }

    #[test]
    fn zero_shaft_entry_is_deflated() {
        let h = Arrowhead::new(0.0, vec![0.5, 0.0], vec![-0.3, 0.4]).unwrap();
        let out = deflate(&h, 1e-6).unwrap();
        assert_eq!(out.core.n(), 2);
        assert_eq!(out.deflated, vec![(2, 0.4)]);
        assert!(residual(&h, &out) < 1e-15);
    }

    #[test]
    fn close_pair_is_merged() {
        let h = Arrowhead::new(0.0, vec![0.5, 0.5], vec![0.2, 0.2 + 1e-9]).unwrap();
        let out = deflate(&h, 1e-6).unwrap();
        assert_eq!(out.core.n(), 2);
        assert!((out.core.z[0] - 0.5f64.hypot(0.5)).abs() < 1e-15);
        assert!(residual(&h, &out) <= 3e-6);
    }

    #[test]
    fn unsorted_input_and_chains() {
        let h = Arrowhead::new(0.1, vec![0.2, 1e-9, 0.3, 0.1, -0.2], vec![0.5, 0.1, -0.4, 0.5 + 1e-8, 0.5 - 1e-8]).unwrap();
        let out = deflate(&h, 1e-6).unwrap();
        assert_eq!(out.core.n(), 3);
        assert!(out.core.d.windows(2).all(|w| w[1] - w[0] > 1e-6));
        assert!(out.core.z.iter().all(|z| z.abs() >= 1e-6));
        assert!(residual(&h, &out) <= 6e-6);
    }

    #[test]
    fn rejects_bad_tau() {
        let h = Arrowhead::new(0.0, vec![0.5], vec![0.1]).unwrap();
        assert!(deflate(&h, 0.0).is_err());
        assert!(deflate(&h, 1.0).is_err());
    }
}
