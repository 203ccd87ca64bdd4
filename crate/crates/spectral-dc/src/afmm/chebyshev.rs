//! Chebyshev interpolation on `[-1, 1]` in barycentric form.

use std::f64::consts::PI;

/// Degree-`(p-1)` interpolant through the first-kind Chebyshev points.
#[derive(Clone, Debug)]
pub struct Chebyshev {
    pub nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `left[m][k] = L_m((t_k - 1)/2)`: parent basis at left-child nodes.
    pub left: Vec<f64>,
    /// Same for the right child, `(t_k + 1)/2`.
    pub right: Vec<f64>,
}

impl Chebyshev {
    pub fn new(p: usize) -> Self {
        let theta = |k: usize| (2 * k + 1) as f64 * PI / (2 * p) as f64;
        let nodes: Vec<f64> = (0..p).map(|k| theta(k).cos()).collect();
        let weights: Vec<f64> = (0..p)
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } * theta(k).sin())
            .collect();
        let mut c = Self {
            nodes,
            weights,
            left: vec![0.0; p * p],
            right: vec![0.0; p * p],
        };
        let mut buf = vec![0.0; p];
        for k in 0..p {
            c.basis((c.nodes[k] - 1.0) / 2.0, &mut buf);
            for m in 0..p {
                c.left[m * p + k] = buf[m];
            }
            c.basis((c.nodes[k] + 1.0) / 2.0, &mut buf);
            for m in 0..p {
                c.right[m * p + k] = buf[m];
            }
        }
        c
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// All Lagrange basis values at `x ∈ [-1, 1]`.
    pub fn basis(&self, x: f64, out: &mut [f64]) {
        if let Some(k) = self.nodes.iter().position(|&t| t == x) {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[k] = 1.0;
            return;
        }
        let mut total = 0.0;
        for ((o, &t), &w) in out.iter_mut().zip(&self.nodes).zip(&self.weights) {
            *o = w / (x - t);
            total += *o;
        }
        let inv = 1.0 / total;
        out.iter_mut().for_each(|v| *v *= inv);
    }
}
