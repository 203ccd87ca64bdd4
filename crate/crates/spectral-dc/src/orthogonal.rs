//! Givens rotations and lazily composed orthogonal factors.

use crate::matrix::Matrix;

/// Plane rotation `[c s; -s c]` with `c ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Givens {
    pub c: f64,
    pub s: f64,
}

impl Givens {
    /// Rotation with `G·(a, b)ᵀ = (r, 0)ᵀ`; returns `(G, r)`.
    pub fn zeroing(a: f64, b: f64) -> (Self, f64) {
        if b == 0.0 {
            return (Self { c: 1.0, s: 0.0 }, a);
        }
        let r = a.hypot(b);
        let r = if a < 0.0 { -r } else { r };
        (Self { c: a / r, s: b / r }, r)
    }

    /// `(x, y) ← (c·x + s·y, −s·x + c·y)` elementwise.
    pub fn apply(&self, x: &mut [f64], y: &mut [f64]) {
        for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
            let (a, b) = (*xi, *yi);
            *xi = self.c * a + self.s * b;
            *yi = self.c * b - self.s * a;
        }
    }
}

/// One step of a composed orthogonal factor `G = O₁·O₂⋯O_k`.
#[derive(Clone, Debug, PartialEq)]
pub enum OrthoOp {
    /// `Oᵀx` gathers: `(Oᵀx)[i] = x[perm[i]]`.
    Permute(Vec<usize>),
    /// 2×2 orthogonal block on coordinates `(i, j)`: `(Oᵀx)_i = m₀x_i + m₁x_j`,
    /// `(Oᵀx)_j = m₂x_i + m₃x_j`.
    Plane { i: usize, j: usize, m: [f64; 4] },
}

/// Orthogonal `n×n` factor, either explicit or as a sequence of operations.
#[derive(Clone, Debug, PartialEq)]
pub enum OrthogonalFactor {
    Explicit(Matrix<f64>),
    Composed { n: usize, ops: Vec<OrthoOp> },
}

impl OrthogonalFactor {
    pub fn n(&self) -> usize {
        match self {
            Self::Explicit(m) => m.rows(),
            Self::Composed { n, .. } => *n,
        }
    }

    /// Overwrites the rows of `b` (n×r) with `Gᵀ·b` in `O(n·r)` per operation.
    pub fn apply_transpose(&self, b: &mut Matrix<f64>) {
        assert_eq!(b.rows(), self.n());
        match self {
            Self::Explicit(g) => {
                *b = crate::matrix::matmul(&g.transpose(), b).expect("conformable");
            }
            Self::Composed { ops, .. } => {
                for op in ops {
                    match op {
                        OrthoOp::Permute(perm) => {
                            let src = b.clone();
                            for (i, &p) in perm.iter().enumerate() {
                                b.row_mut(i).copy_from_slice(src.row(p));
                            }
                        }
                        OrthoOp::Plane { i, j, m } => {
                            let (ri, rj) = b.row_pair_mut(*i, *j);
                            for (x, y) in ri.iter_mut().zip(rj.iter_mut()) {
                                let (a, c) = (*x, *y);
                                *x = m[0] * a + m[1] * c;
                                *y = m[2] * a + m[3] * c;
                            }
                        }
                    }
                }
            }
        }
    }

    /// Explicit `G`.
    pub fn to_dense(&self) -> Matrix<f64> {
        match self {
            Self::Explicit(m) => m.clone(),
            Self::Composed { n, .. } => {
                let mut gt = Matrix::identity(*n);
                self.apply_transpose(&mut gt);
                gt.transpose()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::matmul;

    #[test]
    fn zeroing_rotation() {
        let (g, r) = Givens::zeroing(3.0, 4.0);
        assert!((r - 5.0).abs() < 1e-15);
        assert!(g.c >= 0.0);
        let (mut x, mut y) = ([3.0], [4.0]);
        g.apply(&mut x, &mut y);
        assert!((x[0] - 5.0).abs() < 1e-15 && y[0].abs() < 1e-15);
        let (g, r) = Givens::zeroing(-3.0, 4.0);
        assert!(g.c >= 0.0 && r < 0.0);
        let (g, r) = Givens::zeroing(-2.0, 0.0);
        assert_eq!((g.c, g.s, r), (1.0, 0.0, -2.0));
    }

    #[test]
    fn composed_factor_is_orthogonal() {
        let (c, s) = (0.6, 0.8);
        let g = OrthogonalFactor::Composed {
            n: 4,
            ops: vec![
                OrthoOp::Permute(vec![2, 0, 3, 1]),
                OrthoOp::Plane { i: 1, j: 3, m: [s, c, c, -s] },
            ],
        };
        let d = g.to_dense();
        let e = matmul(&d.transpose(), &d).unwrap().minus_identity().norm_max();
        assert!(e < 1e-15);
        let mut b = Matrix::from_fn(4, 2, |i, j| (i * 2 + j) as f64);
        let expect = matmul(&d.transpose(), &b).unwrap();
        g.apply_transpose(&mut b);
        assert!(b.sub(&expect).unwrap().norm_max() < 1e-14);
    }
}
