//! Divide-and-conquer diagonalization of symmetric tridiagonal matrices.
//!
//! `T` is cut at its middle row into `T1`, `α`, `T2`. Given the children's
//! factorizations, `T = W·H̃·Wᵀ` with an arrowhead `H̃` whose shaft holds the
//! last row of `U1` and the first row of `U2` scaled by the couplings. The
//! arrowhead solver returns `QᵀWᵀ` directly, so no dense product is formed.

use crate::arrowhead::{diagonalize_with, eigenvalues_with, Arrowhead, ArrowheadParams, Backend};
use crate::error::{Error, Result};
use crate::flops::OpCounter;
use crate::matrix::Matrix;
use crate::scalar::check_precision;
use crate::tridiagonal::SymTridiagonal;

/// Below this size the children are solved on the current thread.
const PARALLEL_CUTOFF: usize = 256;

/// `ε' = c·ε/n³` per merge.
pub const LEVEL_CONSTANT: f64 = 1.0 / 64.0;

/// Approximate spectral factorization `T ≈ Ũ·diag(values)·Ũᵀ`.
#[derive(Clone, Debug)]
pub struct Diagonalization {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Eigenvectors as columns.
    pub vectors: Matrix<f64>,
    /// Guaranteed `‖T − ŨΛ̃Ũᵀ‖`.
    pub backward_bound: f64,
    /// Guaranteed `‖ŨᵀŨ − I‖`.
    pub orth_bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitPoint {
    pub k: usize,
    pub t1: SymTridiagonal,
    pub t2: SymTridiagonal,
    pub alpha_mid: f64,
    pub beta_left: f64,
    pub beta_right: f64,
}

/// Splits at row `k = ⌊(n−1)/2⌋`, so that `T1` is never the larger half.
pub fn split(t: &SymTridiagonal) -> Result<SplitPoint> {
    let n = t.n();
    if n < 3 {
        return Err(Error::InvalidInput(format!("cannot split a matrix of size {n}")));
    }
    if !t.is_unreduced() {
        return Err(Error::InvalidInput("split needs an unreduced matrix".into()));
    }
    let k = (n - 1) / 2;
    Ok(SplitPoint {
        k,
        t1: t.slice(0, k),
        t2: t.slice(k + 1, n),
        alpha_mid: t.diag()[k],
        beta_left: t.off()[k - 1],
        beta_right: t.off()[k],
    })
}

/// A child's contribution to its parent: eigenvalues plus either the whole
/// eigenvector matrix or only its first and last rows.
#[derive(Clone, Debug)]
pub struct ChildFactor {
    pub values: Vec<f64>,
    pub vectors: Option<Matrix<f64>>,
    pub first: Vec<f64>,
    pub last: Vec<f64>,
}

impl ChildFactor {
    pub fn full(values: Vec<f64>, vectors: Matrix<f64>) -> Self {
        let first = vectors.row(0).to_vec();
        let last = vectors.row(vectors.rows() - 1).to_vec();
        Self { values, vectors: Some(vectors), first, last }
    }
}

fn merge_arrowhead(sp: &SplitPoint, c1: &ChildFactor, c2: &ChildFactor) -> Result<Arrowhead> {
    let z = c1
        .last
        .iter()
        .map(|x| sp.beta_left * x)
        .chain(c2.first.iter().map(|x| sp.beta_right * x))
        .map(|x| 0.25 * x)
        .collect();
    let d = c1.values.iter().chain(&c2.values).map(|x| 0.25 * x).collect();
    Arrowhead::new(0.25 * sp.alpha_mid, z, d)
}

/// Merges two child factorizations into one for the parent.
///
/// The arrowhead is solved at a quarter scale with `B = Wᵀ/4`, giving
/// `Ũ = 4·Q̃_Bᵀ`. Without child vectors only `Wᵀe_1` and `Wᵀe_n` are
/// carried, which is all the parent's own parent needs.
pub fn assemble(sp: &SplitPoint, c1: &ChildFactor, c2: &ChildFactor, eps: f64, backend: Backend, ops: &OpCounter) -> Result<ChildFactor> {
    let (k1, k2) = (c1.values.len(), c2.values.len());
    let n = k1 + k2 + 1;
    let h = merge_arrowhead(sp, c1, c2)?;
    let params = ArrowheadParams::full(&h, 0.25 * eps);
    match (&c1.vectors, &c2.vectors) {
        (Some(u1), Some(u2)) => {
            let mut wt = Matrix::zeros(n, n);
            wt[(0, sp.k)] = 0.25;
            for r in 0..k1 {
                for (i, &x) in u1.row(r).iter().enumerate() {
                    wt[(1 + i, r)] = 0.25 * x;
                }
            }
            for r in 0..k2 {
                for (j, &x) in u2.row(r).iter().enumerate() {
                    wt[(1 + k1 + j, k1 + 1 + r)] = 0.25 * x;
                }
            }
            let out = diagonalize_with(&h, &wt, params, backend, ops)?;
            let mut u = out.qtb.transpose();
            u.scale_mut(4.0);
            let values = out.values.iter().map(|x| 4.0 * x).collect();
            Ok(ChildFactor::full(values, u))
        }
        _ => {
            let mut b = Matrix::zeros(n, 2);
            for (i, &x) in c1.first.iter().enumerate() {
                b[(1 + i, 0)] = 0.25 * x;
            }
            for (j, &x) in c2.last.iter().enumerate() {
                b[(1 + k1 + j, 1)] = 0.25 * x;
            }
            let out = diagonalize_with(&h, &b, params, backend, ops)?;
            Ok(ChildFactor {
                values: out.values.iter().map(|x| 4.0 * x).collect(),
                vectors: None,
                first: out.qtb.col(0).iter().map(|x| 4.0 * x).collect(),
                last: out.qtb.col(1).iter().map(|x| 4.0 * x).collect(),
            })
        }
    }
}

/// Closed-form factorization of a 1×1 or 2×2 block.
fn base_case(t: &SymTridiagonal) -> ChildFactor {
    let a = t.diag();
    if t.n() == 1 {
        return ChildFactor::full(vec![a[0]], Matrix::identity(1));
    }
    let (p, q, b) = (a[0], a[1], t.off()[0]);
    let (c, s, l1, l2) = if b == 0.0 {
        (1.0, 0.0, p, q)
    } else {
        let theta = (q - p) / (2.0 * b);
        let tt = 1f64.copysign(theta) / (theta.abs() + theta.hypot(1.0));
        let c = 1.0 / tt.hypot(1.0);
        (c, tt * c, p - tt * b, q + tt * b)
    };
    // Columns (c, −s) and (s, c) belong to l1 and l2.
    let (u, values) = if l1 <= l2 {
        (Matrix::from_rows(&[vec![c, s], vec![-s, c]]), vec![l1, l2])
    } else {
        (Matrix::from_rows(&[vec![s, c], vec![c, -s]]), vec![l2, l1])
    };
    ChildFactor::full(values, u.expect("2×2"))
}

fn solve(t: &SymTridiagonal, eps: f64, want_vectors: bool, backend: Backend, ops: &OpCounter) -> Result<ChildFactor> {
    if t.n() <= 2 {
        let mut f = base_case(t);
        if !want_vectors {
            f.vectors = None;
        }
        return Ok(f);
    }
    let sp = split(t)?;
    let (c1, c2) = if t.n() >= PARALLEL_CUTOFF {
        rayon::join(
            || solve(&sp.t1, eps, want_vectors, backend, ops),
            || solve(&sp.t2, eps, want_vectors, backend, ops),
        )
    } else {
        (
            solve(&sp.t1, eps, want_vectors, backend, ops),
            solve(&sp.t2, eps, want_vectors, backend, ops),
        )
    };
    assemble(&sp, &c1?, &c2?, eps, backend, ops)
}

fn validate(t: &SymTridiagonal, eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidInput(format!("eps = {eps} outside (0, 1/2)")));
    }
    check_precision(eps, t.n())
}

/// Power of two `s ≥ ‖T‖`, at least 1; dividing by it is exact.
pub fn scale_for(t: &SymTridiagonal) -> f64 {
    let norm = t.spectral_norm_upper();
    if norm <= 1.0 {
        1.0
    } else {
        2f64.powi(norm.log2().ceil() as i32)
    }
}

/// Diagonalizes `T` with `‖T − ŨΛ̃Ũᵀ‖ ≤ eps·s` and `‖ŨᵀŨ − I‖ ≤ eps/n²`,
/// where `s = 1` whenever `‖T‖ ≤ 1` and otherwise the power of two used to
/// scale `T` into the unit ball.
pub fn diagonalize(t: &SymTridiagonal, eps: f64, backend: Backend) -> Result<Diagonalization> {
    diagonalize_counted(t, eps, backend, &OpCounter::new())
}

pub fn diagonalize_counted(t: &SymTridiagonal, eps: f64, backend: Backend, ops: &OpCounter) -> Result<Diagonalization> {
    validate(t, eps)?;
    let n = t.n();
    let s = scale_for(t);
    let ts = t.scaled(1.0 / s);
    let level = LEVEL_CONSTANT * eps / (n as f64).powi(3);
    let mut values = Vec::with_capacity(n);
    let mut pieces = Vec::new();
    for (lo, hi) in ts.unreduced_blocks() {
        let f = solve(&ts.slice(lo, hi), level, true, backend, ops)?;
        pieces.push((lo, f.vectors.expect("full factor")));
        values.extend(f.values.iter().map(|x| x * s));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    // Column c of the block-diagonal vector matrix, with its owning block.
    let mut owner = Vec::with_capacity(n);
    for (b, (lo, u)) in pieces.iter().enumerate() {
        owner.extend((0..u.cols()).map(|c| (b, *lo, c)));
    }
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let (b, lo, c) = owner[src];
        let u = &pieces[b].1;
        for r in 0..u.rows() {
            vectors[(lo + r, dst)] = u[(r, c)];
        }
    }
    Ok(Diagonalization {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors,
        backward_bound: eps * s,
        orth_bound: eps / (n * n) as f64,
    })
}

/// Eigenvalues of `T` to absolute accuracy `eps·s` (see [`diagonalize`]).
pub fn eigenvalues_only(t: &SymTridiagonal, eps: f64, backend: Backend) -> Result<Vec<f64>> {
    eigenvalues_only_counted(t, eps, backend, &OpCounter::new())
}

pub fn eigenvalues_only_counted(t: &SymTridiagonal, eps: f64, backend: Backend, ops: &OpCounter) -> Result<Vec<f64>> {
    validate(t, eps)?;
    let n = t.n();
    let s = scale_for(t);
    let ts = t.scaled(1.0 / s);
    let level = LEVEL_CONSTANT * eps / (n as f64).powi(3);
    let mut values = Vec::with_capacity(n);
    for (lo, hi) in ts.unreduced_blocks() {
        let block = ts.slice(lo, hi);
        if block.n() <= 2 {
            values.extend(base_case(&block).values);
            continue;
        }
        let sp = split(&block)?;
        let (c1, c2) = rayon::join(
            || solve(&sp.t1, level, false, backend, ops),
            || solve(&sp.t2, level, false, backend, ops),
        );
        let h = merge_arrowhead(&sp, &c1?, &c2?)?;
        let params = ArrowheadParams::values_only(&h, 0.25 * eps);
        values.extend(eigenvalues_with(&h, params, backend, ops)?.iter().map(|x| 4.0 * x));
    }
    let mut values: Vec<f64> = values.iter().map(|x| x * s).collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::matmul;
    use crate::oracle::sturm_bisect_eigenvalues;

    fn check(t: &SymTridiagonal, eps: f64, backend: Backend) -> Diagonalization {
        let f = diagonalize(t, eps, backend).unwrap();
        let n = t.n();
        let lam = Matrix::from_diag(&f.values);
        let rebuilt = matmul(&matmul(&f.vectors, &lam).unwrap(), &f.vectors.transpose()).unwrap();
        let res = t.to_dense().sub(&rebuilt).unwrap().norm_fro();
        let orth = matmul(&f.vectors.transpose(), &f.vectors).unwrap().minus_identity().norm_fro();
        assert!(res <= f.backward_bound, "residual {res}");
        assert!(orth <= f.orth_bound, "orthogonality {orth} vs {}", f.orth_bound);
        assert_eq!(f.vectors.rows(), n);
        f
    }

    #[test]
    fn split_shapes() {
        let t = SymTridiagonal::new(vec![0.0; 3], vec![1.0, 1.0]).unwrap();
        let sp = split(&t).unwrap();
        assert_eq!((sp.t1.n(), sp.t2.n(), sp.alpha_mid, sp.beta_left, sp.beta_right), (1, 1, 0.0, 1.0, 1.0));
        let t5 = SymTridiagonal::new(vec![0.1; 5], vec![0.2; 4]).unwrap();
        let sp = split(&t5).unwrap();
        assert_eq!((sp.t1.n(), sp.t2.n()), (2, 2));
        let t4 = SymTridiagonal::new(vec![0.1; 4], vec![0.2; 3]).unwrap();
        let sp = split(&t4).unwrap();
        assert_eq!((sp.t1.n(), sp.t2.n()), (1, 2));
        let reduced = SymTridiagonal::new(vec![0.1; 4], vec![0.2, 0.0, 0.2]).unwrap();
        assert!(split(&reduced).is_err());
    }

    #[test]
    fn three_by_three_closed_form() {
        // Unit off-diagonals have norm √2; the result is scaled back.
        let t = SymTridiagonal::new(vec![0.0; 3], vec![1.0, 1.0]).unwrap();
        for backend in [Backend::Exact, Backend::Fmm] {
            let f = check(&t, 1e-8, backend);
            let r = std::f64::consts::SQRT_2;
            for (a, b) in f.values.iter().zip([-r, 0.0, r]) {
                assert!((a - b).abs() <= 1e-8 * 2.0, "{a} vs {b}");
            }
            let v = eigenvalues_only(&t, 1e-8, backend).unwrap();
            for (a, b) in v.iter().zip([-r, 0.0, r]) {
                assert!((a - b).abs() <= 1e-8 * 2.0);
            }
        }
    }

    #[test]
    fn diagonal_input_sorts() {
        let t = SymTridiagonal::new(vec![0.3, -0.2, 0.9], vec![0.0, 0.0]).unwrap();
        let f = check(&t, 1e-8, Backend::Exact);
        assert_eq!(f.values, vec![-0.2, 0.3, 0.9]);
        assert_eq!(f.vectors[(1, 0)], 1.0);
        assert_eq!(f.vectors[(0, 1)], 1.0);
        assert_eq!(f.vectors[(2, 2)], 1.0);
    }

    #[test]
    fn two_by_two_blocks() {
        for (p, q, b) in [(0.3, -0.1, 0.2), (-0.5, 0.5, 1e-9), (0.2, 0.2, -0.4), (0.7, 0.1, 0.0)] {
            let t = SymTridiagonal::new(vec![p, q], vec![b]).unwrap();
            check(&t, 1e-10, Backend::Exact);
        }
    }

    #[test]
    fn random_matrix_matches_sturm() {
        let n = 96;
        let diag: Vec<f64> = (0..n).map(|i| ((i * 29 % 31) as f64 / 31.0 - 0.5) * 0.5).collect();
        let off: Vec<f64> = (0..n - 1).map(|i| ((i * 7 % 13) as f64 + 1.0) / 60.0).collect();
        let t = SymTridiagonal::new(diag, off).unwrap();
        let reference = sturm_bisect_eigenvalues(&t, 1e-14).unwrap();
        for backend in [Backend::Exact, Backend::Fmm] {
            let f = check(&t, 1e-6, backend);
            let v = eigenvalues_only(&t, 1e-6, backend).unwrap();
            for ((a, b), c) in f.values.iter().zip(&v).zip(&reference) {
                assert!((a - c).abs() <= 1e-6 && (b - c).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn rejects_out_of_range_eps() {
        let t = SymTridiagonal::new(vec![0.0; 3], vec![0.5, 0.5]).unwrap();
        assert!(diagonalize(&t, 0.5, Backend::Exact).is_err());
        assert!(matches!(diagonalize(&t, 1e-17, Backend::Exact), Err(Error::PrecisionFloor { .. })));
    }
}
