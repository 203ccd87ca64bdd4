//! Reduction of Hermitian matrices to real symmetric tridiagonal form by
//! repeated bandwidth halving.
//!
//! At level `k` the (padded) `N×N` matrix is viewed as `b = N/2^k` blocks of
//! size `2^k` and is block-pentadiagonal. One halving sweep clears the second
//! block off-diagonal with block QR rotations, chasing each fill-in block two
//! positions down the band until it falls off the edge. Afterwards every
//! subdiagonal block is upper triangular, so at block size `2^(k−1)` the matrix
//! is again pentadiagonal.
//!
//! Block indices in this module are 1-based.

use crate::error::{Error, Result};
use crate::flops::OpCounter;
use crate::matrix::{matmul_counted, DenseHermitian, Matrix};
use crate::qr::householder_qr_counted;
use crate::scalar::{C64, UNIT_ROUNDOFF};
use crate::tridiagonal::SymTridiagonal;
use rayon::prelude::*;

/// Empirical constant in the recorded bounds, `c·u·N·(levels + 1)`.
pub const REDUCTION_CONSTANT: f64 = 16.0;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Hermitian matrix in the halving state `(k, s, t)`.
///
/// `s` is the clearing frontier: `A_{i,i−2} = 0` for `i ≤ s`, and `A_{i,i−1}`
/// is upper triangular for `i < s`. `t ≠ 0` marks a bulge block at
/// `(t, t−3)` and its mirror.
#[derive(Clone, Debug)]
pub struct BlockBanded {
    a: Matrix<C64>,
    n: usize,
    k: u32,
    s: usize,
    t: usize,
}

impl BlockBanded {
    /// Pads `a` with an identity block to the next power of two and checks
    /// that it is block-pentadiagonal at block size `2^k`.
    pub fn new(a: &DenseHermitian, k: u32) -> Result<Self> {
        let n = a.n();
        let big = n.max(1).next_power_of_two();
        if 1usize << k > big {
            return Err(Error::InvalidInput(format!("block size 2^{k} exceeds padded size {big}")));
        }
        let mut m = Matrix::identity(big);
        m.set_submatrix(0, 0, a.matrix());
        let out = Self { a: m, n, k, s: 2, t: 0 };
        out.check_structure()?;
        Ok(out)
    }

    /// Original (unpadded) dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Padded dimension `N`.
    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn level(&self) -> u32 {
        self.k
    }

    pub fn block_size(&self) -> usize {
        1 << self.k
    }

    pub fn blocks(&self) -> usize {
        self.dim() >> self.k
    }

    pub fn frontier(&self) -> usize {
        self.s
    }

    pub fn bulge(&self) -> usize {
        self.t
    }

    /// Padded dense storage.
    pub fn matrix(&self) -> &Matrix<C64> {
        &self.a
    }

    /// The leading `n×n` part.
    pub fn to_dense(&self) -> Matrix<C64> {
        self.a.submatrix(0, 0, self.n, self.n)
    }

    pub fn block(&self, i: usize, j: usize) -> Matrix<C64> {
        let nb = self.block_size();
        self.a.submatrix((i - 1) * nb, (j - 1) * nb, nb, nb)
    }

    fn block_is_zero(&self, i: usize, j: usize) -> bool {
        let nb = self.block_size();
        let (r0, c0) = ((i - 1) * nb, (j - 1) * nb);
        (r0..r0 + nb).all(|r| self.a.row(r)[c0..c0 + nb].iter().all(|&x| x == ZERO))
    }

    fn block_is_upper(&self, i: usize, j: usize) -> bool {
        let nb = self.block_size();
        let (r0, c0) = ((i - 1) * nb, (j - 1) * nb);
        (0..nb).all(|r| self.a.row(r0 + r)[c0..c0 + r].iter().all(|&x| x == ZERO))
    }

    /// Verifies the exact zero pattern of the current state.
    pub fn check_structure(&self) -> Result<()> {
        if !self.a.is_hermitian() {
            return Err(Error::NotHermitian);
        }
        let b = self.blocks();
        let bad = |what: String| Err(Error::BulgeState(what));
        for i in 1..=b {
            for j in 1..i {
                let allowed = i - j <= 2 || (self.t != 0 && i == self.t && j + 3 == i);
                if !allowed && !self.block_is_zero(i, j) {
                    return bad(format!("block ({i}, {j}) outside the band is nonzero"));
                }
            }
        }
        for i in 3..=self.s.min(b) {
            if !self.block_is_zero(i, i - 2) {
                return bad(format!("block ({i}, {}) behind the frontier is nonzero", i - 2));
            }
        }
        for i in 2..self.s.min(b + 1) {
            if !self.block_is_upper(i, i - 1) {
                return bad(format!("block ({i}, {}) is not upper triangular", i - 1));
            }
        }
        Ok(())
    }

    /// One block rotation on rows `rows.0 .. rows.0 + rows.1`: QR of the
    /// column blocks `cols`, the transform applied to the central blocks and
    /// to the listed outer column blocks, and mirrored. Returns `Q`.
    fn rotate(&mut self, rows: (usize, usize), cols: (usize, usize), outer: &[usize], ops: &OpCounter) -> Result<Matrix<C64>> {
        let nb = self.block_size();
        let b = self.blocks();
        let (r0, nr) = ((rows.0 - 1) * nb, rows.1 * nb);
        let (c0, nc) = ((cols.0 - 1) * nb, cols.1 * nb);

        let qr = householder_qr_counted(&self.a.submatrix(r0, c0, nr, nc), ops)?;
        let q = qr.q;
        let qh = q.adjoint();
        self.a.set_submatrix(r0, c0, &qr.r);
        self.a.set_submatrix(c0, r0, &qr.r.adjoint());

        let central = matmul_counted(&matmul_counted(&qh, &self.a.submatrix(r0, r0, nr, nr), ops)?, &q, ops)?;
        let mut central = central;
        central.hermitize();
        self.a.set_submatrix(r0, r0, &central);

        for &c in outer.iter().filter(|&&c| c >= 1 && c <= b) {
            let x = matmul_counted(&qh, &self.a.submatrix(r0, (c - 1) * nb, nr, nb), ops)?;
            self.a.set_submatrix(r0, (c - 1) * nb, &x);
            self.a.set_submatrix((c - 1) * nb, r0, &x.adjoint());
        }
        Ok(q)
    }

    /// Rotation `R_i`: triangularizes `A_{i,i−1}`, zeroes `A_{i+1,i−1}` and
    /// creates the bulge at `(i+3, i)`. For `i = b` only `A_{b,b−1}` is
    /// triangularized. Returns the `Q` acting on block rows `i, i+1`.
    pub fn rotate_r(&mut self, i: usize, ops: &OpCounter) -> Result<Matrix<C64>> {
        let b = self.blocks();
        if self.t != 0 {
            return Err(Error::BulgeState(format!("bulge at block row {} is still present", self.t)));
        }
        if self.s != i || i < 2 || i > b {
            return Err(Error::BulgeState(format!("rotation {i} does not match frontier {} of {b}", self.s)));
        }
        let q = if i == b {
            self.rotate((b, 1), (b - 1, 1), &[], ops)?
        } else {
            self.rotate((i, 2), (i - 1, 1), &[i + 2, i + 3], ops)?
        };
        self.s = i + 1;
        self.t = if i + 3 <= b { i + 3 } else { 0 };
        Ok(q)
    }

    /// Rotation `R′_j`: removes the bulge at `(j+1, j−2)` from block rows
    /// `j, j+1`, moving it to `(j+3, j)` or off the matrix.
    pub fn rotate_r_prime(&mut self, j: usize, ops: &OpCounter) -> Result<Matrix<C64>> {
        if self.t == 0 || self.t != j + 1 {
            return Err(Error::BulgeState(format!("no bulge at block row {}", j + 1)));
        }
        let q = self.rotate((j, 2), (j - 2, 2), &[j + 2, j + 3], ops)?;
        self.t = if j + 3 <= self.blocks() { j + 3 } else { 0 };
        Ok(q)
    }

    /// One halving pass, leaving the matrix pentadiagonal at level `k − 1`.
    /// With `want_q` returns `Q̂` (`N×N`) with `A_before = Q̂·A_after·Q̂*`.
    pub fn halve(&mut self, want_q: bool, ops: &OpCounter) -> Result<Option<Matrix<C64>>> {
        if self.t != 0 || self.s != 2 {
            return Err(Error::BulgeState("halving needs a clean pentadiagonal matrix".into()));
        }
        let b = self.blocks();
        let nb = self.block_size();
        let mut factors = Vec::new();
        for i in 2..=b {
            let mut pieces = vec![(i, self.rotate_r(i, ops)?)];
            let mut j = i + 2;
            while self.t != 0 {
                pieces.push((j, self.rotate_r_prime(j, ops)?));
                j += 2;
            }
            if want_q {
                factors.push(BlockBand::from_pieces(self.dim(), nb, &pieces));
            }
        }
        self.k = self.k.saturating_sub(1);
        self.s = 2;
        if !want_q {
            return Ok(None);
        }
        Ok(Some(tree_product(factors, self.dim(), nb, ops)?.to_dense()))
    }
}

/// Square block-banded matrix: `hb` block diagonals on each side of the
/// main block diagonal, stored block by block.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockBand {
    n: usize,
    bs: usize,
    hb: usize,
    blocks: Vec<Matrix<C64>>,
}

impl BlockBand {
    pub fn zeros(n: usize, bs: usize, hb: usize) -> Result<Self> {
        if bs == 0 || !n.is_multiple_of(bs) {
            return Err(Error::ShapeMismatch(format!("block size {bs} does not divide {n}")));
        }
        let nblk = n / bs;
        Ok(Self { n, bs, hb, blocks: vec![Matrix::zeros(bs, bs); nblk * (2 * hb + 1)] })
    }

    pub fn identity(n: usize, bs: usize) -> Result<Self> {
        let mut m = Self::zeros(n, bs, 0)?;
        m.blocks.iter_mut().for_each(|b| *b = Matrix::identity(bs));
        Ok(m)
    }

    /// Reads `hb` block diagonals of `m`; entries outside them must be zero.
    pub fn from_dense(m: &Matrix<C64>, bs: usize, hb: usize) -> Result<Self> {
        let n = m.rows();
        let mut out = Self::zeros(n, bs, hb)?;
        for r in 0..n {
            for c in 0..n {
                let (i, j) = (r / bs, c / bs);
                if i.abs_diff(j) > hb {
                    if m[(r, c)] != ZERO {
                        return Err(Error::ShapeMismatch(format!("entry ({r}, {c}) lies outside the block band")));
                    }
                } else {
                    out.block_mut(i, j)[(r % bs, c % bs)] = m[(r, c)];
                }
            }
        }
        Ok(out)
    }

    /// `I` with the given `Q` blocks placed on block rows `j..j+q/bs`.
    fn from_pieces(n: usize, bs: usize, pieces: &[(usize, Matrix<C64>)]) -> Self {
        let mut out = Self::identity(n, bs).expect("power-of-two sizes").widened(1);
        for (j, q) in pieces {
            let w = q.rows() / bs;
            for a in 0..w {
                for c in 0..w {
                    *out.block_mut(j - 1 + a, j - 1 + c) = q.submatrix(a * bs, c * bs, bs, bs);
                }
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_size(&self) -> usize {
        self.bs
    }

    pub fn half_bandwidth(&self) -> usize {
        self.hb
    }

    fn nblk(&self) -> usize {
        self.n / self.bs
    }

    /// Block `(i, j)`, 0-based; `None` outside the band.
    pub fn block(&self, i: usize, j: usize) -> Option<&Matrix<C64>> {
        (i.abs_diff(j) <= self.hb && i < self.nblk() && j < self.nblk())
            .then(|| &self.blocks[i * (2 * self.hb + 1) + j + self.hb - i])
    }

    fn block_mut(&mut self, i: usize, j: usize) -> &mut Matrix<C64> {
        let w = 2 * self.hb + 1;
        &mut self.blocks[i * w + j + self.hb - i]
    }

    fn widened(&self, hb: usize) -> Self {
        let mut out = Self::zeros(self.n, self.bs, hb.max(self.hb)).expect("same shape");
        for i in 0..self.nblk() {
            for j in i.saturating_sub(self.hb)..(i + self.hb + 1).min(self.nblk()) {
                *out.block_mut(i, j) = self.block(i, j).expect("in band").clone();
            }
        }
        out
    }

    pub fn to_dense(&self) -> Matrix<C64> {
        let mut m = Matrix::zeros(self.n, self.n);
        for i in 0..self.nblk() {
            for j in i.saturating_sub(self.hb)..(i + self.hb + 1).min(self.nblk()) {
                m.set_submatrix(i * self.bs, j * self.bs, self.block(i, j).expect("in band"));
            }
        }
        m
    }

    /// The same matrix at block size `bs2`, a multiple of the current one.
    pub fn reblock(&self, bs2: usize) -> Result<Self> {
        if !bs2.is_multiple_of(self.bs) || !self.n.is_multiple_of(bs2) {
            return Err(Error::ShapeMismatch(format!("cannot reblock {} to {bs2}", self.bs)));
        }
        let f = bs2 / self.bs;
        let hb2 = self.hb.div_ceil(f);
        let mut out = Self::zeros(self.n, bs2, hb2)?;
        for i in 0..self.nblk() {
            for j in i.saturating_sub(self.hb)..(i + self.hb + 1).min(self.nblk()) {
                let src = self.block(i, j).expect("in band");
                let (r, c) = ((i % f) * self.bs, (j % f) * self.bs);
                out.block_mut(i / f, j / f).set_submatrix(r, c, src);
            }
        }
        Ok(out)
    }
}

/// Product of two block-tridiagonal matrices as a block-pentadiagonal one.
pub fn block_tridiag_matmul(a: &BlockBand, b: &BlockBand, ops: &OpCounter) -> Result<BlockBand> {
    if a.n != b.n || a.bs != b.bs {
        return Err(Error::ShapeMismatch("block-tridiagonal factors must share size and block size".into()));
    }
    if a.hb > 1 || b.hb > 1 {
        return Err(Error::ShapeMismatch("factors must be block-tridiagonal".into()));
    }
    let (a, b) = (a.widened(1), b.widened(1));
    let nblk = a.nblk();
    let mut out = BlockBand::zeros(a.n, a.bs, 2)?;
    let rows: Vec<Vec<(usize, Matrix<C64>)>> = (0..nblk)
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::new();
            for j in i.saturating_sub(2)..(i + 3).min(nblk) {
                let mut acc: Option<Matrix<C64>> = None;
                for l in i.saturating_sub(1)..(i + 2).min(nblk) {
                    if let (Some(x), Some(y)) = (a.block(i, l), b.block(l, j)) {
                        let p = matmul_counted(x, y, ops).expect("square blocks");
                        acc = Some(match acc {
                            Some(s) => s.add(&p).expect("square blocks"),
                            None => p,
                        });
                    }
                }
                if let Some(s) = acc {
                    row.push((j, s));
                }
            }
            row
        })
        .collect();
    for (i, row) in rows.into_iter().enumerate() {
        for (j, s) in row {
            *out.block_mut(i, j) = s;
        }
    }
    Ok(out)
}

/// `F_0·F_1⋯F_{m−1}` by pairwise products, doubling the block size per level
/// so every operand stays block-tridiagonal.
fn tree_product(mut factors: Vec<BlockBand>, n: usize, bs: usize, ops: &OpCounter) -> Result<BlockBand> {
    if factors.is_empty() {
        return BlockBand::identity(n, bs);
    }
    while factors.len() > 1 {
        let bs2 = 2 * factors[0].bs;
        factors = factors
            .par_chunks(2)
            .map(|pair| match pair {
                [x, y] => block_tridiag_matmul(x, y, ops)?.reblock(bs2),
                [x] => x.reblock(bs2),
                _ => unreachable!(),
            })
            .collect::<Result<_>>()?;
    }
    Ok(factors.pop().expect("one factor left"))
}

/// `A ≈ Q̃·T̃·Q̃*` with `T̃` real symmetric tridiagonal.
#[derive(Clone, Debug)]
pub struct ReductionResult {
    pub t: SymTridiagonal,
    pub q: Option<Matrix<C64>>,
    /// Bound on `‖A − Q̃T̃Q̃*‖/‖A‖`.
    pub backward_bound: f64,
    /// Bound on `‖Q̃Q̃* − I‖`.
    pub orth_defect: f64,
    /// Levels at which a halving pass ran, in order.
    pub levels: Vec<u32>,
}

/// First halving level for bandwidth `d`: the smallest `k` with `d ≤ 2^(k+1)`.
pub fn start_level(d: usize) -> Option<u32> {
    (d > 1).then(|| (d.next_power_of_two().trailing_zeros()).saturating_sub(1))
}

pub fn tridiagonalize(a: &DenseHermitian, want_q: bool) -> Result<ReductionResult> {
    tridiagonalize_counted(a, want_q, &OpCounter::new())
}

/// Halves from the level matching the bandwidth of `a` down to block size 1,
/// then rotates the off-diagonal real and positive with a diagonal unitary.
pub fn tridiagonalize_counted(a: &DenseHermitian, want_q: bool, ops: &OpCounter) -> Result<ReductionResult> {
    let n = a.n();
    if n == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    let big = n.next_power_of_two();
    let levels: Vec<u32> = match start_level(a.bandwidth()) {
        Some(k0) => (0..=k0.min(big.trailing_zeros().saturating_sub(1))).rev().collect(),
        None => Vec::new(),
    };
    let mut q: Option<Matrix<C64>> = want_q.then(|| Matrix::identity(big));
    let mut m = BlockBanded::new(a, levels.first().copied().unwrap_or(0))?;
    for _ in &levels {
        let qh = m.halve(want_q, ops)?;
        if let (Some(acc), Some(qh)) = (q.as_mut(), qh) {
            *acc = matmul_counted(acc, &qh, ops)?;
        }
    }

    let full = m.matrix();
    let diag: Vec<f64> = (0..n).map(|i| full[(i, i)].re).collect();
    let mut off = Vec::with_capacity(n - 1);
    let mut phase = vec![C64::new(1.0, 0.0); n];
    for i in 0..n - 1 {
        let e = full[(i + 1, i)];
        let r = e.norm();
        off.push(r);
        phase[i + 1] = if r > 0.0 { phase[i] * (e / r) } else { phase[i] };
    }
    let q = q.map(|acc| {
        let mut q = acc.submatrix(0, 0, n, n);
        for r in 0..n {
            for (x, p) in q.row_mut(r).iter_mut().zip(&phase) {
                *x *= *p;
            }
        }
        q
    });
    let bound = REDUCTION_CONSTANT * UNIT_ROUNDOFF * big as f64 * (levels.len() + 1) as f64;
    Ok(ReductionResult { t: SymTridiagonal::new(diag, off)?, q, backward_bound: bound, orth_defect: bound, levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::jacobi_eig;

    fn sample(n: usize, seed: u64) -> DenseHermitian {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let m = Matrix::from_fn(n, n, |_, _| C64::new(next(), next()));
        DenseHermitian::from_nearly_hermitian(m.add(&m.adjoint()).unwrap().scaled(0.5 / n as f64)).unwrap()
    }

    /// The blocks of `a` within two block diagonals at block size `2^k`.
    fn pentadiagonal_part(a: &DenseHermitian, k: u32) -> DenseHermitian {
        let nb = 1 << k;
        let m = Matrix::from_fn(a.n(), a.n(), |i, j| if (i / nb).abs_diff(j / nb) <= 2 { a.matrix()[(i, j)] } else { ZERO });
        DenseHermitian::new(m).unwrap()
    }

    fn residual(before: &Matrix<C64>, q: &Matrix<C64>, after: &Matrix<C64>) -> f64 {
        let back = crate::matmul(&crate::matmul(q, after).unwrap(), &q.adjoint()).unwrap();
        before.sub(&back).unwrap().norm_fro()
    }

    fn sorted_eigs(m: &Matrix<C64>) -> Vec<f64> {
        jacobi_eig(&DenseHermitian::from_nearly_hermitian(m.clone()).unwrap()).unwrap().values
    }

    #[test]
    fn four_by_four_rotation_preserves_eigenvalues() {
        let rows = [[2.0, 1.0, 1.0, 0.0], [1.0, 2.0, 1.0, 1.0], [1.0, 1.0, 2.0, 1.0], [0.0, 1.0, 1.0, 2.0]];
        let m = Matrix::from_fn(4, 4, |i, j| C64::new(rows[i][j], 0.0));
        let a = DenseHermitian::new(m.clone()).unwrap();
        let mut bb = BlockBanded::new(&a, 0).unwrap();
        bb.rotate_r(2, &OpCounter::new()).unwrap();
        bb.check_structure().unwrap();
        assert_eq!(bb.matrix()[(2, 0)], ZERO);
        assert_eq!(bb.bulge(), 0);
        for (x, y) in sorted_eigs(&m).iter().zip(sorted_eigs(bb.matrix())) {
            assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn rotations_are_local_similarities() {
        let a = sample(16, 3);
        let ops = OpCounter::new();
        assert!(BlockBanded::new(&a, 1).is_err());
        let mut bb = BlockBanded::new(&pentadiagonal_part(&a, 1), 1).unwrap();
        let before = bb.matrix().clone();
        let q = bb.rotate_r(2, &ops).unwrap();
        bb.check_structure().unwrap();
        assert_eq!(bb.bulge(), 5);
        let mut full = Matrix::identity(16);
        full.set_submatrix(2, 2, &q);
        assert!(residual(&before, &full, bb.matrix()) <= 1e-12 * before.norm_fro());

        let before = bb.matrix().clone();
        let q = bb.rotate_r_prime(4, &ops).unwrap();
        bb.check_structure().unwrap();
        assert_eq!(bb.bulge(), 7);
        let mut full = Matrix::identity(16);
        full.set_submatrix(6, 6, &q);
        assert!(residual(&before, &full, bb.matrix()) <= 1e-12 * before.norm_fro());

        bb.rotate_r_prime(6, &ops).unwrap();
        bb.check_structure().unwrap();
        assert_eq!((bb.bulge(), bb.frontier()), (0, 3));
    }

    #[test]
    fn wrong_bulge_state_is_rejected() {
        let a = pentadiagonal_part(&sample(16, 1), 1);
        let ops = OpCounter::new();
        let mut bb = BlockBanded::new(&a, 1).unwrap();
        assert!(matches!(bb.rotate_r_prime(2, &ops), Err(Error::BulgeState(_))));
        bb.rotate_r(2, &ops).unwrap();
        assert!(matches!(bb.rotate_r(3, &ops), Err(Error::BulgeState(_))));
        assert!(matches!(bb.halve(false, &ops), Err(Error::BulgeState(_))));
    }

    #[test]
    fn halve_to_tridiagonal() {
        let a = sample(8, 7);
        let mut bb = BlockBanded::new(&a, 2).unwrap();
        let ops = OpCounter::new();
        let mut q = Matrix::identity(8);
        for bandwidth in [4, 2, 1] {
            let before = bb.matrix().clone();
            let qh = bb.halve(true, &ops).unwrap().unwrap();
            assert!(residual(&before, &qh, bb.matrix()) <= 1e-11 * before.norm_fro());
            assert_eq!(DenseHermitian::new(bb.matrix().clone()).unwrap().bandwidth(), bandwidth);
            q = crate::matmul(&q, &qh).unwrap();
        }
        assert!(residual(a.matrix(), &q, bb.matrix()) <= 1e-11 * a.matrix().norm_fro());
        for (x, y) in sorted_eigs(a.matrix()).iter().zip(sorted_eigs(bb.matrix())) {
            assert!((x - y).abs() <= 1e-11);
        }
    }

    #[test]
    fn block_products_match_dense() {
        let ops = OpCounter::new();
        let a = BlockBand::from_dense(&sample(16, 5).matrix().clone(), 2, 7).unwrap();
        let cut = |m: &BlockBand| {
            let d = m.to_dense();
            BlockBand::from_dense(&Matrix::from_fn(16, 16, |i, j| if (i / 2).abs_diff(j / 2) <= 1 { d[(i, j)] } else { ZERO }), 2, 1)
                .unwrap()
        };
        let (x, y) = (cut(&a), cut(&BlockBand::from_dense(sample(16, 9).matrix(), 2, 7).unwrap()));
        let p = block_tridiag_matmul(&x, &y, &ops).unwrap();
        assert_eq!(p.half_bandwidth(), 2);
        let dense = crate::matmul(&x.to_dense(), &y.to_dense()).unwrap();
        assert!(p.to_dense().sub(&dense).unwrap().norm_max() <= 1e-13);
        let id = BlockBand::identity(16, 2).unwrap().widened(1);
        assert_eq!(block_tridiag_matmul(&x, &id, &ops).unwrap().to_dense(), x.to_dense());
        let zero = BlockBand::zeros(16, 2, 1).unwrap();
        assert_eq!(block_tridiag_matmul(&zero, &y, &ops).unwrap().to_dense(), Matrix::zeros(16, 16));
        assert!(block_tridiag_matmul(&x, &BlockBand::identity(16, 4).unwrap(), &ops).is_err());
    }

    #[test]
    fn trivial_inputs_pass_through() {
        let t = SymTridiagonal::new(vec![0.1, 0.2, 0.3], vec![0.5, -0.25]).unwrap();
        let a = DenseHermitian::from_real_symmetric(&t.to_dense()).unwrap();
        let r = tridiagonalize(&a, true).unwrap();
        assert_eq!(r.t.diag(), t.diag());
        assert_eq!(r.t.off(), &[0.5, 0.25]);
        assert!(r.levels.is_empty());

        let a = DenseHermitian::from_real_symmetric(&Matrix::from_diag(&[0.3, -0.1, 0.9])).unwrap();
        let r = tridiagonalize(&a, true).unwrap();
        assert_eq!(r.t.diag(), &[0.3, -0.1, 0.9]);
        assert_eq!(r.t.off(), &[0.0, 0.0]);
        assert_eq!(r.q.unwrap(), Matrix::identity(3));
    }

    #[test]
    fn complex_hermitian_reduction() {
        for n in [5, 37, 64] {
            let a = sample(n, n as u64);
            let r = tridiagonalize(&a, true).unwrap();
            let q = r.q.as_ref().unwrap();
            let t = r.t.to_dense().to_complex();
            let norm = a.matrix().norm_fro();
            assert!(residual(a.matrix(), q, &t) <= 1e-10 * norm, "n={n}");
            let qq = crate::matmul(q, &q.adjoint()).unwrap().minus_identity().norm_fro();
            assert!(qq <= 1e-10, "n={n}: {qq}");
            assert!(r.t.off().iter().all(|&x| x >= 0.0));
            for (x, y) in sorted_eigs(a.matrix()).iter().zip(sorted_eigs(&t)) {
                assert!((x - y).abs() <= 1e-10 * norm);
            }
        }
    }

    #[test]
    fn start_levels() {
        assert_eq!(start_level(0), None);
        assert_eq!(start_level(1), None);
        assert_eq!(start_level(2), Some(0));
        assert_eq!(start_level(4), Some(1));
        assert_eq!(start_level(5), Some(2));
        assert_eq!(start_level(16), Some(3));
    }
}
