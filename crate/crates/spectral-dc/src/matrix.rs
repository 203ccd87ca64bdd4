//! Dense row-major matrices, norms and the classical multiply.

use crate::error::{Error, Result};
use crate::flops::OpCounter;
use crate::scalar::{Scalar, C64};
use rayon::prelude::*;
use std::ops::{Index, IndexMut};

/// Rows per parallel task in [`matmul`]; the work split never changes the
/// summation order inside a row, so results are schedule independent.
const ROW_CHUNK: usize = 16;
/// Column tile of the inner product loop.
const K_TILE: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row slices; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn from_diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Mutable access to two distinct rows.
    pub fn row_pair_mut(&mut self, i: usize, j: usize) -> (&mut [T], &mut [T]) {
        assert!(i != j, "row_pair_mut needs distinct rows");
        let c = self.cols;
        if i < j {
            let (a, b) = self.data.split_at_mut(j * c);
            (&mut a[i * c..(i + 1) * c], &mut b[..c])
        } else {
            let (a, b) = self.data.split_at_mut(i * c);
            let (bi, aj) = (&mut b[..c], &mut a[j * c..(j + 1) * c]);
            (bi, aj)
        }
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn submatrix(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        Self::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_submatrix(&mut self, r0: usize, c0: usize, m: &Matrix<T>) {
        for i in 0..m.rows {
            let dst = &mut self.data[(r0 + i) * self.cols + c0..(r0 + i) * self.cols + c0 + m.cols];
            dst.copy_from_slice(m.row(i));
        }
    }

    /// Columns `c0..c0 + nc` of every row.
    pub fn columns(&self, c0: usize, nc: usize) -> Self {
        self.submatrix(0, c0, self.rows, nc)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x.scale(s)).collect(),
        }
    }

    pub fn scale_mut(&mut self, s: f64) {
        self.data.iter_mut().for_each(|x| *x = x.scale(s));
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        })
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    /// `self - I`; the matrix must be square.
    pub fn minus_identity(&self) -> Self {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] -= T::one();
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn norm_fro(&self) -> f64 {
        let scale = self.norm_max();
        if scale == 0.0 || !scale.is_finite() {
            return scale;
        }
        let inv = 1.0 / scale;
        scale * self.data.iter().map(|x| x.scale(inv).abs2()).sum::<f64>().sqrt()
    }

    /// Largest absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, x) in sums.iter_mut().zip(self.row(i)) {
                *s += x.abs();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_max(&self) -> f64 {
        self.data.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    /// Certified upper bound on the 2-norm: `min(‖A‖_F, √(‖A‖₁‖A‖_∞))`.
    pub fn spectral_norm_upper(&self) -> f64 {
        self.norm_fro().min((self.norm_one() * self.norm_inf()).sqrt())
    }

    pub fn is_hermitian(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..=i).all(|j| self[(i, j)] == self[(j, i)].conj()))
    }

    /// Replaces the matrix by `(A + A*)/2`, making the storage exactly Hermitian.
    pub fn hermitize(&mut self) {
        assert!(self.is_square());
        let n = self.rows;
        for i in 0..n {
            let d = self[(i, i)];
            self[(i, i)] = T::from_real(d.re());
            for j in 0..i {
                let v = (self[(i, j)] + self[(j, i)].conj()).scale(0.5);
                self[(i, j)] = v;
                self[(j, i)] = v.conj();
            }
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }
}

impl Matrix<f64> {
    pub fn to_complex(&self) -> Matrix<C64> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Classical multiply `A·B`, parallel over row chunks.
pub fn matmul<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if a.cols != b.rows {
        return Err(Error::ShapeMismatch(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let (p, q, r) = (a.rows, a.cols, b.cols);
    let mut c = Matrix::zeros(p, r);
    if p == 0 || r == 0 {
        return Ok(c);
    }
    c.data
        .par_chunks_mut(ROW_CHUNK * r)
        .enumerate()
        .for_each(|(chunk, out)| {
            let i0 = chunk * ROW_CHUNK;
            for k0 in (0..q).step_by(K_TILE) {
                let k1 = (k0 + K_TILE).min(q);
                for (di, crow) in out.chunks_mut(r).enumerate() {
                    let arow = a.row(i0 + di);
                    for k in k0..k1 {
                        let aik = arow[k];
                        if aik == T::zero() {
                            continue;
                        }
                        for (cj, &bkj) in crow.iter_mut().zip(b.row(k)) {
                            *cj += aik * bkj;
                        }
                    }
                }
            }
        });
    Ok(c)
}

/// [`matmul`] that charges `p·q·r` multiply-adds to `ops`.
pub fn matmul_counted<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, ops: &OpCounter) -> Result<Matrix<T>> {
    let c = matmul(a, b)?;
    ops.add(T::FMA_FLOPS * (a.rows * a.cols * b.cols) as u64);
    Ok(c)
}

/// Product known to be Hermitian (e.g. `A·A*`); the result is hermitized.
pub fn matmul_hermitian<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    let mut c = matmul(a, b)?;
    if !c.is_square() {
        return Err(Error::ShapeMismatch("Hermitian product must be square".into()));
    }
    c.hermitize();
    Ok(c)
}

/// Exactly Hermitian complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseHermitian(Matrix<C64>);

impl DenseHermitian {
    /// Accepts a matrix whose storage is exactly Hermitian with finite entries.
    pub fn new(m: Matrix<C64>) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::InvalidInput("non-finite entry".into()));
        }
        if !m.is_hermitian() {
            return Err(Error::NotHermitian);
        }
        Ok(Self(m))
    }

    /// Hermitizes `m` first; use for products that are Hermitian up to rounding.
    pub fn from_nearly_hermitian(mut m: Matrix<C64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotHermitian);
        }
        m.hermitize();
        Self::new(m)
    }

    pub fn from_real_symmetric(m: &Matrix<f64>) -> Result<Self> {
        Self::new(m.to_complex())
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &Matrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix<C64> {
        self.0
    }

    /// Number of nonzero off-diagonals, `max |i-j|` over nonzero entries.
    pub fn bandwidth(&self) -> usize {
        let n = self.n();
        let mut d = 0;
        for i in 0..n {
            for j in 0..i.saturating_sub(d) {
                if self.0[(i, j)] != C64::new(0.0, 0.0) {
                    d = i - j;
                    break;
                }
            }
        }
        d
    }
}
