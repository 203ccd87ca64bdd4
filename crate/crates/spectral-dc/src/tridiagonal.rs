use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Real symmetric tridiagonal matrix: `diag[0..n]`, `off[0..n-1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if off.len() + 1 != diag.len() && !(diag.is_empty() && off.is_empty()) {
            return Err(Error::ShapeMismatch(format!(
                "{} diagonal and {} off-diagonal entries",
                diag.len(),
                off.len()
            )));
        }
        if diag.iter().chain(&off).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite entry".into()));
        }
        Ok(Self { diag, off })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// True iff every off-diagonal entry is nonzero.
    pub fn is_unreduced(&self) -> bool {
        self.off.iter().all(|&b| b != 0.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            diag: self.diag.iter().map(|x| x * s).collect(),
            off: self.off.iter().map(|x| x * s).collect(),
        }
    }

    /// Rows `lo..hi` as an independent tridiagonal matrix.
    pub fn slice(&self, lo: usize, hi: usize) -> Self {
        Self {
            diag: self.diag[lo..hi].to_vec(),
            off: if hi > lo { self.off[lo..hi - 1].to_vec() } else { Vec::new() },
        }
    }

    /// Half-open ranges of the unreduced blocks between zero off-diagonals.
    pub fn unreduced_blocks(&self) -> Vec<(usize, usize)> {
        let mut blocks = Vec::new();
        let mut lo = 0;
        for (i, &b) in self.off.iter().enumerate() {
            if b == 0.0 {
                blocks.push((lo, i + 1));
                lo = i + 1;
            }
        }
        if self.n() > 0 {
            blocks.push((lo, self.n()));
        }
        blocks
    }

    pub fn to_dense(&self) -> Matrix<f64> {
        let n = self.n();
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
        }
        for (i, &b) in self.off.iter().enumerate() {
            m[(i + 1, i)] = b;
            m[(i, i + 1)] = b;
        }
        m
    }

    /// `min(‖T‖_F, √(‖T‖₁‖T‖_∞))`; the two induced norms coincide by symmetry.
    pub fn spectral_norm_upper(&self) -> f64 {
        let n = self.n();
        let mut fro = 0.0;
        let mut inf: f64 = 0.0;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            inf = inf.max(self.diag[i].abs() + left + right);
            fro += self.diag[i] * self.diag[i] + right * right * 2.0;
        }
        fro.sqrt().min(inf)
    }
}
