use num_complex::Complex64;
use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

pub type C64 = Complex64;

/// Unit roundoff of IEEE binary64.
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// Smallest accuracy accepted by the public solvers at dimension `n`.
pub fn precision_floor(n: usize) -> f64 {
    let n = n.max(1) as f64;
    1e3 * n * n * UNIT_ROUNDOFF
}

pub fn check_precision(eps: f64, n: usize) -> crate::Result<()> {
    let floor = precision_floor(n);
    if !(eps >= floor) {
        return Err(crate::Error::PrecisionFloor { eps, floor, n });
    }
    Ok(())
}

/// Field of matrix entries: `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
{
    /// Real flops charged for one multiply-add.
    const FMA_FLOPS: u64;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn abs(self) -> f64;
    fn abs2(self) -> f64;
    fn scale(self, s: f64) -> Self;
    fn is_finite(self) -> bool;
}

impl Scalar for f64 {
    const FMA_FLOPS: u64 = 2;

    #[inline]
    fn zero() -> Self {
        0.0
    }
    #[inline]
    fn one() -> Self {
        1.0
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        x
    }
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn im(self) -> f64 {
        0.0
    }
    #[inline]
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    #[inline]
    fn abs2(self) -> f64 {
        self * self
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for C64 {
    const FMA_FLOPS: u64 = 8;

    #[inline]
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    #[inline]
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        C64::new(x, 0.0)
    }
    #[inline]
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
    #[inline]
    fn im(self) -> f64 {
        self.im
    }
    #[inline]
    fn abs(self) -> f64 {
        self.norm()
    }
    #[inline]
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        C64::new(self.re * s, self.im * s)
    }
    #[inline]
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}
