//! Scalar abstraction for the geometry kernels.
//!
//! Volume, moment and clipping code runs over any [`GeomScalar`], so the same
//! routines serve the fast `f64` path and the exact [`Rational`] path. Every
//! `f64` is a dyadic rational, so `from_f64_exact` is lossless for the exact type.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, Zero};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Exact rational scalar used by the exact geometry paths.
pub type Rational = BigRational;

/// Field operations needed by the simplex-decomposition measure code.
pub trait GeomScalar:
    Clone
    + PartialOrd
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    /// Lossless conversion from a finite `f64`.
    fn from_f64_exact(x: f64) -> Self;

    fn from_int(n: i64) -> Self;

    fn abs(&self) -> Self;

    /// Approximate value for reporting; exact for `f64`.
    fn to_f64(&self) -> f64;
}

impl GeomScalar for f64 {
    fn from_f64_exact(x: f64) -> Self {
        x
    }

    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl GeomScalar for Rational {
    fn from_f64_exact(x: f64) -> Self {
        debug_assert!(x.is_finite());
        <BigRational as FromPrimitive>::from_f64(x).expect("finite f64 is a rational")
    }

    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn to_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Exact rational n! as a `BigInt`.
pub fn factorial(n: usize) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    acc
}

/// Exact binomial coefficient C(n, k).
pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    num / den
}
