//! Arithmetic backends.
//!
//! Everything algebraic in the crate is generic over [`Scalar`] so the same
//! code runs in `f64` for bulk evaluation and in exact rationals when an
//! identity has to hold bit-for-bit.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_i128(v: i128) -> Self;

    fn to_f64(&self) -> f64;

    /// Exact image of a finite double (rationals) or the value itself.
    fn from_f64(v: f64) -> Self;

    /// Square root if it is representable in this backend.
    ///
    /// Floats always answer; rationals only for perfect squares, which
    /// lets slice evaluation pick a basis that avoids irrational numbers.
    fn sqrt_exact(&self) -> Option<Self>;

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn from_i64(v: i64) -> Self {
        Self::from_i128(v as i128)
    }

    fn powi(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc * self.clone();
        }
        acc
    }
}

impl Scalar for f64 {
    fn from_i128(v: i128) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64(v: f64) -> Self {
        v
    }

    fn sqrt_exact(&self) -> Option<Self> {
        if *self >= 0.0 {
            Some(self.sqrt())
        } else {
            None
        }
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn powi(&self, e: u32) -> Self {
        f64::powi(*self, e as i32)
    }
}

impl Scalar for BigRational {
    fn from_i128(v: i128) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_f64(v: f64) -> Self {
        rational_from_f64(v)
    }

    fn sqrt_exact(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let num = self.numer().sqrt();
        let den = self.denom().sqrt();
        if &(&num * &num) == self.numer() && &(&den * &den) == self.denom() {
            Some(BigRational::new(num, den))
        } else {
            None
        }
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }
}

/// Exact rational from an `f64` (every finite double is a dyadic rational).
pub fn rational_from_f64(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite float")
}

/// Rational `num/den` shorthand for tests and fixtures.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_sqrt_only_for_squares() {
        assert_eq!(ratio(9, 4).sqrt_exact(), Some(ratio(3, 2)));
        assert_eq!(ratio(2, 1).sqrt_exact(), None);
        assert_eq!(ratio(-1, 1).sqrt_exact(), None);
    }

    #[test]
    fn float_round_trip_is_exact() {
        let q = rational_from_f64(0.1);
        assert_eq!(Scalar::to_f64(&q), 0.1);
    }
}
