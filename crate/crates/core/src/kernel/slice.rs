//! The commutative slice `ℝ ⊕ ℝw ⊂ ℍ` through a quaternion `σ`.
//!
//! `w` is a pure quaternion parallel to `Im σ` with `w² = -m`. Floats use the
//! unit direction (`m = 1`); rationals use `w = Im σ` itself (`m = |Im σ|²`)
//! whenever `|Im σ|` is irrational, so the slice stays exact.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::quaternion::{ImQuaternion, Quaternion};
use crate::scalar::Scalar;

/// `re + im·w` with `w² = -m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SliceNum<T> {
    pub re: T,
    pub im: T,
    pub m: T,
}

impl<T: Scalar> SliceNum<T> {
    pub fn new(re: T, im: T, m: T) -> Self {
        SliceNum { re, im, m }
    }

    pub fn real(re: T, m: T) -> Self {
        SliceNum::new(re, T::zero(), m)
    }

    pub fn conj(&self) -> Self {
        SliceNum::new(self.re.clone(), -self.im.clone(), self.m.clone())
    }

    /// `re² + m im²`.
    pub fn norm_sqr(&self) -> T {
        self.re.clone() * self.re.clone() + self.m.clone() * self.im.clone() * self.im.clone()
    }

    pub fn inv(&self) -> Self {
        let n = self.norm_sqr();
        SliceNum::new(self.re.clone() / n.clone(), -self.im.clone() / n, self.m.clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        SliceNum::new(self.re.clone() * s.clone(), self.im.clone() * s.clone(), self.m.clone())
    }

    /// `self^0 .. self^max`.
    pub fn powers(&self, max: usize) -> Vec<Self> {
        let mut out = Vec::with_capacity(max + 1);
        out.push(SliceNum::real(T::one(), self.m.clone()));
        for k in 1..=max {
            let next = out[k - 1].clone() * self.clone();
            out.push(next);
        }
        out
    }
}

impl<T: Scalar> Add for SliceNum<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        SliceNum::new(self.re + o.re, self.im + o.im, self.m)
    }
}

impl<T: Scalar> Sub for SliceNum<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        SliceNum::new(self.re - o.re, self.im - o.im, self.m)
    }
}

impl<T: Scalar> Neg for SliceNum<T> {
    type Output = Self;
    fn neg(self) -> Self {
        SliceNum::new(-self.re, -self.im, self.m)
    }
}

impl<T: Scalar> Mul for SliceNum<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let re = self.re.clone() * o.re.clone() - self.m.clone() * self.im.clone() * o.im.clone();
        let im = self.re * o.im + self.im * o.re;
        SliceNum::new(re, im, self.m)
    }
}

impl<T: Scalar> Div for SliceNum<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o.inv()
    }
}

/// Decomposition `σ = x1 + beta·w` together with the embedding of `w`.
#[derive(Clone, Debug)]
pub struct Slice<T> {
    pub x1: T,
    pub beta: T,
    pub m: T,
    pub w: ImQuaternion<T>,
}

impl<T: Scalar> Slice<T> {
    pub fn of(sigma: &Quaternion<T>) -> Self {
        let im = sigma.im();
        let rho2 = im.norm_sqr();
        if rho2 == T::zero() {
            return Slice {
                x1: sigma.re(),
                beta: T::zero(),
                m: T::one(),
                w: ImQuaternion::new(T::one(), T::zero(), T::zero()),
            };
        }
        match rho2.sqrt_exact() {
            Some(r) => Slice {
                x1: sigma.re(),
                beta: r.clone(),
                m: T::one(),
                w: im.scale(&(T::one() / r)),
            },
            None => Slice {
                x1: sigma.re(),
                beta: T::one(),
                m: rho2,
                w: im,
            },
        }
    }

    /// `z = x1 + beta w`.
    pub fn z(&self) -> SliceNum<T> {
        SliceNum::new(self.x1.clone(), self.beta.clone(), self.m.clone())
    }

    pub fn embed(&self, v: &SliceNum<T>) -> Quaternion<T> {
        Quaternion::real(v.re.clone()) + self.w.scale(&v.im).to_quaternion()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quaternion::mul;
    use crate::scalar::ratio;

    #[test]
    fn slice_product_matches_quaternion_product() {
        let sigma = Quaternion::new(ratio(1, 2), ratio(1, 3), ratio(-2, 5), ratio(1, 1));
        let sl = Slice::of(&sigma);
        let z = sl.z();
        assert_eq!(sl.embed(&z), sigma);
        let p = z.clone() * z.clone() * z.conj();
        assert_eq!(sl.embed(&p), mul(&mul(&sigma, &sigma), &sigma.conj()));
        let inv = z.inv();
        assert_eq!(sl.embed(&inv), sigma.inv().unwrap());
    }

    #[test]
    fn float_slice_uses_unit_direction() {
        let sigma = Quaternion::new(1.0, 0.0, 3.0, 4.0);
        let sl = Slice::of(&sigma);
        assert_eq!(sl.beta, 5.0);
        assert_eq!(sl.m, 1.0);
        let d = sl.w - ImQuaternion::new(0.0, 0.6, 0.8);
        assert!(d.norm_sqr() < 1e-30);
    }
}
