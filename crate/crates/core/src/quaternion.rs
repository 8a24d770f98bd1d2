//! Quaternion arithmetic and the bilinear form `Im⟨y, y'⟩` that defines the
//! group law.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{rational_from_f64, Scalar};

/// `x1 + x2 i + x3 j + x4 k`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Quaternion<T = f64> {
    pub x1: T,
    pub x2: T,
    pub x3: T,
    pub x4: T,
}

pub type QuaternionQ = Quaternion<BigRational>;

impl<T: Scalar> Quaternion<T> {
    pub fn new(x1: T, x2: T, x3: T, x4: T) -> Self {
        Quaternion { x1, x2, x3, x4 }
    }

    pub fn zero() -> Self {
        Self::real(T::zero())
    }

    pub fn one() -> Self {
        Self::real(T::one())
    }

    pub fn real(x1: T) -> Self {
        Quaternion::new(x1, T::zero(), T::zero(), T::zero())
    }

    pub fn i() -> Self {
        Quaternion::new(T::zero(), T::one(), T::zero(), T::zero())
    }

    pub fn j() -> Self {
        Quaternion::new(T::zero(), T::zero(), T::one(), T::zero())
    }

    pub fn k() -> Self {
        Quaternion::new(T::zero(), T::zero(), T::zero(), T::one())
    }

    /// The imaginary unit `i_alpha` for `alpha` in 1..=3.
    pub fn unit(alpha: usize) -> Self {
        match alpha {
            1 => Self::i(),
            2 => Self::j(),
            3 => Self::k(),
            _ => panic!("imaginary unit index {alpha} out of range"),
        }
    }

    pub fn from_array(a: [T; 4]) -> Self {
        let [x1, x2, x3, x4] = a;
        Quaternion { x1, x2, x3, x4 }
    }

    pub fn to_array(&self) -> [T; 4] {
        [
            self.x1.clone(),
            self.x2.clone(),
            self.x3.clone(),
            self.x4.clone(),
        ]
    }

    pub fn conj(&self) -> Self {
        Quaternion::new(
            self.x1.clone(),
            -self.x2.clone(),
            -self.x3.clone(),
            -self.x4.clone(),
        )
    }

    /// `|q|^2`, exact in every backend.
    pub fn norm_sqr(&self) -> T {
        self.x1.clone() * self.x1.clone()
            + self.x2.clone() * self.x2.clone()
            + self.x3.clone() * self.x3.clone()
            + self.x4.clone() * self.x4.clone()
    }

    pub fn re(&self) -> T {
        self.x1.clone()
    }

    pub fn im(&self) -> ImQuaternion<T> {
        ImQuaternion::new(self.x2.clone(), self.x3.clone(), self.x4.clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        Quaternion::new(
            self.x1.clone() * s.clone(),
            self.x2.clone() * s.clone(),
            self.x3.clone() * s.clone(),
            self.x4.clone() * s.clone(),
        )
    }

    pub fn is_zero(&self) -> bool {
        let z = T::zero();
        self.x1 == z && self.x2 == z && self.x3 == z && self.x4 == z
    }

    /// Multiplicative inverse `q̄ / |q|^2`.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Singularity("inverse of the zero quaternion"));
        }
        let n = self.norm_sqr();
        let c = self.conj();
        Ok(Quaternion::new(
            c.x1 / n.clone(),
            c.x2 / n.clone(),
            c.x3 / n.clone(),
            c.x4 / n,
        ))
    }

    pub fn to_f64(&self) -> Quaternion<f64> {
        Quaternion::new(
            self.x1.to_f64(),
            self.x2.to_f64(),
            self.x3.to_f64(),
            self.x4.to_f64(),
        )
    }
}

impl Quaternion<f64> {
    pub fn modulus(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn to_rational(&self) -> QuaternionQ {
        Quaternion::new(
            rational_from_f64(self.x1),
            rational_from_f64(self.x2),
            rational_from_f64(self.x3),
            rational_from_f64(self.x4),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite() && self.x3.is_finite() && self.x4.is_finite()
    }
}

pub fn mul<T: Scalar>(a: &Quaternion<T>, b: &Quaternion<T>) -> Quaternion<T> {
    let (a1, a2, a3, a4) = (&a.x1, &a.x2, &a.x3, &a.x4);
    let (b1, b2, b3, b4) = (&b.x1, &b.x2, &b.x3, &b.x4);
    let p = |x: &T, y: &T| x.clone() * y.clone();
    Quaternion::new(
        p(a1, b1) - p(a2, b2) - p(a3, b3) - p(a4, b4),
        p(a1, b2) + p(a2, b1) + p(a3, b4) - p(a4, b3),
        p(a1, b3) - p(a2, b4) + p(a3, b1) + p(a4, b2),
        p(a1, b4) + p(a2, b3) - p(a3, b2) + p(a4, b1),
    )
}

impl<T: Scalar> Add for Quaternion<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Quaternion::new(self.x1 + o.x1, self.x2 + o.x2, self.x3 + o.x3, self.x4 + o.x4)
    }
}

impl<T: Scalar> Sub for Quaternion<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Quaternion::new(self.x1 - o.x1, self.x2 - o.x2, self.x3 - o.x3, self.x4 - o.x4)
    }
}

impl<T: Scalar> Neg for Quaternion<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Quaternion::new(-self.x1, -self.x2, -self.x3, -self.x4)
    }
}

impl<T: Scalar> Mul for Quaternion<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        mul(&self, &o)
    }
}

impl<'a, T: Scalar> Mul<&'a Quaternion<T>> for &'a Quaternion<T> {
    type Output = Quaternion<T>;
    fn mul(self, o: &'a Quaternion<T>) -> Quaternion<T> {
        mul(self, o)
    }
}

impl fmt::Display for Quaternion<f64> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.x1, self.x2, self.x3, self.x4)
    }
}

impl Serialize for Quaternion<f64> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.x1, self.x2, self.x3, self.x4].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Quaternion<f64> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let a = <[f64; 4]>::deserialize(d)?;
        Ok(Quaternion::from_array(a))
    }
}

impl Serialize for ImQuaternion<f64> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.t1, self.t2, self.t3].serialize(s)
    }
}

/// A pure quaternion `t1 i + t2 j + t3 k`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ImQuaternion<T = f64> {
    pub t1: T,
    pub t2: T,
    pub t3: T,
}

impl<T: Scalar> ImQuaternion<T> {
    pub fn new(t1: T, t2: T, t3: T) -> Self {
        ImQuaternion { t1, t2, t3 }
    }

    pub fn zero() -> Self {
        ImQuaternion::new(T::zero(), T::zero(), T::zero())
    }

    /// Component `alpha` in 1..=3.
    pub fn get(&self, alpha: usize) -> &T {
        match alpha {
            1 => &self.t1,
            2 => &self.t2,
            3 => &self.t3,
            _ => panic!("component {alpha} out of range"),
        }
    }

    pub fn to_quaternion(&self) -> Quaternion<T> {
        Quaternion::new(T::zero(), self.t1.clone(), self.t2.clone(), self.t3.clone())
    }

    pub fn norm_sqr(&self) -> T {
        self.t1.clone() * self.t1.clone()
            + self.t2.clone() * self.t2.clone()
            + self.t3.clone() * self.t3.clone()
    }

    pub fn scale(&self, s: &T) -> Self {
        ImQuaternion::new(
            self.t1.clone() * s.clone(),
            self.t2.clone() * s.clone(),
            self.t3.clone() * s.clone(),
        )
    }

    pub fn to_array(&self) -> [T; 3] {
        [self.t1.clone(), self.t2.clone(), self.t3.clone()]
    }
}

impl<T: Scalar> Add for ImQuaternion<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        ImQuaternion::new(self.t1 + o.t1, self.t2 + o.t2, self.t3 + o.t3)
    }
}

impl<T: Scalar> Sub for ImQuaternion<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        ImQuaternion::new(self.t1 - o.t1, self.t2 - o.t2, self.t3 - o.t3)
    }
}

impl<T: Scalar> Neg for ImQuaternion<T> {
    type Output = Self;
    fn neg(self) -> Self {
        ImQuaternion::new(-self.t1, -self.t2, -self.t3)
    }
}

/// An element of `H^{n-1}`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct HVector<T = f64>(pub Vec<Quaternion<T>>);

impl<T: Scalar> HVector<T> {
    pub fn zeros(len: usize) -> Self {
        HVector(vec![Quaternion::zero(); len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Real coordinates `y_1 .. y_{4(n-1)}`, quaternion by quaternion.
    pub fn from_reals(coords: &[T]) -> Result<Self> {
        if coords.len() % 4 != 0 {
            return Err(Error::Argument(format!(
                "horizontal coordinate count {} is not a multiple of 4",
                coords.len()
            )));
        }
        Ok(HVector(
            coords
                .chunks(4)
                .map(|c| Quaternion::new(c[0].clone(), c[1].clone(), c[2].clone(), c[3].clone()))
                .collect(),
        ))
    }

    pub fn to_reals(&self) -> Vec<T> {
        self.0.iter().flat_map(|q| q.to_array()).collect()
    }

    /// `|y|^2 = Σ |y_l|^2`.
    pub fn norm_sqr(&self) -> T {
        self.0
            .iter()
            .fold(T::zero(), |acc, q| acc + q.norm_sqr())
    }

    pub fn scale(&self, s: &T) -> Self {
        HVector(self.0.iter().map(|q| q.scale(s)).collect())
    }

    pub fn add(&self, o: &Self) -> Self {
        HVector(
            self.0
                .iter()
                .zip(&o.0)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        )
    }

    pub fn neg(&self) -> Self {
        HVector(self.0.iter().map(|q| -q.clone()).collect())
    }

    /// `⟨y, y'⟩ = Σ ȳ_l y'_l`.
    pub fn inner(&self, o: &Self) -> Result<Quaternion<T>> {
        check_len(self.len(), o.len())?;
        Ok(self
            .0
            .iter()
            .zip(&o.0)
            .fold(Quaternion::zero(), |acc, (a, b)| acc + mul(&a.conj(), b)))
    }
}

impl HVector<f64> {
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::Dimension { expected, found });
    }
    Ok(())
}

/// `Im⟨y, y2⟩ = Σ_l Im(ȳ_l (y2)_l)`.
pub fn im_bilinear<T: Scalar>(y: &HVector<T>, y2: &HVector<T>) -> Result<ImQuaternion<T>> {
    Ok(y.inner(y2)?.im())
}

/// The same form evaluated through the sign matrices: component `alpha` is
/// `Σ_l Σ_{k,j} b^alpha_{kj} y_{4l+k} y2_{4l+j}`.
pub fn im_bilinear_via_b<T: Scalar>(y: &HVector<T>, y2: &HVector<T>) -> Result<ImQuaternion<T>> {
    check_len(y.len(), y2.len())?;
    let a = y.to_reals();
    let b = y2.to_reals();
    let mut out = [T::zero(), T::zero(), T::zero()];
    for (alpha, slot) in out.iter_mut().enumerate() {
        let m = B_MATRICES[alpha];
        for l in 0..y.len() {
            for k in 0..4 {
                for j in 0..4 {
                    let e = m[k][j];
                    if e == 0 {
                        continue;
                    }
                    let term = a[4 * l + k].clone() * b[4 * l + j].clone();
                    *slot = if e > 0 {
                        slot.clone() + term
                    } else {
                        slot.clone() - term
                    };
                }
            }
        }
    }
    let [t1, t2, t3] = out;
    Ok(ImQuaternion::new(t1, t2, t3))
}

pub type SignMatrix = [[i8; 4]; 4];

const B_MATRICES: [SignMatrix; 3] = [
    [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]],
    [[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]],
    [[0, 0, 0, 1], [0, 0, -1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]],
];

/// `b^alpha` for `alpha` in 1..=3, rows and columns indexed from 0.
pub fn b_matrix(alpha: usize) -> Result<SignMatrix> {
    if !(1..=3).contains(&alpha) {
        return Err(Error::Argument(format!("b-matrix index {alpha} not in 1..=3")));
    }
    Ok(B_MATRICES[alpha - 1])
}

/// Entry `b^alpha_{kj}` with 1-based `k`, `j`.
pub(crate) fn b_entry(alpha: usize, k: usize, j: usize) -> i8 {
    B_MATRICES[alpha - 1][k - 1][j - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    type Q = Quaternion<f64>;

    fn q(a: f64, b: f64, c: f64, d: f64) -> Q {
        Quaternion::new(a, b, c, d)
    }

    #[test]
    fn unit_relations() {
        assert_eq!(Q::i() * Q::j(), Q::k());
        assert_eq!(Q::j() * Q::k(), Q::i());
        assert_eq!(Q::k() * Q::i(), Q::j());
        assert_eq!(Q::i() * Q::j() * Q::k(), Q::real(-1.0));
    }

    #[test]
    fn small_products() {
        assert_eq!(q(1., 1., 0., 0.) * q(1., 0., 1., 0.), q(1., 1., 1., 1.));
        assert_eq!(q(1., 1., 0., 0.) * q(1., -1., 0., 0.), Q::real(2.0));
    }

    #[test]
    fn conjugation() {
        assert_eq!(Q::i().conj(), -Q::i());
        assert_eq!((Q::i() * Q::j()).conj(), Q::j().conj() * Q::i().conj());
        assert_eq!((Q::i() * Q::j()).conj(), -Q::k());
        assert_eq!(q(1., 2., 3., 4.).conj(), q(1., -2., -3., -4.));
    }

    #[test]
    fn modulus_examples() {
        assert_eq!(q(1., 1., 1., 1.).modulus(), 2.0);
        let a = q(0.3, -1.2, 2.5, 0.7);
        assert_eq!(a.conj().modulus(), a.modulus());
    }

    #[test]
    fn im_bilinear_i_j() {
        let y = HVector(vec![Q::i()]);
        let y2 = HVector(vec![Q::j()]);
        let v = im_bilinear(&y, &y2).unwrap();
        assert_eq!(v, ImQuaternion::new(0.0, 0.0, -1.0));
        assert_eq!(b_entry(3, 2, 3), -1);
        assert_eq!(im_bilinear_via_b(&y, &y2).unwrap(), v);
    }

    #[test]
    fn im_bilinear_length_mismatch() {
        let y = HVector(vec![Q::i()]);
        let y2 = HVector(vec![Q::j(), Q::k()]);
        assert_eq!(
            im_bilinear(&y, &y2),
            Err(Error::Dimension { expected: 1, found: 2 })
        );
    }

    #[test]
    fn b_matrices_match_display() {
        assert_eq!(b_matrix(1).unwrap()[0], [0, 1, 0, 0]);
        assert!(b_matrix(0).is_err());
        assert!(b_matrix(4).is_err());
        for alpha in 1..=3 {
            let b = b_matrix(alpha).unwrap();
            for k in 0..4 {
                for j in 0..4 {
                    assert_eq!(b[k][j] + b[j][k], 0);
                    let sq: i32 = (0..4).map(|m| (b[k][m] * b[m][j]) as i32).sum();
                    assert_eq!(sq, if k == j { -1 } else { 0 });
                }
            }
        }
    }

    #[test]
    fn rational_inverse_is_exact() {
        let a = Quaternion::new(ratio(1, 2), ratio(-3, 7), ratio(2, 1), ratio(5, 3));
        let prod = mul(&a, &a.inv().unwrap());
        assert_eq!(prod, QuaternionQ::one());
    }
}
