//! The quaternionic Heisenberg group `ℋ^{n-1} = Im ℍ × ℍ^{n-1}` and its
//! identification with the boundary of the Siegel upper half-space.

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::quaternion::{b_entry, im_bilinear, HVector, ImQuaternion, Quaternion};
use crate::sampling::{gaussian_point, sample_rng};
use crate::scalar::{rational_from_f64, Scalar};

/// `(t, y)` with `t ∈ Im ℍ` vertical and `y ∈ ℍ^{n-1}` horizontal.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupPoint<T = f64> {
    pub t: ImQuaternion<T>,
    pub y: HVector<T>,
}

pub type GroupPointQ = GroupPoint<BigRational>;

impl<T: Scalar> GroupPoint<T> {
    pub fn new(t: ImQuaternion<T>, y: HVector<T>) -> Self {
        GroupPoint { t, y }
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 2, "dimension n must be at least 2");
        GroupPoint::new(ImQuaternion::zero(), HVector::zeros(n - 1))
    }

    /// Coordinates in CSV order `t1,t2,t3,y1..y_{4(n-1)}`.
    pub fn from_coords(coords: &[T]) -> Result<Self> {
        if coords.len() < 7 || (coords.len() - 3) % 4 != 0 {
            return Err(Error::Argument(format!(
                "expected 3 + 4(n-1) coordinates, got {}",
                coords.len()
            )));
        }
        let t = ImQuaternion::new(coords[0].clone(), coords[1].clone(), coords[2].clone());
        Ok(GroupPoint::new(t, HVector::from_reals(&coords[3..])?))
    }

    pub fn coords(&self) -> Vec<T> {
        let mut v = self.t.to_array().to_vec();
        v.extend(self.y.to_reals());
        v
    }

    /// The `n` of `ℋ^{n-1}`.
    pub fn dim_n(&self) -> usize {
        self.y.len() + 1
    }

    pub fn is_identity(&self) -> bool {
        let z = T::zero();
        self.coords().iter().all(|c| *c == z)
    }

    /// `‖g‖^4 = |y|^4 + |t|^2`, exact in every backend.
    pub fn hnorm_pow4(&self) -> T {
        let y2 = self.y.norm_sqr();
        y2.clone() * y2 + self.t.norm_sqr()
    }

    pub fn to_f64(&self) -> GroupPoint<f64> {
        GroupPoint::new(
            ImQuaternion::new(self.t.t1.to_f64(), self.t.t2.to_f64(), self.t.t3.to_f64()),
            HVector(self.y.0.iter().map(|q| q.to_f64()).collect()),
        )
    }
}

impl GroupPoint<f64> {
    pub fn to_rational(&self) -> GroupPointQ {
        let c: Vec<BigRational> = self.coords().iter().map(|&v| rational_from_f64(v)).collect();
        GroupPoint::from_coords(&c).expect("valid coordinates")
    }
}

fn check_dim<T: Scalar>(g: &GroupPoint<T>, h: &GroupPoint<T>) -> Result<()> {
    if g.y.len() != h.y.len() {
        return Err(Error::Dimension {
            expected: g.dim_n(),
            found: h.dim_n(),
        });
    }
    Ok(())
}

/// `(t, y)·(t', y') = (t + t' + 2 Im⟨y, y'⟩, y + y')`.
pub fn group_mul<T: Scalar>(g: &GroupPoint<T>, h: &GroupPoint<T>) -> Result<GroupPoint<T>> {
    check_dim(g, h)?;
    let two = T::from_i64(2);
    let b = im_bilinear(&g.y, &h.y)?.scale(&two);
    Ok(GroupPoint::new(
        g.t.clone() + h.t.clone() + b,
        g.y.add(&h.y),
    ))
}

pub fn group_inv<T: Scalar>(g: &GroupPoint<T>) -> GroupPoint<T> {
    GroupPoint::new(-g.t.clone(), g.y.neg())
}

/// `δ_r(t, y) = (r² t, r y)`.
pub fn dilate<T: Scalar>(r: &T, g: &GroupPoint<T>) -> Result<GroupPoint<T>> {
    if *r <= T::zero() {
        return Err(Error::Argument(format!(
            "dilation factor must be positive, got {}",
            r.to_f64()
        )));
    }
    let r2 = r.clone() * r.clone();
    Ok(GroupPoint::new(g.t.scale(&r2), g.y.scale(r)))
}

/// `‖g‖ = (|y|^4 + |t|^2)^{1/4}`.
pub fn hnorm(g: &GroupPoint<f64>) -> f64 {
    g.hnorm_pow4().sqrt().sqrt()
}

/// `ρ(g, h) = ‖h^{-1}·g‖`.
pub fn rho(g: &GroupPoint<f64>, h: &GroupPoint<f64>) -> Result<f64> {
    Ok(hnorm(&group_mul(&group_inv(h), g)?))
}

/// Empirical lower estimate of the quasi-triangle constant
/// `sup ρ(h,g) / (ρ(h,w) + ρ(w,g))` over seeded Gaussian triples.
pub fn quasi_triangle_constant(n: usize, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::Argument("need at least one sample".into()));
    }
    let mut best = 1.0f64;
    for i in 0..samples {
        let mut rng = sample_rng(seed, i as u64);
        let h = gaussian_point(&mut rng, n);
        let g = gaussian_point(&mut rng, n);
        let w = gaussian_point(&mut rng, n);
        let den = rho(&h, &w)? + rho(&w, &g)?;
        if den > 0.0 {
            best = best.max(rho(&h, &g)? / den);
        }
    }
    Ok(best)
}

/// `(q1, q') ∈ ℍ × ℍ^{n-1}`; on the boundary when `Re q1 = |q'|^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SiegelPoint<T = f64> {
    pub q1: Quaternion<T>,
    pub qprime: HVector<T>,
}

impl<T: Scalar> SiegelPoint<T> {
    pub fn new(q1: Quaternion<T>, qprime: HVector<T>) -> Self {
        SiegelPoint { q1, qprime }
    }

    /// `Re q1 - |q'|^2`: zero on the boundary, positive inside.
    pub fn defect(&self) -> T {
        self.q1.re() - self.qprime.norm_sqr()
    }

    pub fn dim_n(&self) -> usize {
        self.qprime.len() + 1
    }

    /// Shift by `ε e` with `e = (1, 0, ..., 0)`.
    pub fn shift_vertical(&self, eps: &T) -> Self {
        SiegelPoint::new(self.q1.clone() + Quaternion::real(eps.clone()), self.qprime.clone())
    }
}

/// `π(|q'|^2 + x2 i + x3 j + x4 k, q') = (x2 i + x3 j + x4 k, q')`.
pub fn boundary_to_group(q: &SiegelPoint<f64>) -> Result<GroupPoint<f64>> {
    let defect = q.defect();
    if defect.abs() > 1e-10 * (1.0 + q.q1.modulus()) {
        return Err(Error::OffBoundary { defect });
    }
    Ok(GroupPoint::new(q.q1.im(), q.qprime.clone()))
}

/// Exact variant of [`boundary_to_group`]; requires `Re q1 = |q'|^2` exactly.
pub fn boundary_to_group_exact<T: Scalar>(q: &SiegelPoint<T>) -> Result<GroupPoint<T>> {
    let defect = q.defect();
    if defect != T::zero() {
        return Err(Error::OffBoundary {
            defect: defect.to_f64(),
        });
    }
    Ok(GroupPoint::new(q.q1.im(), q.qprime.clone()))
}

pub fn group_to_boundary<T: Scalar>(g: &GroupPoint<T>) -> SiegelPoint<T> {
    let q1 = Quaternion::real(g.y.norm_sqr()) + g.t.to_quaternion();
    SiegelPoint::new(q1, g.y.clone())
}

/// The automorphism `τ_p(q1, q') = (q1 + |y|^2 + t + 2⟨y, q'⟩, q' + y)` for
/// `p = (t, y)`.
pub fn tau<T: Scalar>(p: &GroupPoint<T>, q: &SiegelPoint<T>) -> Result<SiegelPoint<T>> {
    if p.y.len() != q.qprime.len() {
        return Err(Error::Dimension {
            expected: p.dim_n(),
            found: q.dim_n(),
        });
    }
    let two = T::from_i64(2);
    let q1 = q.q1.clone()
        + Quaternion::real(p.y.norm_sqr())
        + p.t.to_quaternion()
        + p.y.inner(&q.qprime)?.scale(&two);
    Ok(SiegelPoint::new(q1, q.qprime.add(&p.y)))
}

fn check_field_index(n: usize, l: usize, j: usize) -> Result<()> {
    if n < 2 || l > n - 2 || !(1..=4).contains(&j) {
        return Err(Error::Argument(format!(
            "vector field index (l={l}, j={j}) out of range for n={n}"
        )));
    }
    Ok(())
}

/// Unit horizontal direction `e_{4l+j}` as a group element `(0, e)`.
pub fn horizontal_unit<T: Scalar>(n: usize, l: usize, j: usize) -> Result<GroupPoint<T>> {
    check_field_index(n, l, j)?;
    let mut coords = vec![T::zero(); 3 + 4 * (n - 1)];
    coords[3 + 4 * l + (j - 1)] = T::one();
    GroupPoint::from_coords(&coords)
}

/// Time-`s` flow of the left-invariant field `Y_{4l+j}` started at `g`,
/// i.e. the right translation `g·(0, s e_{4l+j})`.
pub fn vector_field_flow<T: Scalar>(
    l: usize,
    j: usize,
    s: &T,
    g: &GroupPoint<T>,
) -> Result<GroupPoint<T>> {
    let e = horizontal_unit::<T>(g.dim_n(), l, j)?;
    let step = GroupPoint::new(ImQuaternion::zero(), e.y.scale(s));
    group_mul(g, &step)
}

/// Coefficients of `Y_{4l+j}` at `g`: `∂/∂y_{4l+j}` plus
/// `2 Σ_α Σ_k b^α_{kj} y_{4l+k} ∂/∂t_α`. Returns the three `t` coefficients.
pub fn vector_field_vertical(l: usize, j: usize, g: &GroupPoint<f64>) -> Result<[f64; 3]> {
    check_field_index(g.dim_n(), l, j)?;
    let y = g.y.to_reals();
    let mut out = [0.0; 3];
    for (a, slot) in out.iter_mut().enumerate() {
        for k in 1..=4 {
            *slot += 2.0 * b_entry(a + 1, k, j) as f64 * y[4 * l + k - 1];
        }
    }
    Ok(out)
}

/// Central difference of `f` along the flow of `Y_{4l+j}`.
pub fn apply_y<F>(l: usize, j: usize, f: F, g: &GroupPoint<f64>, step: f64) -> Result<Quaternion<f64>>
where
    F: Fn(&GroupPoint<f64>) -> Result<Quaternion<f64>>,
{
    if step <= 0.0 {
        return Err(Error::Argument(format!("step must be positive, got {step}")));
    }
    let fwd = f(&vector_field_flow(l, j, &step, g)?)?;
    let bwd = f(&vector_field_flow(l, j, &(-step), g)?)?;
    Ok((fwd - bwd).scale(&(0.5 / step)))
}

/// `flow_k(-s) ∘ flow_j(-s) ∘ flow_k(s) ∘ flow_j(s)` applied to `g`, with
/// both fields in the same quaternion block `l`.
pub fn flow_commutator<T: Scalar>(
    l: usize,
    j: usize,
    k: usize,
    s: &T,
    g: &GroupPoint<T>,
) -> Result<GroupPoint<T>> {
    let neg = -s.clone();
    let a = vector_field_flow(l, j, s, g)?;
    let b = vector_field_flow(l, k, s, &a)?;
    let c = vector_field_flow(l, j, &neg, &b)?;
    vector_field_flow(l, k, &neg, &c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quaternion::Quaternion as Q;

    fn gp(t: [f64; 3], y: &[f64]) -> GroupPoint {
        let mut c = t.to_vec();
        c.extend_from_slice(y);
        GroupPoint::from_coords(&c).unwrap()
    }

    #[test]
    fn product_of_i_and_j() {
        let a = gp([0.0; 3], &[0., 1., 0., 0.]);
        let b = gp([0.0; 3], &[0., 0., 1., 0.]);
        let p = group_mul(&a, &b).unwrap();
        assert_eq!(p, gp([0., 0., -2.], &[0., 1., 1., 0.]));
    }

    #[test]
    fn identity_and_inverse() {
        let g = gp([0.5, -1.0, 2.0], &[1., 2., 3., 4.]);
        let e = GroupPoint::identity(2);
        assert_eq!(group_mul(&g, &e).unwrap(), g);
        assert_eq!(group_mul(&g, &group_inv(&g)).unwrap(), e);
        assert_eq!(group_inv(&group_inv(&g)), g);
        assert_eq!(group_inv(&e), e);
    }

    #[test]
    fn dimension_mismatch() {
        let a = GroupPoint::<f64>::identity(2);
        let b = GroupPoint::<f64>::identity(3);
        assert!(matches!(group_mul(&a, &b), Err(Error::Dimension { .. })));
    }

    #[test]
    fn dilation_examples() {
        let g = gp([1., 2., 3.], &[1., -1., 0.5, 2.]);
        assert_eq!(
            dilate(&2.0, &g).unwrap(),
            gp([4., 8., 12.], &[2., -2., 1., 4.])
        );
        assert_eq!(dilate(&1.0, &g).unwrap(), g);
        assert!(dilate(&0.0, &g).is_err());
        assert!(dilate(&-1.0, &g).is_err());
    }

    #[test]
    fn norm_examples() {
        let g = gp([1., 1., 0.], &[0.0; 4]);
        assert!((hnorm(&g) - 2f64.powf(0.25)).abs() < 1e-15);
        let h = gp([0.0; 3], &[0.3, 0.4, 0.0, 1.2]);
        assert!((hnorm(&h) - h.y.norm()).abs() < 1e-15);
    }

    #[test]
    fn rho_zero_on_diagonal() {
        let g = gp([0.2, 0.1, -0.3], &[1., 0., 2., 0.]);
        assert_eq!(rho(&g, &g).unwrap(), 0.0);
    }

    #[test]
    fn boundary_projection() {
        let q = SiegelPoint::new(Q::new(1.0, 1.0, 0.0, 0.0), HVector(vec![Q::one()]));
        let g = boundary_to_group(&q).unwrap();
        assert_eq!(g, gp([1., 0., 0.], &[1., 0., 0., 0.]));
        assert_eq!(group_to_boundary(&g), q);
        let origin = SiegelPoint::new(Q::zero(), HVector::zeros(1));
        assert_eq!(boundary_to_group(&origin).unwrap(), GroupPoint::identity(2));
    }

    #[test]
    fn off_boundary_reports_defect() {
        let q = SiegelPoint::new(Q::new(2.0, 0.0, 0.0, 0.0), HVector(vec![Q::one()]));
        match boundary_to_group(&q) {
            Err(Error::OffBoundary { defect }) => assert_eq!(defect, 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tau_moves_origin() {
        let p = gp([0.5, 0.0, -1.0], &[1., 2., 0., 0.]);
        let origin = SiegelPoint::new(Q::zero(), HVector::zeros(1));
        let img = tau(&p, &origin).unwrap();
        assert_eq!(img.q1, Q::new(5.0, 0.5, 0.0, -1.0));
        assert_eq!(img.qprime, p.y);
        let e = GroupPoint::identity(2);
        let q = SiegelPoint::new(Q::new(3.0, 1.0, 2.0, 0.5), HVector(vec![Q::new(1., 1., 0., 0.)]));
        assert_eq!(tau(&e, &q).unwrap(), q);
    }

    #[test]
    fn flows() {
        let e = GroupPoint::identity(3);
        let f = vector_field_flow(1, 3, &0.7, &e).unwrap();
        let mut want = vec![0.0; 11];
        want[3 + 4 + 2] = 0.7;
        assert_eq!(f.coords(), want);
        assert!(vector_field_flow(2, 1, &1.0, &e).is_err());
        assert!(vector_field_flow(0, 5, &1.0, &e).is_err());
        assert!(vector_field_flow(0, 0, &1.0, &e).is_err());
    }

    #[test]
    fn apply_y_on_coordinates() {
        let g = gp([0.1, 0.2, 0.3], &[0.5, -1.0, 2.0, 0.25]);
        for j in 1..=4 {
            let yj = apply_y(0, j, |p| Ok(Q::real(p.y.to_reals()[j - 1])), &g, 1e-3).unwrap();
            assert!((yj.x1 - 1.0).abs() < 1e-12);
            let c = apply_y(0, j, |_| Ok(Q::real(3.0)), &g, 1e-3).unwrap();
            assert_eq!(c, Q::zero());
        }
        assert!(apply_y(0, 1, |_| Ok(Q::zero()), &g, 0.0).is_err());
    }
}
