//! The three evaluators of `s(σ)`.

use super::derivpoly::DerivPoly;
use super::slice::{Slice, SliceNum};
use super::KernelConfig;
use crate::error::{Error, Result};
use crate::quaternion::Quaternion;
use crate::scalar::Scalar;

pub(crate) fn factorial(k: usize) -> i128 {
    (1..=k as i128).product()
}

pub(crate) fn nonzero_slice<T: Scalar>(sigma: &Quaternion<T>) -> Result<Slice<T>> {
    if sigma.is_zero() {
        return Err(Error::Singularity("s is singular at σ = 0"));
    }
    Ok(Slice::of(sigma))
}

/// `Σ_{k=0}^{L} (L+1-k)(k+1) z^{-(L+2-k)} z̄^{-(k+2)}`, so that
/// `∂^L/∂x1^L (1/|σ|^4) = (-1)^L L! · G_L`.
pub(crate) fn binomial_sum<T: Scalar>(zi: &[SliceNum<T>], zbi: &[SliceNum<T>], l: usize) -> SliceNum<T> {
    let m = zi[0].m.clone();
    let mut acc = SliceNum::real(T::zero(), m);
    for k in 0..=l {
        let w = T::from_i128(((l + 1 - k) * (k + 1)) as i128);
        acc = acc + (zi[l + 2 - k].clone() * zbi[k + 2].clone()).scale(&w);
    }
    acc
}

/// Negative powers `z^{-k}`, `z̄^{-k}` for `k ≤ max`.
pub(crate) fn inverse_powers<T: Scalar>(z: &SliceNum<T>, max: usize) -> (Vec<SliceNum<T>>, Vec<SliceNum<T>>) {
    let zi = z.inv();
    let zbi = zi.conj();
    (zi.powers(max), zbi.powers(max))
}

/// `s` in slice coordinates via the double sum.
pub(crate) fn s_sum_slice<T: Scalar>(sl: &Slice<T>, n: usize, c: &T) -> SliceNum<T> {
    let z = sl.z();
    let (zi, zbi) = inverse_powers(&z, 2 * n);
    let g_hi = binomial_sum(&zi, &zbi, 2 * n - 2);
    let g_lo = binomial_sum(&zi, &zbi, 2 * n - 3);
    let f = T::from_i128(factorial(2 * n - 2)) * c.clone();
    (g_hi * z.conj() - g_lo).scale(&f)
}

pub fn s_sum_form<T: Scalar>(sigma: &Quaternion<T>, cfg: &KernelConfig) -> Result<Quaternion<T>> {
    cfg.validate()?;
    let sl = nonzero_slice(sigma)?;
    let v = s_sum_slice(&sl, cfg.n, &T::from_f64(cfg.c));
    Ok(sl.embed(&v))
}

/// `Im_w[ z̄² z^{-L} (z + (L+1) β w) ]`.
fn closed_bracket<T: Scalar>(sl: &Slice<T>, zi: &[SliceNum<T>], l: usize) -> T {
    let z = sl.z();
    let zb = z.conj();
    let shift = SliceNum::new(T::zero(), sl.beta.clone() * T::from_i64(l as i64 + 1), sl.m.clone());
    let b = zb.clone() * zb * zi[l].clone() * (z + shift);
    b.im
}

pub fn s_closed_form<T: Scalar>(sigma: &Quaternion<T>, cfg: &KernelConfig) -> Result<Quaternion<T>> {
    cfg.validate()?;
    let sl = nonzero_slice(sigma)?;
    let im2 = sigma.im().norm_sqr().to_f64();
    let all2 = sigma.norm_sqr().to_f64();
    if im2 <= cfg.switch_tol * cfg.switch_tol * all2 {
        return Err(Error::NearRealAxis {
            ratio: (im2 / all2).sqrt(),
            threshold: cfg.switch_tol,
        });
    }
    let n = cfg.n;
    let z = sl.z();
    let zi = z.inv().powers(2 * n - 2);
    let hi = closed_bracket(&sl, &zi, 2 * n - 2);
    let lo = closed_bracket(&sl, &zi, 2 * n - 3);
    let d = z.norm_sqr();
    let beta3m = sl.beta.clone() * sl.beta.clone() * sl.beta.clone() * sl.m.clone();
    let f = T::from_f64(cfg.c) * T::from_i128(4 * factorial(2 * n - 2))
        / (d.clone() * d * T::from_i64(-8) * beta3m);
    let brace = z.conj().scale(&hi) - SliceNum::real(lo, sl.m.clone());
    Ok(sl.embed(&brace.scale(&f)))
}

/// `c·[R_{2n-2} σ̄ + (2n-2) R_{2n-3}]` with `R_l = ∂^l/∂x1^l |σ|^{-4}`.
pub fn s_derivative_oracle<T: Scalar>(sigma: &Quaternion<T>, cfg: &KernelConfig) -> Result<Quaternion<T>> {
    cfg.validate()?;
    if sigma.is_zero() {
        return Err(Error::Singularity("s is singular at σ = 0"));
    }
    let n = cfg.n;
    let x1 = sigma.re();
    let d = sigma.norm_sqr();
    let hi = DerivPoly::get(2 * n - 2).ratio(&x1, &d);
    let lo = DerivPoly::get(2 * n - 3).ratio(&x1, &d);
    let c = T::from_f64(cfg.c);
    let v = sigma.conj().scale(&hi) + Quaternion::real(lo * T::from_i64(2 * n as i64 - 2));
    Ok(v.scale(&c))
}

/// Closed form above the switch threshold, sum form below.
pub fn s_eval<T: Scalar>(sigma: &Quaternion<T>, cfg: &KernelConfig) -> Result<Quaternion<T>> {
    match s_closed_form(sigma, cfg) {
        Err(Error::NearRealAxis { .. }) => s_sum_form(sigma, cfg),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use num_rational::BigRational;

    fn cfg(n: usize) -> KernelConfig {
        KernelConfig::new(n, 1.0).unwrap()
    }

    fn close(a: &Quaternion, b: &Quaternion, tol: f64) -> bool {
        (*a - *b).modulus() <= tol * b.modulus().max(1e-300)
    }

    #[test]
    fn anchors_n2() {
        let c = cfg(2);
        let one = Quaternion::real(1.0);
        let one_i = Quaternion::new(1.0, 1.0, 0.0, 0.0);
        let i = Quaternion::i();
        for f in [s_sum_form::<f64>, s_derivative_oracle::<f64>, s_eval::<f64>] {
            assert!(close(&f(&one, &c).unwrap(), &Quaternion::real(12.0), 1e-13));
            assert!(close(&f(&one_i, &c).unwrap(), &Quaternion::new(0.0, -1.0, 0.0, 0.0), 1e-13));
            assert!(close(&f(&i, &c).unwrap(), &Quaternion::new(0.0, 4.0, 0.0, 0.0), 1e-13));
        }
        assert!(close(&s_closed_form(&one_i, &c).unwrap(), &Quaternion::new(0.0, -1.0, 0.0, 0.0), 1e-13));
        assert!(close(&s_closed_form(&i, &c).unwrap(), &Quaternion::new(0.0, 4.0, 0.0, 0.0), 1e-13));
    }

    #[test]
    fn rational_forms_agree_exactly() {
        let sigma: Quaternion<BigRational> =
            Quaternion::new(ratio(1, 3), ratio(1, 2), ratio(-2, 7), ratio(1, 1));
        for n in 2..=4 {
            let c = cfg(n);
            let a = s_sum_form(&sigma, &c).unwrap();
            let b = s_closed_form(&sigma, &c).unwrap();
            let d = s_derivative_oracle(&sigma, &c).unwrap();
            assert_eq!(a, b, "n={n}");
            assert_eq!(a, d, "n={n}");
        }
    }

    #[test]
    fn closed_form_rejects_near_axis() {
        let c = cfg(2);
        let sigma = Quaternion::new(1.0, 1e-5, 0.0, 0.0);
        assert!(matches!(s_closed_form(&sigma, &c), Err(Error::NearRealAxis { .. })));
        assert!(s_eval(&sigma, &c).is_ok());
    }

    #[test]
    fn zero_is_singular() {
        let c = cfg(3);
        let z = Quaternion::<f64>::zero();
        assert!(matches!(s_sum_form(&z, &c), Err(Error::Singularity(_))));
        assert!(matches!(s_closed_form(&z, &c), Err(Error::Singularity(_))));
        assert!(matches!(s_derivative_oracle(&z, &c), Err(Error::Singularity(_))));
    }

    #[test]
    fn c_scales_linearly() {
        let sigma = Quaternion::new(0.3, -0.2, 0.5, 0.1);
        let a = s_eval(&sigma, &KernelConfig::new(3, 1.0).unwrap()).unwrap();
        let b = s_eval(&sigma, &KernelConfig::new(3, -2.5).unwrap()).unwrap();
        assert!(close(&b, &a.scale(&-2.5), 1e-14));
    }
}
