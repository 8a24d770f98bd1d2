//! Analytic derivatives of `s` and of `K` along the horizontal fields.

use serde::Serialize;

use super::derivpoly::DerivPoly;
use super::forms::{binomial_sum, factorial, inverse_powers, nonzero_slice, s_sum_slice};
use super::slice::SliceNum;
use super::KernelConfig;
use crate::error::{Error, Result};
use crate::heisenberg::{vector_field_vertical, GroupPoint};
use crate::quaternion::Quaternion;

/// `∂s/∂x1` and `∂s/∂x_{α+1}`, `α = 1, 2, 3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SGradient {
    pub dx1: Quaternion,
    pub dx: [Quaternion; 3],
}

/// `∂_z G_L` and `∂_z̄ G_L` for the sums of [`binomial_sum`].
fn binomial_sum_wirtinger(
    zi: &[SliceNum<f64>],
    zbi: &[SliceNum<f64>],
    l: usize,
) -> (SliceNum<f64>, SliceNum<f64>) {
    let mut dz = SliceNum::real(0.0, 1.0);
    let mut dzb = SliceNum::real(0.0, 1.0);
    for k in 0..=l {
        let a = ((l + 1 - k) * (k + 1)) as f64;
        dz = dz + (zi[l + 3 - k] * zbi[k + 2]).scale(&(-a * (l + 2 - k) as f64));
        dzb = dzb + (zi[l + 2 - k] * zbi[k + 3]).scale(&(-a * (k + 2) as f64));
    }
    (dz, dzb)
}

/// Analytic gradient of `s`.
///
/// `∂s/∂x1` comes from the two-sum slice formula. The transverse
/// derivatives use the slice chain rule `s = a + b u`, `u = Im σ/r`, with
/// `∂/∂r = u (∂_z - ∂_z̄)`, when `r > switch_tol·|σ|`, and the polynomial
/// representation otherwise.
pub fn grad_s(sigma: &Quaternion, cfg: &KernelConfig) -> Result<SGradient> {
    cfg.validate()?;
    let sl = nonzero_slice(sigma)?;
    let n = cfg.n;
    let z = sl.z();
    let (zi, zbi) = inverse_powers(&z, 2 * n + 2);
    let f1 = cfg.c * factorial(2 * n - 1) as f64;
    let d1 = (binomial_sum(&zi, &zbi, 2 * n - 2) - binomial_sum(&zi, &zbi, 2 * n - 1) * z.conj()).scale(&f1);
    let dx1 = sl.embed(&d1);

    let r = sl.beta;
    if r <= cfg.switch_tol * sigma.modulus() {
        let oracle = grad_s_oracle(sigma, cfg)?;
        return Ok(SGradient { dx1, dx: oracle.dx });
    }
    let f0 = cfg.c * factorial(2 * n - 2) as f64;
    let g_hi = binomial_sum(&zi, &zbi, 2 * n - 2);
    let (hz, hzb) = binomial_sum_wirtinger(&zi, &zbi, 2 * n - 2);
    let (lz, lzb) = binomial_sum_wirtinger(&zi, &zbi, 2 * n - 3);
    let s_z = (hz * z.conj() - lz).scale(&f0);
    let s_zb = (hzb * z.conj() + g_hi - lzb).scale(&f0);
    let unit = SliceNum::new(0.0, 1.0, 1.0);
    let s_r = unit * (s_z - s_zb);
    let s = s_sum_slice(&sl, n, &cfg.c);
    let u = sl.w;
    let along = sl.embed(&s_r);
    let mut dx = [Quaternion::zero(); 3];
    for (a, slot) in dx.iter_mut().enumerate() {
        let xa = *sigma.im().get(a + 1);
        let radial = along.scale(&(xa / r));
        let rotate = (Quaternion::unit(a + 1) - u.to_quaternion().scale(&(xa / r))).scale(&(s.im / r));
        *slot = radial + rotate;
    }
    Ok(SGradient { dx1, dx })
}

/// Gradient from the exact polynomial representation
/// `s = c [R_{2n-2}(x1, D) σ̄ + (2n-2) R_{2n-3}(x1, D)]`, regular for `σ ≠ 0`.
pub fn grad_s_oracle(sigma: &Quaternion, cfg: &KernelConfig) -> Result<SGradient> {
    cfg.validate()?;
    if sigma.is_zero() {
        return Err(Error::Singularity("s is singular at σ = 0"));
    }
    let n = cfg.n;
    let x1 = sigma.x1;
    let d = sigma.norm_sqr();
    let (p_top, p_hi, p_lo) = (
        DerivPoly::get(2 * n - 1),
        DerivPoly::get(2 * n - 2),
        DerivPoly::get(2 * n - 3),
    );
    let m = 2.0 * n as f64 - 2.0;
    let bar = sigma.conj();
    let dx1 = (bar.scale(&p_top.ratio(&x1, &d)) + Quaternion::real((m + 1.0) * p_hi.ratio(&x1, &d)))
        .scale(&cfg.c);
    let r_hi = p_hi.ratio(&x1, &d);
    let dd_hi = p_hi.ratio_d_partial(&x1, &d);
    let dd_lo = p_lo.ratio_d_partial(&x1, &d);
    let mut dx = [Quaternion::zero(); 3];
    for (a, slot) in dx.iter_mut().enumerate() {
        let two_x = 2.0 * sigma.to_array()[a + 1];
        let v = bar.scale(&(two_x * dd_hi)) - Quaternion::unit(a + 1).scale(&r_hi)
            + Quaternion::real(m * two_x * dd_lo);
        *slot = v.scale(&cfg.c);
    }
    Ok(SGradient { dx1, dx })
}

/// `Y_{4l+j} K(g)` by the chain rule through `σ = |y|^2 + t`.
pub fn yk(l: usize, j: usize, g: &GroupPoint, cfg: &KernelConfig) -> Result<Quaternion> {
    if g.dim_n() != cfg.n {
        return Err(Error::Dimension {
            expected: cfg.n,
            found: g.dim_n(),
        });
    }
    let vert = vector_field_vertical(l, j, g)?;
    if g.is_identity() {
        return Err(Error::Singularity("K is singular at the identity"));
    }
    let sigma = Quaternion::real(g.y.norm_sqr()) + g.t.to_quaternion();
    let grad = grad_s(&sigma, cfg)?;
    let yj = g.y.to_reals()[4 * l + j - 1];
    let mut out = grad.dx1.scale(&(2.0 * yj));
    for (a, c) in vert.iter().enumerate() {
        out = out + grad.dx[a].scale(c);
    }
    Ok(out)
}
