//! The Cauchy–Szegő kernel `s(σ)`, its group form `K(g) = s(|y|^2 + t)` and
//! the two-point form `S(q, p)`.

pub mod derivpoly;
pub mod forms;
pub mod gradient;
pub mod slice;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heisenberg::{GroupPoint, SiegelPoint};
use crate::quaternion::{ImQuaternion, Quaternion};
use crate::scalar::Scalar;

pub use derivpoly::DerivPoly;
pub use forms::{s_closed_form, s_derivative_oracle, s_eval, s_sum_form};
pub use gradient::{grad_s, grad_s_oracle, yk, SGradient};

/// Largest supported `n`; the polynomial table holds orders up to `2n - 1`.
pub const MAX_N: usize = 12;

fn default_switch_tol() -> f64 {
    1e-3
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub n: usize,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "default_switch_tol")]
    pub switch_tol: f64,
}

fn one() -> f64 {
    1.0
}

impl KernelConfig {
    pub fn new(n: usize, c: f64) -> Result<Self> {
        let cfg = KernelConfig {
            n,
            c,
            switch_tol: default_switch_tol(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_switch_tol(mut self, tol: f64) -> Result<Self> {
        self.switch_tol = tol;
        self.validate()?;
        Ok(self)
    }

    /// The normalization under which the projection reproduces boundary
    /// values of holomorphic functions: `c = 2^{2n-3} / π^{2n}`.
    pub fn reproducing(n: usize) -> Result<Self> {
        KernelConfig::new(n, reproducing_constant(n))
    }

    /// `Q = 4n + 2`.
    pub fn homogeneous_dimension(&self) -> usize {
        4 * self.n + 2
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n > MAX_N {
            return Err(Error::Argument(format!(
                "n must lie in 2..={MAX_N}, got {}",
                self.n
            )));
        }
        if !self.c.is_finite() {
            return Err(Error::Argument(format!("c must be finite, got {}", self.c)));
        }
        if !(self.switch_tol > 0.0 && self.switch_tol < 1.0) {
            return Err(Error::Argument(format!(
                "switch_tol must lie in (0, 1), got {}",
                self.switch_tol
            )));
        }
        Ok(())
    }
}

pub fn reproducing_constant(n: usize) -> f64 {
    2f64.powi(2 * n as i32 - 3) / std::f64::consts::PI.powi(2 * n as i32)
}

/// `σ = x1 + r·u` with `|u| = 1`; `u` is `None` on the real axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlicePoint {
    pub x1: f64,
    pub r: f64,
    pub u: Option<ImQuaternion>,
}

impl SlicePoint {
    pub fn of(sigma: &Quaternion) -> Self {
        let im = sigma.im();
        let r = im.norm_sqr().sqrt();
        SlicePoint {
            x1: sigma.x1,
            r,
            u: if r > 0.0 { Some(im.scale(&(1.0 / r))) } else { None },
        }
    }

    pub fn embed(&self) -> Quaternion {
        match self.u {
            Some(u) => Quaternion::real(self.x1) + u.scale(&self.r).to_quaternion(),
            None => Quaternion::real(self.x1),
        }
    }
}

fn check_dim(found: usize, cfg: &KernelConfig) -> Result<()> {
    if found != cfg.n {
        return Err(Error::Dimension {
            expected: cfg.n,
            found,
        });
    }
    Ok(())
}

/// `σ = |y|^2 + t`.
pub fn group_sigma<T: Scalar>(g: &GroupPoint<T>) -> Quaternion<T> {
    Quaternion::real(g.y.norm_sqr()) + g.t.to_quaternion()
}

/// `K(g) = s(|y|^2 + t)`.
pub fn kernel<T: Scalar>(g: &GroupPoint<T>, cfg: &KernelConfig) -> Result<Quaternion<T>> {
    check_dim(g.dim_n(), cfg)?;
    if g.is_identity() {
        return Err(Error::Singularity("K is singular at the identity"));
    }
    s_eval(&group_sigma(g), cfg)
}

/// `K_ε(g) = s(|y|^2 + ε + t)`.
pub fn kernel_eps<T: Scalar>(g: &GroupPoint<T>, eps: &T, cfg: &KernelConfig) -> Result<Quaternion<T>> {
    check_dim(g.dim_n(), cfg)?;
    if *eps <= T::zero() {
        return Err(Error::Argument(format!("ε must be positive, got {}", eps.to_f64())));
    }
    s_eval(&(group_sigma(g) + Quaternion::real(eps.clone())), cfg)
}

/// `q1 + p̄1 - 2 Σ_k p̄_k q_k`.
pub fn two_point_sigma<T: Scalar>(q: &SiegelPoint<T>, p: &SiegelPoint<T>) -> Result<Quaternion<T>> {
    if q.dim_n() != p.dim_n() {
        return Err(Error::Dimension {
            expected: q.dim_n(),
            found: p.dim_n(),
        });
    }
    let inner = p.qprime.inner(&q.qprime)?;
    Ok(q.q1.clone() + p.q1.conj() - inner.scale(&T::from_i64(2)))
}

/// `S(q, p) = s(q1 + p̄1 - 2 Σ p̄_k q_k)`.
pub fn s_two_point<T: Scalar>(q: &SiegelPoint<T>, p: &SiegelPoint<T>, cfg: &KernelConfig) -> Result<Quaternion<T>> {
    check_dim(q.dim_n(), cfg)?;
    let sigma = two_point_sigma(q, p)?;
    if sigma.is_zero() {
        return Err(Error::Singularity("S is singular at coincident boundary points"));
    }
    s_eval(&sigma, cfg)
}
