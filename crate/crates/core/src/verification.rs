//! Seeded checks of the kernel identities and estimates.
//!
//! Every `≲` estimate becomes a normalized ratio that must be constant on
//! dilation orbits (up to roundoff) and whose sampled supremum must be
//! finite and stable when the sample count doubles. Sample `i` always uses
//! stream `i`, so the first half of a scan is the scan at half the size.
//! Bound scans polish their best samples by a seeded local ascent, done
//! separately for the full scan and for its first half.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::BigRational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::heisenberg::{
    apply_y, dilate, flow_commutator, group_inv, group_mul, hnorm, quasi_triangle_constant, rho, GroupPoint,
};
use crate::kernel::{kernel, s_closed_form, s_derivative_oracle, s_eval, s_sum_form, yk, KernelConfig};
use crate::quaternion::{b_entry, HVector, ImQuaternion, Quaternion};
use crate::reduce::{argmax, argmin, par_map};
use crate::sampling::{ball_point, gaussian_point, log_uniform, sample_rng, sphere_point, unit_quaternion};
use crate::scalar::{ratio, Scalar};

/// Signature shared by the three `s` evaluators (and by corrupted stand-ins).
pub type Evaluator = fn(&Quaternion, &KernelConfig) -> Result<Quaternion>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub claim: String,
    pub n: usize,
    pub c: f64,
    pub samples: usize,
    pub seed: u64,
    pub sup: f64,
    pub inf: f64,
    pub argsup: Vec<f64>,
    pub arginf: Vec<f64>,
    pub pass: bool,
    /// Samples whose ratio could not be evaluated.
    pub skipped: usize,
    pub params: BTreeMap<String, f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanOptions {
    pub samples: usize,
    pub seed: u64,
    /// Allowed relative change of the supremum between `samples/2` and `samples`.
    pub stability_tol: f64,
    /// Allowed relative change of a ratio along a dilation orbit.
    pub drift_tol: f64,
}

impl ScanOptions {
    pub fn new(samples: usize, seed: u64) -> Self {
        ScanOptions {
            samples,
            seed,
            stability_tol: 0.05,
            drift_tol: 1e-10,
        }
    }
}

pub const DEFAULT_C_SEP: f64 = 4.0;
pub const DEFAULT_KAPPA: f64 = 4.0;
pub const DEFAULT_C0: f64 = 0.5;
const DRIFT_FACTORS: [f64; 2] = [0.1, 10.0];

fn stream(seed: u64, salt: u64, i: usize) -> ChaCha8Rng {
    sample_rng(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15), i as u64)
}

struct Scan {
    ratios: Vec<f64>,
    points: Vec<Vec<f64>>,
    /// Refined supremum of the first half, when [`Scan::refine`] ran.
    half_sup: Option<f64>,
}

/// Candidates refined by local ascent, and ascent steps per candidate.
const REFINE_TOP: usize = 32;
const REFINE_STEPS: usize = 1500;

/// Random-walk ascent of `eval` from `x`; the step adapts to the
/// acceptance rate and is relative to the largest coordinate. `eval` returns
/// the ratio together with the admissible point it was evaluated at.
fn ascend<F>(x: &[f64], fx: f64, rng: &mut ChaCha8Rng, eval: F) -> (f64, Vec<f64>)
where
    F: Fn(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    use rand_distr::{Distribution, StandardNormal};
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (mut best, mut fbest) = (x.to_vec(), fx);
    let mut step = 0.05;
    for _ in 0..REFINE_STEPS {
        let cand: Vec<f64> = best
            .iter()
            .map(|v| {
                let z: f64 = StandardNormal.sample(rng);
                v + step * scale * z
            })
            .collect();
        match eval(&cand) {
            Some((f, at)) if f > fbest => {
                best = at;
                fbest = f;
                step = (step * 1.5).min(0.5);
            }
            _ => step = (step * 0.9).max(1e-7),
        }
    }
    (fbest, best)
}

impl Scan {
    fn run<F>(samples: usize, f: F) -> Scan
    where
        F: Fn(usize) -> Option<(f64, Vec<f64>)> + Sync + Send,
    {
        let out = par_map(samples, f);
        let mut ratios = Vec::with_capacity(samples);
        let mut points = Vec::with_capacity(samples);
        for o in out {
            match o {
                Some((r, p)) => {
                    ratios.push(r);
                    points.push(p);
                }
                None => {
                    ratios.push(f64::NAN);
                    points.push(Vec::new());
                }
            }
        }
        Scan {
            ratios,
            points,
            half_sup: None,
        }
    }

    fn top(&self, len: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..len).filter(|&i| !self.ratios[i].is_nan()).collect();
        idx.sort_by(|&a, &b| self.ratios[b].total_cmp(&self.ratios[a]).then(a.cmp(&b)));
        idx.truncate(REFINE_TOP);
        idx
    }

    /// Local ascent from the best samples of the whole scan and, separately,
    /// of its first half. `eval(i, coords)` is the ratio at perturbed
    /// coordinates of sample `i` and the admissible point it used.
    fn refine<F>(&mut self, seed: u64, salt: u64, eval: F)
    where
        F: Fn(usize, &[f64]) -> Option<(f64, Vec<f64>)> + Sync + Send,
    {
        let all = self.top(self.ratios.len());
        let half = self.top(self.ratios.len() / 2);
        let mut cands = all.clone();
        cands.extend(half.iter().filter(|i| !all.contains(i)));
        let refined = par_map(cands.len(), |c| {
            let i = cands[c];
            let mut rng = stream(seed, salt, i);
            ascend(&self.points[i], self.ratios[i], &mut rng, |x| eval(i, x))
        });
        let lookup = |i: usize| &refined[cands.iter().position(|&c| c == i).expect("candidate")];
        self.half_sup = half.iter().map(|&i| lookup(i).0).reduce(f64::max);
        let updates: Vec<(usize, (f64, Vec<f64>))> = all.iter().map(|&i| (i, lookup(i).clone())).collect();
        for (i, (f, x)) in updates {
            self.ratios[i] = f;
            self.points[i] = x;
        }
    }

    fn argsup(&self) -> Option<usize> {
        argmax(&self.ratios)
    }

    /// `|sup(all) - sup(first half)| / sup(all)`.
    fn stability(&self) -> f64 {
        let half = self.ratios.len() / 2;
        let all = self.argsup().map(|i| self.ratios[i]).unwrap_or(f64::NAN);
        let first = match self.half_sup {
            Some(v) => v,
            None => argmax(&self.ratios[..half]).map(|i| self.ratios[i]).unwrap_or(f64::NAN),
        };
        if all == 0.0 {
            0.0
        } else {
            ((all - first) / all).abs()
        }
    }

    fn report(&self, claim: &str, cfg: &KernelConfig, seed: u64) -> BoundReport {
        let sup_i = self.argsup();
        let inf_i = argmin(&self.ratios);
        BoundReport {
            claim: claim.into(),
            n: cfg.n,
            c: cfg.c,
            samples: self.ratios.len(),
            seed,
            sup: sup_i.map(|i| self.ratios[i]).unwrap_or(f64::NAN),
            inf: inf_i.map(|i| self.ratios[i]).unwrap_or(f64::NAN),
            argsup: sup_i.map(|i| self.points[i].clone()).unwrap_or_default(),
            arginf: inf_i.map(|i| self.points[i].clone()).unwrap_or_default(),
            pass: false,
            skipped: self.ratios.iter().filter(|r| r.is_nan()).count(),
            params: BTreeMap::new(),
        }
    }
}

fn rel(a: &Quaternion, b: &Quaternion) -> f64 {
    let scale = a.modulus().max(b.modulus());
    if scale == 0.0 {
        0.0
    } else {
        (*a - *b).modulus() / scale
    }
}

fn concat(points: &[&GroupPoint]) -> Vec<f64> {
    points.iter().flat_map(|p| p.coords()).collect()
}

fn split(coords: &[f64], parts: usize) -> Result<Vec<GroupPoint>> {
    let len = coords.len() / parts;
    coords.chunks(len).map(GroupPoint::from_coords).collect()
}

/// Largest relative change of `f` along `δ_r` for the configured factors.
fn dilation_drift<F>(f: F, base: f64) -> f64
where
    F: Fn(f64) -> Result<f64>,
{
    DRIFT_FACTORS
        .iter()
        .map(|&r| match f(r) {
            Ok(v) if base != 0.0 => ((v - base) / base).abs(),
            Ok(v) => v.abs(),
            Err(_) => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------- forms

/// `σ` with `|σ|` log-uniform in `[1e-3, 1e3]`, uniform direction and
/// `|Im σ| > min_ratio·|σ|`.
pub fn random_sigma<R: Rng>(rng: &mut R, min_ratio: f64) -> Quaternion {
    let u = loop {
        let u = unit_quaternion(rng);
        if u.im().norm_sqr().sqrt() > min_ratio {
            break u;
        }
    };
    u.scale(&log_uniform(rng, 1e-3, 1e3))
}

pub fn check_form_equivalence(cfg: &KernelConfig, samples: usize, seed: u64, tol: f64) -> Result<BoundReport> {
    check_form_equivalence_with(
        cfg,
        samples,
        seed,
        tol,
        [s_sum_form::<f64>, s_closed_form::<f64>, s_derivative_oracle::<f64>],
    )
}

/// Maximum pairwise relative deviation among the given evaluators.
pub fn check_form_equivalence_with(
    cfg: &KernelConfig,
    samples: usize,
    seed: u64,
    tol: f64,
    evals: [Evaluator; 3],
) -> Result<BoundReport> {
    cfg.validate()?;
    if !(tol > 0.0) {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    let scan = Scan::run(samples, |i| {
        let mut rng = stream(seed, 1, i);
        let sigma = random_sigma(&mut rng, cfg.switch_tol);
        let vals: Vec<Result<Quaternion>> = evals.iter().map(|f| f(&sigma, cfg)).collect();
        let dev = match (&vals[0], &vals[1], &vals[2]) {
            (Ok(a), Ok(b), Ok(c)) => rel(a, b).max(rel(a, c)).max(rel(b, c)),
            _ => f64::INFINITY,
        };
        Some((dev, sigma.to_array().to_vec()))
    });
    let mut r = scan.report("form_equivalence", cfg, seed);
    r.pass = r.skipped == 0 && r.sup <= tol;
    r.params.insert("tol".into(), tol);
    Ok(r)
}

/// The three evaluators in exact rational arithmetic on random rational `σ`;
/// the ratio is 1 for a sample where they differ and 0 otherwise.
pub fn check_form_equivalence_exact(cfg: &KernelConfig, samples: usize, seed: u64) -> Result<BoundReport> {
    cfg.validate()?;
    let scan = Scan::run(samples, |i| {
        let mut rng = stream(seed, 2, i);
        let sigma = loop {
            let mut c = [0i64; 4];
            for v in c.iter_mut() {
                *v = rng.gen_range(-24..=24);
            }
            let den = rng.gen_range(1..=12);
            let q: Quaternion<BigRational> = Quaternion::new(
                ratio(c[0], den),
                ratio(c[1], den),
                ratio(c[2], den),
                ratio(c[3], den),
            );
            let im2 = q.im().norm_sqr().to_f64();
            if im2 > cfg.switch_tol * cfg.switch_tol * q.norm_sqr().to_f64() {
                break q;
            }
        };
        let a = s_sum_form(&sigma, cfg).ok()?;
        let b = s_closed_form(&sigma, cfg).ok()?;
        let d = s_derivative_oracle(&sigma, cfg).ok()?;
        let differ = if a == b && a == d { 0.0 } else { 1.0 };
        Some((differ, sigma.to_f64().to_array().to_vec()))
    });
    let mut r = scan.report("form_equivalence_exact", cfg, seed);
    r.pass = r.skipped == 0 && r.sup == 0.0;
    Ok(r)
}

// ---------------------------------------------------------------- homogeneity

pub fn check_homogeneity(cfg: &KernelConfig, samples: usize, seed: u64) -> Result<BoundReport> {
    check_homogeneity_with_exponent(cfg, samples, seed, cfg.homogeneous_dimension() as f64)
}

/// `|K(δ_r g) r^q - K(g)| / |K(g)|` with `r` log-uniform in `[1e-2, 1e2]`.
pub fn check_homogeneity_with_exponent(cfg: &KernelConfig, samples: usize, seed: u64, q: f64) -> Result<BoundReport> {
    cfg.validate()?;
    let scan = Scan::run(samples, |i| {
        let mut rng = stream(seed, 3, i);
        let g = gaussian_point(&mut rng, cfg.n);
        let r = log_uniform(&mut rng, 1e-2, 1e2);
        let k = kernel(&g, cfg).ok()?;
        let kr = kernel(&dilate(&r, &g).ok()?, cfg).ok()?;
        let mut p = g.coords();
        p.push(r);
        Some((rel(&kr.scale(&r.powf(q)), &k), p))
    });
    let mut r = scan.report("homogeneity", cfg, seed);
    r.pass = r.skipped == 0 && r.sup <= 1e-10;
    r.params.insert("exponent".into(), q);
    Ok(r)
}

// ---------------------------------------------------------------- size and gradient

fn size_ratio(g: &GroupPoint, cfg: &KernelConfig) -> Result<f64> {
    let q = cfg.homogeneous_dimension() as i32;
    Ok(hnorm(g).powi(q) * kernel(g, cfg)?.modulus())
}

/// `‖g‖^Q |K(g)|` over the homogeneous unit sphere.
pub fn scan_size_bound(cfg: &KernelConfig, opts: &ScanOptions) -> Result<BoundReport> {
    cfg.validate()?;
    let scan = Scan::run(opts.samples, |i| {
        let g = sphere_point(&mut stream(opts.seed, 4, i), cfg.n);
        Some((size_ratio(&g, cfg).ok()?, g.coords()))
    });
    let mut scan = scan;
    scan.refine(opts.seed, 104, |_, x| {
        Some((size_ratio(&GroupPoint::from_coords(x).ok()?, cfg).ok()?, x.to_vec()))
    });
    let mut r = scan.report("size_bound", cfg, opts.seed);
    let drift = match scan.argsup() {
        Some(i) => {
            let g = GroupPoint::from_coords(&scan.points[i])?;
            dilation_drift(|s| size_ratio(&dilate(&s, &g)?, cfg), scan.ratios[i])
        }
        None => f64::INFINITY,
    };
    finish_scan(&mut r, &scan, drift, opts);
    Ok(r)
}

fn finish_scan(r: &mut BoundReport, scan: &Scan, drift: f64, opts: &ScanOptions) {
    let stability = scan.stability();
    r.params.insert("stability".into(), stability);
    r.params.insert("drift".into(), drift);
    r.pass = r.skipped == 0
        && r.sup.is_finite()
        && stability <= opts.stability_tol
        && drift <= opts.drift_tol;
}

fn gradient_ratio(g: &GroupPoint, cfg: &KernelConfig, exponent: f64) -> Result<f64> {
    let mut best = 0.0f64;
    for l in 0..cfg.n - 1 {
        for j in 1..=4 {
            best = best.max(yk(l, j, g, cfg)?.modulus());
        }
    }
    Ok(hnorm(g).powf(exponent) * best)
}

pub fn scan_gradient_bound(cfg: &KernelConfig, opts: &ScanOptions) -> Result<BoundReport> {
    scan_gradient_bound_with_exponent(cfg, opts, cfg.homogeneous_dimension() as f64 + 1.0)
}

/// `ρ(g, 0)^e max_{l,j} |Y_{4l+j} K(g)|` over the unit sphere.
pub fn scan_gradient_bound_with_exponent(cfg: &KernelConfig, opts: &ScanOptions, exponent: f64) -> Result<BoundReport> {
    cfg.validate()?;
    let scan = Scan::run(opts.samples, |i| {
        let g = sphere_point(&mut stream(opts.seed, 5, i), cfg.n);
        Some((gradient_ratio(&g, cfg, exponent).ok()?, g.coords()))
    });
    let mut scan = scan;
    scan.refine(opts.seed, 105, |_, x| {
        let r = gradient_ratio(&GroupPoint::from_coords(x).ok()?, cfg, exponent).ok()?;
        Some((r, x.to_vec()))
    });
    let mut r = scan.report("gradient_bound", cfg, opts.seed);
    let drift = match scan.argsup() {
        Some(i) => {
            let g = GroupPoint::from_coords(&scan.points[i])?;
            dilation_drift(|s| gradient_ratio(&dilate(&s, &g)?, cfg, exponent), scan.ratios[i])
        }
        None => f64::INFINITY,
    };
    finish_scan(&mut r, &scan, drift, opts);
    r.params.insert("exponent".into(), exponent);
    Ok(r)
}

/// Analytic `Y_{4l+j} K` against central differences along the flows.
///
/// The ratio is `max_{l,j} |analytic - fd| / max_{l,j} |analytic|` at step
/// `1e-4 ρ(g, 0)`. The convergence order is measured on the aggregated
/// errors at steps `1e-3 ρ`, `5e-4 ρ`, `2.5e-4 ρ`.
pub fn check_gradient_consistency(cfg: &KernelConfig, samples: usize, seed: u64) -> Result<BoundReport> {
    cfg.validate()?;
    let fields: Vec<(usize, usize)> = (0..cfg.n - 1).flat_map(|l| (1..=4).map(move |j| (l, j))).collect();
    let k = |g: &GroupPoint| kernel(g, cfg);
    let errors = |g: &GroupPoint, exact: &[Quaternion], step: f64| -> Result<f64> {
        let mut e = 0.0f64;
        for (f, &(l, j)) in fields.iter().enumerate() {
            e = e.max((apply_y(l, j, k, g, step)? - exact[f]).modulus());
        }
        Ok(e)
    };
    let rows = par_map(samples, |i| -> Option<(f64, [f64; 3], Vec<f64>)> {
        let g = gaussian_point(&mut stream(seed, 6, i), cfg.n);
        let rho0 = hnorm(&g);
        let exact: Vec<Quaternion> = fields.iter().map(|&(l, j)| yk(l, j, &g, cfg)).collect::<Result<_>>().ok()?;
        let scale = exact.iter().map(|q| q.modulus()).fold(0.0, f64::max);
        let e = errors(&g, &exact, 1e-4 * rho0).ok()? / scale;
        let mut steps = [0.0; 3];
        for (s, h) in steps.iter_mut().zip([1e-3, 5e-4, 2.5e-4]) {
            *s = errors(&g, &exact, h * rho0).ok()? / scale;
        }
        Some((e, steps, g.coords()))
    });
    let mut agg = [0.0f64; 3];
    let scan = Scan {
        ratios: rows.iter().map(|r| r.as_ref().map(|x| x.0).unwrap_or(f64::NAN)).collect(),
        points: rows.iter().map(|r| r.as_ref().map(|x| x.2.clone()).unwrap_or_default()).collect(),
        half_sup: None,
    };
    for (_, s, _) in rows.iter().flatten() {
        for (a, v) in agg.iter_mut().zip(s) {
            *a += v;
        }
    }
    let order = (agg[0] / agg[1]).log2().min((agg[1] / agg[2]).log2());
    let mut r = scan.report("gradient_consistency", cfg, seed);
    r.params.insert("order".into(), order);
    r.pass = r.skipped == 0 && r.sup <= 1e-5 && order >= 1.9;
    Ok(r)
}

// ---------------------------------------------------------------- regularity

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regularity {
    /// `|K(h^{-1} g) - K(h^{-1} g0)|`, smoothness in the first variable.
    First,
    /// `|K(g^{-1} h) - K(g0^{-1} h)|`, smoothness in the second variable.
    Second,
}

impl Regularity {
    pub fn claim(&self) -> &'static str {
        match self {
            Regularity::First => "regularity_ii",
            Regularity::Second => "regularity_iii",
        }
    }
}

fn regularity_ratio(
    g: &GroupPoint,
    g0: &GroupPoint,
    h: &GroupPoint,
    cfg: &KernelConfig,
    variant: Regularity,
) -> Result<f64> {
    let (a, b) = match variant {
        Regularity::First => (group_mul(&group_inv(h), g)?, group_mul(&group_inv(h), g0)?),
        Regularity::Second => (group_mul(&group_inv(g), h)?, group_mul(&group_inv(g0), h)?),
    };
    let q = cfg.homogeneous_dimension() as i32;
    let d = rho(g, g0)?;
    Ok((kernel(&a, cfg)? - kernel(&b, cfg)?).modulus() * rho(g0, h)?.powi(q + 1) / d)
}

/// Triples with `ρ(g0, h) ≥ c_sep ρ(g, g0)`: `g0 = h δ_λ(v)` with `‖v‖ = 1`
/// and `g = g0 δ_λ(u)` with `‖u‖ ≤ 1/c_sep`.
pub fn check_regularity(
    cfg: &KernelConfig,
    c_sep: f64,
    variant: Regularity,
    opts: &ScanOptions,
) -> Result<BoundReport> {
    cfg.validate()?;
    if !(c_sep > 0.0) {
        return Err(Error::Argument(format!("c_sep must be positive, got {c_sep}")));
    }
    let n = cfg.n;
    let scan = Scan::run(opts.samples, |i| {
        let mut rng = stream(opts.seed, 7, i);
        let h = gaussian_point(&mut rng, n);
        let v = sphere_point(&mut rng, n);
        let lambda = log_uniform(&mut rng, 0.1, 10.0);
        let u = ball_point(&mut rng, n, 1.0 / c_sep);
        let g0 = group_mul(&h, &dilate(&lambda, &v).ok()?).ok()?;
        let g = group_mul(&g0, &dilate(&lambda, &u).ok()?).ok()?;
        let r = regularity_ratio(&g, &g0, &h, cfg, variant).ok()?;
        Some((r, concat(&[&g, &g0, &h])))
    });
    let mut scan = scan;
    scan.refine(opts.seed, 107, |_, x| {
        let t = split(x, 3).ok()?;
        // pull g back onto the separation boundary when a step leaves it
        let (sep, d) = (rho(&t[1], &t[2]).ok()?, rho(&t[0], &t[1]).ok()?);
        let g = if sep < c_sep * d {
            let u = group_mul(&group_inv(&t[1]), &t[0]).ok()?;
            group_mul(&t[1], &dilate(&(sep / (c_sep * d)), &u).ok()?).ok()?
        } else {
            t[0].clone()
        };
        let r = regularity_ratio(&g, &t[1], &t[2], cfg, variant).ok()?;
        Some((r, concat(&[&g, &t[1], &t[2]])))
    });
    let mut r = scan.report(variant.claim(), cfg, opts.seed);
    let drift = match scan.argsup() {
        Some(i) => {
            let t = split(&scan.points[i], 3)?;
            dilation_drift(
                |s| {
                    regularity_ratio(&dilate(&s, &t[0])?, &dilate(&s, &t[1])?, &dilate(&s, &t[2])?, cfg, variant)
                },
                scan.ratios[i],
            )
        }
        None => f64::INFINITY,
    };
    finish_scan(&mut r, &scan, drift, opts);
    r.params.insert("c_sep".into(), c_sep);
    Ok(r)
}

// ---------------------------------------------------------------- mean value

const MEAN_VALUE_PROBES: usize = 32;

fn mean_value_ratio(
    g: &GroupPoint,
    g0: &GroupPoint,
    probes: &[GroupPoint],
    kappa: f64,
    cfg: &KernelConfig,
) -> Result<f64> {
    let d = rho(g, g0)?;
    let radius = kappa * d;
    let mut best = 0.0f64;
    for w in probes {
        let x = if w.is_identity() {
            g0.clone()
        } else {
            group_mul(g0, &dilate(&radius, w)?)?
        };
        for l in 0..cfg.n - 1 {
            for j in 1..=4 {
                best = best.max(yk(l, j, &x, cfg)?.modulus());
            }
        }
    }
    Ok((kernel(g, cfg)? - kernel(g0, cfg)?).modulus() / (d * best))
}

fn mean_value_sample(cfg: &KernelConfig, c0: f64, kappa: f64, seed: u64, i: usize) -> Option<(GroupPoint, GroupPoint, Vec<GroupPoint>)> {
    let n = cfg.n;
    let mut rng = stream(seed, 8, i);
    let lambda = log_uniform(&mut rng, 0.1, 10.0);
    let g0 = dilate(&lambda, &sphere_point(&mut rng, n)).ok()?;
    let u = ball_point(&mut rng, n, 1.0);
    let g = group_mul(&g0, &dilate(&(c0 / kappa * hnorm(&g0)), &u).ok()?).ok()?;
    let mut probes = vec![GroupPoint::identity(n)];
    probes.extend((0..MEAN_VALUE_PROBES).map(|_| ball_point(&mut rng, n, 1.0)));
    Some((g, g0, probes))
}

/// Surrogate of the stratified mean value inequality with `d_cc` replaced by
/// `κ ρ`: pairs with `ρ(g, g0) < c0 ρ(g0, 0)/κ`, gradient maximum taken over
/// `g0 u`, `ρ(u, 0) ≤ κ ρ(g, g0)`, sampled at the centre and 32 ball points.
pub fn mean_value_check(cfg: &KernelConfig, c0: f64, kappa: f64, opts: &ScanOptions) -> Result<BoundReport> {
    cfg.validate()?;
    if !(c0 > 0.0 && c0 < 1.0) {
        return Err(Error::Argument(format!("c0 must lie in (0, 1), got {c0}")));
    }
    if !(kappa > 0.0) {
        return Err(Error::Argument(format!("kappa must be positive, got {kappa}")));
    }
    let scan = Scan::run(opts.samples, |i| {
        let (g, g0, probes) = mean_value_sample(cfg, c0, kappa, opts.seed, i)?;
        let r = mean_value_ratio(&g, &g0, &probes, kappa, cfg).ok()?;
        Some((r, concat(&[&g, &g0])))
    });
    let mut scan = scan;
    scan.refine(opts.seed, 108, |i, x| {
        let t = split(x, 2).ok()?;
        let (_, _, probes) = mean_value_sample(cfg, c0, kappa, opts.seed, i)?;
        if kappa * rho(&t[0], &t[1]).ok()? >= c0 * hnorm(&t[1]) {
            return None;
        }
        Some((mean_value_ratio(&t[0], &t[1], &probes, kappa, cfg).ok()?, x.to_vec()))
    });
    let mut r = scan.report("mean_value", cfg, opts.seed);
    let drift = match scan.argsup() {
        Some(i) => {
            let (_, _, probes) = mean_value_sample(cfg, c0, kappa, opts.seed, i)
                .ok_or_else(|| Error::Consistency("arg-sup sample no longer evaluates".into()))?;
            let t = split(&scan.points[i], 2)?;
            let (g, g0) = (&t[0], &t[1]);
            dilation_drift(
                |s| mean_value_ratio(&dilate(&s, g)?, &dilate(&s, g0)?, &probes, kappa, cfg),
                scan.ratios[i],
            )
        }
        None => f64::INFINITY,
    };
    finish_scan(&mut r, &scan, drift, opts);
    r.params.insert("c0".into(), c0);
    r.params.insert("kappa".into(), kappa);
    Ok(r)
}

// ---------------------------------------------------------------- commutators

/// Vertical displacement of `flow_j(-s) ∘ flow_k(-s) ∘ flow_j(s) ∘ flow_k(s)`
/// divided by `s^2`, compared with `factor · b^α_{kj}` for all `k, j, α` in
/// the first quaternion block, at `s = 2^{-4} .. 2^{-10}`.
///
/// `sup` is the largest deviation at the smallest step; `order` is the
/// smallest observed decay rate of the deviation (reported as 99 when the
/// deviations vanish identically).
pub fn check_commutators(n: usize, factor: f64) -> Result<BoundReport> {
    let cfg = KernelConfig::new(n, 1.0)?;
    let base = GroupPoint::from_coords(
        &(0..3 + 4 * (n - 1)).map(|i| 0.25 * (i as f64 - 2.0)).collect::<Vec<_>>(),
    )?;
    let steps: Vec<f64> = (4..=10).map(|e| 2f64.powi(-e)).collect();
    let mut worst = 0.0f64;
    let mut arg = Vec::new();
    let mut order = f64::INFINITY;
    let mut limit = Vec::new();
    for k in 1..=4 {
        for j in 1..=4 {
            let mut errs = vec![0.0f64; steps.len()];
            let mut last = [0.0; 3];
            for (e, &s) in errs.iter_mut().zip(&steps) {
                let end = flow_commutator(0, k, j, &s, &base)?;
                let disp = (end.t - base.t).to_array();
                for a in 0..3 {
                    let got = disp[a] / (s * s);
                    *e = e.max((got - factor * b_entry(a + 1, k, j) as f64).abs());
                    last[a] = got;
                }
            }
            for a in 0..3 {
                let b = b_entry(a + 1, k, j) as f64;
                if b != 0.0 {
                    limit.push(last[a] / b);
                }
            }
            let e = *errs.last().expect("steps");
            if e > worst || arg.is_empty() {
                worst = worst.max(e);
                arg = vec![k as f64, j as f64];
            }
            for w in errs.windows(2) {
                if w[0] > 0.0 && w[1] > 0.0 {
                    order = order.min((w[0] / w[1]).log2());
                } else if w[0] > 0.0 || w[1] > 0.0 {
                    order = order.min(0.0);
                }
            }
        }
    }
    let observed = limit.iter().sum::<f64>() / limit.len() as f64;
    let order = if order.is_infinite() { 99.0 } else { order };
    let mut params = BTreeMap::new();
    params.insert("factor".into(), factor);
    params.insert("observed_factor".into(), observed);
    params.insert("order".into(), order);
    Ok(BoundReport {
        claim: "commutator".into(),
        n,
        c: cfg.c,
        samples: 16 * steps.len(),
        seed: 0,
        sup: worst,
        inf: worst,
        argsup: arg.clone(),
        arginf: arg,
        pass: worst <= 1e-8 && order >= 2.0,
        skipped: 0,
        params,
    })
}

// ---------------------------------------------------------------- lower bound

/// `g0 = (𝐢/√2, e_1/2^{1/4})`, a point of the unit sphere.
pub fn sphere_anchor(n: usize) -> GroupPoint {
    let mut y = HVector::zeros(n - 1);
    y.0[0] = Quaternion::real(2f64.powf(-0.25));
    GroupPoint::new(ImQuaternion::new(std::f64::consts::FRAC_1_SQRT_2, 0.0, 0.0), y)
}

/// `A = 4/(2i)^n · [4n - 1 - i + (-1)^n (i + 1)]`.
pub fn a_value(n: usize) -> Complex64 {
    let i = Complex64::i();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let bracket = Complex64::new(4.0 * n as f64 - 1.0, 0.0) - i + (i + 1.0) * sign;
    Complex64::new(4.0, 0.0) / (2.0 * i).powu(n as u32) * bracket
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ARow {
    pub n: usize,
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
}

pub fn a_table(ns: std::ops::RangeInclusive<usize>) -> Vec<ARow> {
    ns.map(|n| {
        let a = a_value(n);
        ARow {
            n,
            re: a.re,
            im: a.im,
            modulus: a.norm(),
        }
    })
    .collect()
}

/// `s(1 + 𝐢) = c (2n-2)!/16 · 𝐢 A`, read in the slice `ℝ ⊕ ℝ𝐢`.
pub fn predicted_s_one_plus_i(cfg: &KernelConfig) -> Quaternion {
    let f = cfg.c * (1..=(2 * cfg.n - 2) as u64).product::<u64>() as f64 / 16.0;
    let v = Complex64::i() * a_value(cfg.n) * f;
    Quaternion::new(v.re, v.im, 0.0, 0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Nonvanishing {
    pub g0: Vec<f64>,
    pub norm: f64,
    pub value: Quaternion,
    pub s_one_plus_i: Quaternion,
    pub predicted: Quaternion,
    /// `|K(g0) - 2^{Q/4} s(1 + 𝐢)| / |K(g0)|`.
    pub homogeneity_error: f64,
    pub a_table: Vec<ARow>,
}

pub fn unit_sphere_nonvanishing(cfg: &KernelConfig) -> Result<Nonvanishing> {
    cfg.validate()?;
    let g0 = sphere_anchor(cfg.n);
    let norm = hnorm(&g0);
    let value = kernel(&g0, cfg)?;
    let s11 = s_eval(&Quaternion::new(1.0, 1.0, 0.0, 0.0), cfg)?;
    let predicted = predicted_s_one_plus_i(cfg);
    let q = cfg.homogeneous_dimension() as f64;
    let homogeneity_error = rel(&value, &s11.scale(&2f64.powf(q / 4.0)));
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Consistency(format!("‖g0‖ = {norm}, expected 1")));
    }
    if value.modulus() < 1e-10 * cfg.c.abs() {
        return Err(Error::Consistency(format!("K(g0) = {value} vanishes")));
    }
    if rel(&s11, &predicted) > 1e-12 {
        return Err(Error::Consistency(format!(
            "s(1+i) = {s11} disagrees with the closed value {predicted}"
        )));
    }
    if homogeneity_error > 1e-12 {
        return Err(Error::Consistency(format!(
            "K(g0) and s(1+i) violate homogeneity by {homogeneity_error:e}"
        )));
    }
    Ok(Nonvanishing {
        g0: g0.coords(),
        norm,
        value,
        s_one_plus_i: s11,
        predicted,
        homogeneity_error,
        a_table: a_table(2..=10),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub gstar: Vec<f64>,
    pub value: Quaternion,
    pub rho: f64,
    /// `|K(g*^{-1} g)| R^Q`.
    pub scaled: f64,
    pub k_g0: f64,
}

fn witness_raw(g: &GroupPoint, big_r: f64, cfg: &KernelConfig) -> Result<Witness> {
    cfg.validate()?;
    if !(big_r > 0.0 && big_r.is_finite()) {
        return Err(Error::Argument(format!("R must be positive, got {big_r}")));
    }
    let g0 = sphere_anchor(cfg.n);
    let gstar = group_mul(g, &dilate(&big_r, &group_inv(&g0))?)?;
    let value = kernel(&group_mul(&group_inv(&gstar), g)?, cfg)?;
    let q = cfg.homogeneous_dimension() as i32;
    Ok(Witness {
        gstar: gstar.coords(),
        value,
        rho: rho(g, &gstar)?,
        scaled: value.modulus() * big_r.powi(q),
        k_g0: kernel(&g0, cfg)?.modulus(),
    })
}

/// `g* = g δ_R(g0^{-1})`, with `ρ(g, g*) = R` and `|K(g*^{-1} g)| R^Q = |K(g0)|`
/// asserted.
pub fn lower_bound_witness(g: &GroupPoint, big_r: f64, cfg: &KernelConfig) -> Result<Witness> {
    let w = witness_raw(g, big_r, cfg)?;
    if ((w.rho - big_r) / big_r).abs() > 1e-12 {
        return Err(Error::Consistency(format!("ρ(g, g*) = {}, expected {big_r}", w.rho)));
    }
    if ((w.scaled - w.k_g0) / w.k_g0).abs() > 1e-10 {
        return Err(Error::Consistency(format!(
            "|K(g*^-1 g)| R^Q = {}, expected |K(g0)| = {}",
            w.scaled, w.k_g0
        )));
    }
    Ok(w)
}

/// Relative deviation of `|K(g*^{-1} g)| R^Q` from `|K(g0)|` over Gaussian
/// `g` and `R` log-uniform in `[0.1, 10]`.
pub fn check_witness(cfg: &KernelConfig, samples: usize, seed: u64) -> Result<BoundReport> {
    cfg.validate()?;
    let scan = Scan::run(samples, |i| {
        let mut rng = stream(seed, 9, i);
        let g = gaussian_point(&mut rng, cfg.n);
        let big_r = log_uniform(&mut rng, 0.1, 10.0);
        let w = witness_raw(&g, big_r, cfg).ok()?;
        let dev = ((w.scaled - w.k_g0) / w.k_g0).abs().max(((w.rho - big_r) / big_r).abs());
        let mut p = g.coords();
        p.push(big_r);
        Some((dev, p))
    });
    let mut r = scan.report("lower_bound_witness", cfg, seed);
    r.pass = r.skipped == 0 && r.sup <= 1e-10;
    Ok(r)
}

const EPS_PROBES: usize = 256;

/// Largest `ε` (bisection on `(0, 1]`) with `|K(g̃)| > |K(g0)|/2` at every
/// probe `g̃` of the ball `B(g0, 2 C_ρ ε)`.
pub fn find_eps0(cfg: &KernelConfig, c_rho: f64, seed: u64) -> Result<f64> {
    let n = cfg.n;
    let g0 = sphere_anchor(n);
    let k0 = kernel(&g0, cfg)?.modulus();
    let probes: Vec<GroupPoint> = (0..EPS_PROBES)
        .map(|i| {
            let mut rng = stream(seed, 10, i);
            if i % 2 == 0 {
                sphere_point(&mut rng, n)
            } else {
                ball_point(&mut rng, n, 1.0)
            }
        })
        .collect();
    let holds = |eps: f64| -> bool {
        let radius = 2.0 * c_rho * eps;
        probes.iter().all(|u| {
            dilate(&radius, u)
                .and_then(|d| group_mul(&g0, &d))
                .and_then(|x| kernel(&x, cfg))
                .map(|k| k.modulus() > 0.5 * k0)
                .unwrap_or(false)
        })
    };
    let (mut lo, mut hi) = (1e-6, 1.0);
    if !holds(lo) {
        return Err(Error::Search(format!(
            "no radius down to {lo:e} keeps |K| above half of |K(g0)| = {k0:e}"
        )));
    }
    if holds(hi) {
        return Ok(hi);
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Pairs `g1 ∈ B(g, r)`, `g2 ∈ B(g δ_{Rr}(g0^{-1}), r)` with `R = 0.9/ε0`
/// (so `1/(2ε0) < R < 1/ε0`); reports `inf |K(g2^{-1} g1)| ρ(g1, g2)^Q`.
pub fn ball_pair_lower_bound(
    g: &GroupPoint,
    r: f64,
    cfg: &KernelConfig,
    samples: usize,
    seed: u64,
) -> Result<BoundReport> {
    cfg.validate()?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Argument(format!("r must be positive, got {r}")));
    }
    let n = cfg.n;
    let c_rho = quasi_triangle_constant(n, 2000, seed)?;
    let eps0 = find_eps0(cfg, c_rho, seed)?;
    let big_r = 0.9 / eps0;
    let gstar = group_mul(g, &dilate(&(big_r * r), &group_inv(&sphere_anchor(n)))?)?;
    let q = cfg.homogeneous_dimension() as i32;
    let scan = Scan::run(samples, |i| {
        let mut rng = stream(seed, 11, i);
        let u1 = ball_point(&mut rng, n, 1.0);
        let u2 = ball_point(&mut rng, n, 1.0);
        let g1 = group_mul(g, &dilate(&r, &u1).ok()?).ok()?;
        let g2 = group_mul(&gstar, &dilate(&r, &u2).ok()?).ok()?;
        let k = kernel(&group_mul(&group_inv(&g2), &g1).ok()?, cfg).ok()?;
        Some((k.modulus() * rho(&g1, &g2).ok()?.powi(q), concat(&[&g1, &g2])))
    });
    let mut rep = scan.report("ball_pair_lower_bound", cfg, seed);
    rep.pass = rep.skipped == 0 && rep.inf > 0.0 && rep.sup.is_finite();
    rep.params.insert("c_rho".into(), c_rho);
    rep.params.insert("eps0".into(), eps0);
    rep.params.insert("R".into(), big_r);
    rep.params.insert("r".into(), r);
    rep.params.insert("k_g0".into(), kernel(&sphere_anchor(n), cfg)?.modulus());
    Ok(rep)
}

// ---------------------------------------------------------------- suite

/// Claim ids accepted by [`run_claim`].
pub const CLAIMS: &[&str] = &[
    "form_equivalence",
    "form_equivalence_exact",
    "homogeneity",
    "size_bound",
    "gradient_consistency",
    "gradient_bound",
    "regularity_ii",
    "regularity_iii",
    "mean_value",
    "unit_sphere_nonvanishing",
    "lower_bound_witness",
    "ball_pair_lower_bound",
    "commutator",
];

/// Samples used by claims whose cost per sample is much higher.
fn reduced(samples: usize, cap: usize) -> usize {
    samples.min(cap).max(1)
}

fn nonvanishing_report(cfg: &KernelConfig) -> BoundReport {
    let mut params = BTreeMap::new();
    let (sup, argsup, pass) = match unit_sphere_nonvanishing(cfg) {
        Ok(nv) => {
            params.insert("norm".into(), nv.norm);
            params.insert("homogeneity_error".into(), nv.homogeneity_error);
            let min_a = nv.a_table.iter().map(|r| r.modulus).fold(f64::INFINITY, f64::min);
            params.insert("min_abs_a".into(), min_a);
            (nv.value.modulus(), nv.g0, min_a > 0.0)
        }
        Err(_) => (f64::NAN, sphere_anchor(cfg.n).coords(), false),
    };
    BoundReport {
        claim: "unit_sphere_nonvanishing".into(),
        n: cfg.n,
        c: cfg.c,
        samples: 1,
        seed: 0,
        sup,
        inf: sup,
        argsup: argsup.clone(),
        arginf: argsup,
        pass,
        skipped: 0,
        params,
    }
}

pub fn run_claim(claim: &str, cfg: &KernelConfig, opts: &ScanOptions) -> Result<BoundReport> {
    let (samples, seed) = (opts.samples, opts.seed);
    match claim {
        "form_equivalence" => check_form_equivalence(cfg, samples, seed, 1e-9),
        "form_equivalence_exact" => check_form_equivalence_exact(cfg, reduced(samples, 100), seed),
        "homogeneity" => check_homogeneity(cfg, samples, seed),
        "size_bound" => scan_size_bound(cfg, opts),
        "gradient_consistency" => check_gradient_consistency(cfg, reduced(samples, 1000), seed),
        "gradient_bound" => scan_gradient_bound(cfg, opts),
        "regularity_ii" => check_regularity(cfg, DEFAULT_C_SEP, Regularity::First, opts),
        "regularity_iii" => check_regularity(cfg, DEFAULT_C_SEP, Regularity::Second, opts),
        "mean_value" => mean_value_check(cfg, DEFAULT_C0, DEFAULT_KAPPA, opts),
        "unit_sphere_nonvanishing" => Ok(nonvanishing_report(cfg)),
        "lower_bound_witness" => check_witness(cfg, reduced(samples, 1000), seed),
        "ball_pair_lower_bound" => {
            let g = gaussian_point(&mut stream(seed, 12, 0), cfg.n);
            ball_pair_lower_bound(&g, 1.0, cfg, samples, seed)
        }
        "commutator" => check_commutators(cfg.n, 2.0),
        other => Err(Error::Argument(format!(
            "unknown claim {other:?}; expected one of {}",
            CLAIMS.join(", ")
        ))),
    }
}

/// Every claim of the verification module (the commutator check belongs to
/// the group layer and is only run on request).
pub fn verify_all(cfg: &KernelConfig, opts: &ScanOptions) -> Result<Vec<BoundReport>> {
    CLAIMS
        .iter()
        .filter(|c| **c != "commutator")
        .map(|c| run_claim(c, cfg, opts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg2() -> KernelConfig {
        KernelConfig::new(2, 1.0).unwrap()
    }

    #[test]
    fn forms_agree_and_fault_is_caught() {
        let r = check_form_equivalence(&cfg2(), 500, 1, 1e-9).unwrap();
        assert!(r.pass, "{r:?}");
        fn broken(s: &Quaternion, c: &KernelConfig) -> Result<Quaternion> {
            Ok(s_sum_form(s, c)?.scale(&(1.0 + 1e-6)))
        }
        let bad = check_form_equivalence_with(&cfg2(), 50, 1, 1e-9, [s_sum_form, s_closed_form, broken]).unwrap();
        assert!(!bad.pass);
        assert_eq!(bad.argsup.len(), 4);
    }

    #[test]
    fn zero_constant_has_no_deviation() {
        let r = check_form_equivalence(&KernelConfig::new(3, 0.0).unwrap(), 100, 2, 1e-9).unwrap();
        assert_eq!(r.sup, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn homogeneity_and_fault() {
        assert!(check_homogeneity(&cfg2(), 300, 3).unwrap().pass);
        assert!(!check_homogeneity_with_exponent(&cfg2(), 300, 3, 9.0).unwrap().pass);
    }

    #[test]
    fn size_scan_contains_anchor() {
        let r = scan_size_bound(&cfg2(), &ScanOptions::new(400, 5)).unwrap();
        // |K((i, 0))| = 4 on the unit sphere
        assert!(r.sup >= 4.0 - 1e-12);
        assert!(r.params["drift"] <= 1e-10);
    }

    #[test]
    fn gradient_exponent_fault_drifts() {
        let opts = ScanOptions::new(200, 4);
        let good = scan_gradient_bound(&cfg2(), &opts).unwrap();
        assert!(good.params["drift"] <= 1e-10);
        let bad = scan_gradient_bound_with_exponent(&cfg2(), &opts, 10.0).unwrap();
        assert!(!bad.pass);
    }

    #[test]
    fn commutator_limit_is_four_b() {
        let exact = check_commutators(2, 4.0).unwrap();
        assert!(exact.pass);
        assert!((exact.params["observed_factor"] - 4.0).abs() < 1e-12);
        assert!(!check_commutators(2, 2.0).unwrap().pass);
    }

    #[test]
    fn a_values() {
        assert!((a_value(2) - Complex64::new(-8.0, 0.0)).norm() < 1e-14);
        assert!(a_table(2..=10).iter().all(|r| r.modulus > 0.0));
    }

    #[test]
    fn step_one_point() {
        for n in 2..=5 {
            let nv = unit_sphere_nonvanishing(&KernelConfig::new(n, 1.0).unwrap()).unwrap();
            assert!((nv.norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn witness_identity() {
        let cfg = cfg2();
        let w = lower_bound_witness(&GroupPoint::identity(2), 1.0, &cfg).unwrap();
        let inv = group_inv(&sphere_anchor(2));
        assert!(w.gstar.iter().zip(inv.coords()).all(|(a, b)| (a - b).abs() < 1e-15));
        assert!(lower_bound_witness(&GroupPoint::identity(2), 0.0, &cfg).is_err());
    }

    #[test]
    fn unknown_claim() {
        assert!(run_claim("nope", &cfg2(), &ScanOptions::new(1, 0)).is_err());
    }
}
