//! Discretized Cauchy–Szegő projection `(f * K)(g) = ∫ f(h) K(h^{-1} g) dh`
//! as a truncated principal-value lattice sum.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::heisenberg::{group_inv, group_mul, group_to_boundary, GroupPoint, SiegelPoint};
use crate::kernel::{kernel, kernel_eps, s_eval, s_two_point, KernelConfig};
use crate::lattice::{key_of, lattice, lattice_full, shell_counts, LatticeKey, LatticePoint, LatticeSpec};
use crate::quaternion::Quaternion;
use crate::reduce::{par_map, par_sum, Neumaier, QuaternionSum};
use crate::sampling::sample_rng;

/// Quaternion samples of a function on the grid `(ht ℤ^3) × (hy ℤ^{4(n-1)})`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    pub n: usize,
    pub hy: f64,
    pub ht: f64,
    values: BTreeMap<LatticeKey, Quaternion>,
}

impl SampledFunction {
    pub fn new(n: usize, hy: f64, ht: f64) -> Result<Self> {
        if n < 2 || !(hy > 0.0 && ht > 0.0 && hy.is_finite() && ht.is_finite()) {
            return Err(Error::Argument(format!(
                "invalid sampling grid: n={n}, hy={hy}, ht={ht}"
            )));
        }
        Ok(SampledFunction {
            n,
            hy,
            ht,
            values: BTreeMap::new(),
        })
    }

    /// Samples of `f` at the given grid points.
    pub fn tabulate<F>(n: usize, hy: f64, ht: f64, points: &[GroupPoint], f: F) -> Result<Self>
    where
        F: Fn(&GroupPoint) -> Quaternion,
    {
        let mut out = SampledFunction::new(n, hy, ht)?;
        for p in points {
            out.insert(p, f(p))?;
        }
        Ok(out)
    }

    pub fn insert(&mut self, g: &GroupPoint, value: Quaternion) -> Result<()> {
        if g.dim_n() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: g.dim_n(),
            });
        }
        if !value.is_finite() {
            return Err(Error::Input(format!("non-finite sample at {:?}", g.coords())));
        }
        let key = key_of(g, self.hy, self.ht)
            .ok_or_else(|| Error::Input(format!("{:?} is not a grid point", g.coords())))?;
        self.values.insert(key, value);
        Ok(())
    }

    pub fn get(&self, g: &GroupPoint) -> Option<Quaternion> {
        key_of(g, self.hy, self.ht).and_then(|k| self.values.get(&k).copied())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point_of(&self, key: &LatticeKey) -> GroupPoint {
        let coords: Vec<f64> = key
            .iter()
            .enumerate()
            .map(|(i, &k)| k as f64 * if i < 3 { self.ht } else { self.hy })
            .collect();
        GroupPoint::from_coords(&coords).expect("valid key")
    }

    /// `(point, value)` pairs in key order.
    pub fn iter(&self) -> impl Iterator<Item = (GroupPoint, Quaternion)> + '_ {
        self.values.iter().map(|(k, v)| (self.point_of(k), *v))
    }

    /// `α f + β g` on the union of the two supports.
    pub fn combine(&self, alpha: f64, other: &SampledFunction, beta: f64) -> Result<Self> {
        if self.n != other.n || self.hy != other.hy || self.ht != other.ht {
            return Err(Error::Input("functions are sampled on different grids".into()));
        }
        let mut out = self.clone();
        for v in out.values.values_mut() {
            *v = v.scale(&alpha);
        }
        for (k, v) in &other.values {
            let e = out.values.entry(k.clone()).or_insert_with(Quaternion::zero);
            *e = *e + v.scale(&beta);
        }
        Ok(out)
    }

    /// CSV with header `t1,t2,t3,y1..y_{4(n-1)},f1,f2,f3,f4`.
    pub fn read_csv<R: Read>(reader: R, hy: f64, ht: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| Error::Parse {
                line: 1,
                message: e.to_string(),
            })?
            .clone();
        let cols = header.len();
        if cols < 11 || (cols - 7) % 4 != 0 {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected 3 + 4(n-1) + 4 columns, found {cols}"),
            });
        }
        let n = (cols - 7) / 4 + 1;
        let expected = sample_header(n);
        if header.iter().collect::<Vec<_>>() != expected.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(Error::Parse {
                line: 1,
                message: format!("header must be {}", expected.join(",")),
            });
        }
        let mut out = SampledFunction::new(n, hy, ht)?;
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse {
                line: e.position().map(|p| p.line() as usize).unwrap_or(0),
                message: e.to_string(),
            })?;
            let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
            let vals = parse_row(&rec, line)?;
            let g = GroupPoint::from_coords(&vals[..cols - 4]).map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            let v = Quaternion::new(vals[cols - 4], vals[cols - 3], vals[cols - 2], vals[cols - 1]);
            out.insert(&g, v).map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
        }
        Ok(out)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Io(e.to_string());
        wtr.write_record(sample_header(self.n)).map_err(io)?;
        for (g, v) in self.iter() {
            let row: Vec<String> = g
                .coords()
                .into_iter()
                .chain(v.to_array())
                .map(crate::io::fmt_f64)
                .collect();
            wtr.write_record(&row).map_err(io)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub(crate) fn parse_row(rec: &csv::StringRecord, line: usize) -> Result<Vec<f64>> {
    rec.iter()
        .map(|s| {
            s.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("not a number: {s:?}"),
            })
        })
        .collect()
}

/// Coordinate column names `t1,t2,t3,y1..y_{4(n-1)}`.
pub fn point_header(n: usize) -> Vec<String> {
    let mut h: Vec<String> = (1..=3).map(|i| format!("t{i}")).collect();
    h.extend((1..=4 * (n - 1)).map(|i| format!("y{i}")));
    h
}

fn sample_header(n: usize) -> Vec<String> {
    let mut h = point_header(n);
    h.extend((1..=4).map(|i| format!("f{i}")));
    h
}

/// Lattice offsets `v` with precomputed kernel values `K(v^{-1})`, in
/// summation order.
#[derive(Clone, Debug)]
pub struct ConvolutionPlan {
    pub spec: LatticeSpec,
    pub cfg: KernelConfig,
    pub weight: f64,
    offsets: Vec<(GroupPoint, Quaternion)>,
}

impl ConvolutionPlan {
    /// Principal-value plan: offsets with `exclusion ≤ ‖v‖ ≤ radius`.
    pub fn new(spec: &LatticeSpec, cfg: &KernelConfig) -> Result<Self> {
        cfg.validate()?;
        let pts = lattice(spec, cfg.n)?;
        Self::build(spec, cfg, pts, |v| kernel(&group_inv(v), cfg))
    }

    /// Regularized plan with `K_ε` over the full ball (no exclusion).
    pub fn regularized(spec: &LatticeSpec, cfg: &KernelConfig, eps: f64) -> Result<Self> {
        cfg.validate()?;
        if !(eps > 0.0) {
            return Err(Error::Argument(format!("ε must be positive, got {eps}")));
        }
        let pts = lattice_full(spec, cfg.n)?;
        Self::build(spec, cfg, pts, |v| kernel_eps(&group_inv(v), &eps, cfg))
    }

    fn build<F>(spec: &LatticeSpec, cfg: &KernelConfig, pts: Vec<LatticePoint>, k: F) -> Result<Self>
    where
        F: Fn(&GroupPoint) -> Result<Quaternion> + Sync + Send,
    {
        if pts.is_empty() {
            return Err(Error::Quadrature(format!(
                "no lattice point with {} <= norm <= {}",
                spec.exclusion, spec.radius
            )));
        }
        let vals = par_map(pts.len(), |i| k(&pts[i].point));
        let mut offsets = Vec::with_capacity(pts.len());
        for (p, v) in pts.into_iter().zip(vals) {
            offsets.push((p.point, v?));
        }
        Ok(ConvolutionPlan {
            spec: *spec,
            cfg: *cfg,
            weight: spec.weight(cfg.n),
            offsets,
        })
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    fn sample(&self, f: &SampledFunction, g: &GroupPoint, v: &GroupPoint) -> Result<Quaternion> {
        let h = group_mul(g, v)?;
        f.get(&h)
            .ok_or_else(|| Error::Input(format!("missing sample at {:?}", h.coords())))
    }

    fn check(&self, f: &SampledFunction, g: &GroupPoint) -> Result<()> {
        if f.n != self.cfg.n || g.dim_n() != self.cfg.n {
            return Err(Error::Dimension {
                expected: self.cfg.n,
                found: if f.n != self.cfg.n { f.n } else { g.dim_n() },
            });
        }
        if f.hy != self.spec.hy || f.ht != self.spec.ht {
            return Err(Error::Input(format!(
                "samples use spacing (hy={}, ht={}), lattice uses (hy={}, ht={})",
                f.hy, f.ht, self.spec.hy, self.spec.ht
            )));
        }
        Ok(())
    }

    /// `Σ_v f(g v) K(v^{-1}) w`, i.e. `Σ_h f(h) K(h^{-1} g) w` with `h = g v`.
    pub fn apply(&self, f: &SampledFunction, g: &GroupPoint) -> Result<Quaternion> {
        self.check(f, g)?;
        let w = self.weight;
        par_sum(self.offsets.len(), |i| {
            let (v, k) = &self.offsets[i];
            Ok((self.sample(f, g, v)? * *k).scale(&w))
        })
    }

    /// The same sum with the factors swapped, `K(h^{-1} g) f(h)`. Only for
    /// demonstrating that the order matters.
    pub fn apply_reversed(&self, f: &SampledFunction, g: &GroupPoint) -> Result<Quaternion> {
        self.check(f, g)?;
        let w = self.weight;
        par_sum(self.offsets.len(), |i| {
            let (v, k) = &self.offsets[i];
            Ok((*k * self.sample(f, g, v)?).scale(&w))
        })
    }
}

pub fn project(f: &SampledFunction, g: &GroupPoint, spec: &LatticeSpec, cfg: &KernelConfig) -> Result<Quaternion> {
    ConvolutionPlan::new(spec, cfg)?.apply(f, g)
}

pub fn project_eps(
    f: &SampledFunction,
    g: &GroupPoint,
    eps: f64,
    spec: &LatticeSpec,
    cfg: &KernelConfig,
) -> Result<Quaternion> {
    ConvolutionPlan::regularized(spec, cfg, eps)?.apply(f, g)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReproduceMethod {
    /// Direct sum over every lattice point.
    Dense,
    /// Sum over `(|y|^2, |t|^2)` shells weighted by representation counts.
    Radial,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReproduceReport {
    pub approx: Quaternion,
    pub exact: Quaternion,
    pub rel_err: f64,
    pub points: u64,
    /// Contribution of the outer shell `radius/2 ≤ ‖h‖ ≤ radius`.
    pub tail: Quaternion,
    pub method: ReproduceMethod,
    pub warning: Option<String>,
}

/// Relative size of the outer shell above which the truncation is flagged.
pub const TAIL_WARNING: f64 = 1e-2;

/// `Σ_h S(q, ξ_h) S(ξ_h, p0) w` against `S(q, p0)`, where `ξ_h` is the
/// boundary point of `h` and the sum runs over the lattice of `spec`.
///
/// Uses the shell reduction when `q' = p0' = 0` and `q1`, `p0_1` are real,
/// where the integrand only depends on `|y|^2` and `|t|`.
pub fn reproduce_check(
    p0: &SiegelPoint,
    q: &SiegelPoint,
    spec: &LatticeSpec,
    cfg: &KernelConfig,
) -> Result<ReproduceReport> {
    if radial_eligible(p0, q) {
        reproduce_check_radial(p0, q, spec, cfg)
    } else {
        reproduce_check_dense(p0, q, spec, cfg)
    }
}

fn radial_eligible(p0: &SiegelPoint, q: &SiegelPoint) -> bool {
    let flat = |p: &SiegelPoint| p.qprime.norm_sqr() == 0.0 && p.q1.im().norm_sqr() == 0.0;
    flat(p0) && flat(q)
}

fn check_interior(p0: &SiegelPoint, q: &SiegelPoint, spec: &LatticeSpec, cfg: &KernelConfig) -> Result<f64> {
    cfg.validate()?;
    spec.validate()?;
    for p in [p0, q] {
        if p.dim_n() != cfg.n {
            return Err(Error::Dimension {
                expected: cfg.n,
                found: p.dim_n(),
            });
        }
        if !(p.defect() > 0.0) {
            return Err(Error::Argument(format!(
                "reproducing check needs interior points, got Re q1 - |q'|^2 = {}",
                p.defect()
            )));
        }
    }
    Ok(spec.radius / 2.0)
}

fn finish(
    approx: Quaternion,
    tail: Quaternion,
    exact: Quaternion,
    points: u64,
    method: ReproduceMethod,
) -> ReproduceReport {
    let rel_err = (approx - exact).modulus() / exact.modulus();
    let ratio = tail.modulus() / exact.modulus();
    let warning = (ratio > TAIL_WARNING).then(|| {
        format!("outer shell carries {ratio:.3e} of |S(q, p0)|; radius is too small for this depth")
    });
    ReproduceReport {
        approx,
        exact,
        rel_err,
        points,
        tail,
        method,
        warning,
    }
}

pub fn reproduce_check_dense(
    p0: &SiegelPoint,
    q: &SiegelPoint,
    spec: &LatticeSpec,
    cfg: &KernelConfig,
) -> Result<ReproduceReport> {
    let half = check_interior(p0, q, spec, cfg)?;
    let pts = lattice(spec, cfg.n)?;
    let w = spec.weight(cfg.n);
    let split = pts.partition_point(|p| p.norm < half);
    let term = |i: usize| -> Result<Quaternion> {
        let xi = group_to_boundary(&pts[i].point);
        Ok((s_two_point(q, &xi, cfg)? * s_two_point(&xi, p0, cfg)?).scale(&w))
    };
    let inner = par_sum(split, term)?;
    let tail = par_sum(pts.len() - split, |i| term(split + i))?;
    let mut total = QuaternionSum::default();
    total.add(&inner);
    total.add(&tail);
    let exact = s_two_point(q, p0, cfg)?;
    Ok(finish(total.value(), tail, exact, pts.len() as u64, ReproduceMethod::Dense))
}

pub fn reproduce_check_radial(
    p0: &SiegelPoint,
    q: &SiegelPoint,
    spec: &LatticeSpec,
    cfg: &KernelConfig,
) -> Result<ReproduceReport> {
    let half = check_interior(p0, q, spec, cfg)?;
    if !radial_eligible(p0, q) {
        return Err(Error::Argument(
            "shell reduction needs q' = p0' = 0 and real first coordinates".into(),
        ));
    }
    let n = cfg.n;
    let (a0, b0) = (q.q1.x1, p0.q1.x1);
    let r4 = spec.radius.powi(4);
    let (hy, ht) = (spec.hy, spec.ht);
    let mmax = (spec.radius / hy).powi(2).floor() as usize + 1;
    let kmax = (spec.radius * spec.radius / ht).powi(2).floor() as usize + 1;
    let cy = shell_counts(4 * (n - 1), mmax);
    let ct = shell_counts(3, kmax);
    let w = spec.weight(n);

    // For t = τ u the product s(a - τu) s(b + τu) is A + B u; the u-part
    // cancels between antipodal points of a shell, so only Re survives.
    let rows = par_map(mmax + 1, |m| -> Result<(f64, f64, u64)> {
        if cy[m] == 0 {
            return Ok((0.0, 0.0, 0));
        }
        let y2 = hy * hy * m as f64;
        let y4 = y2 * y2;
        if y4 > r4 {
            return Ok((0.0, 0.0, 0));
        }
        let (mut all, mut tail) = (Neumaier::default(), Neumaier::default());
        let mut count = 0u64;
        for (k, &c) in ct.iter().enumerate() {
            let t2 = ht * ht * k as f64;
            if y4 + t2 > r4 {
                break;
            }
            if c == 0 {
                continue;
            }
            let norm = (y4 + t2).sqrt().sqrt();
            if norm < spec.exclusion {
                continue;
            }
            let tau = t2.sqrt();
            let left = s_eval(&Quaternion::new(a0 + y2, -tau, 0.0, 0.0), cfg)?;
            let right = s_eval(&Quaternion::new(y2 + b0, tau, 0.0, 0.0), cfg)?;
            let v = (left * right).x1 * c as f64;
            all.add(v);
            if norm >= half {
                tail.add(v);
            }
            count += c;
        }
        let cm = cy[m] as f64;
        Ok((all.value() * cm, tail.value() * cm, count * cy[m]))
    });
    let (mut all, mut tail) = (Neumaier::default(), Neumaier::default());
    let mut points = 0u64;
    for r in rows {
        let (a, t, c) = r?;
        all.add(a);
        tail.add(t);
        points += c;
    }
    let exact = s_two_point(q, p0, cfg)?;
    Ok(finish(
        Quaternion::real(all.value() * w),
        Quaternion::real(tail.value() * w),
        exact,
        points,
        ReproduceMethod::Radial,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatorNormReport {
    pub norm: f64,
    pub converged: bool,
    pub iterations: usize,
    pub points: usize,
    pub spec: LatticeSpec,
}

/// Largest lattice accepted by the dense operator-norm probe.
pub const MAX_NORM_POINTS: usize = 6000;

/// Power iteration for the discrete `L^2` norm of `f ↦ Σ_h f(h) K(h^{-1} g) w`
/// restricted to the grid points of the ball `‖g‖ ≤ radius`. The operator is
/// real-linear; its adjoint is `G ↦ Σ_g G(g) conj(K(h^{-1} g)) w`.
pub fn operator_norm_estimate(
    spec: &LatticeSpec,
    cfg: &KernelConfig,
    trials: usize,
    seed: u64,
) -> Result<OperatorNormReport> {
    use rand_distr::{Distribution, StandardNormal};

    if trials == 0 {
        return Err(Error::Argument("need at least one trial".into()));
    }
    cfg.validate()?;
    let pts = lattice_full(spec, cfg.n)?;
    let np = pts.len();
    if np > MAX_NORM_POINTS {
        return Err(Error::Argument(format!(
            "{np} lattice points exceed the dense probe limit {MAX_NORM_POINTS}"
        )));
    }
    let w = spec.weight(cfg.n);
    // rows[g] = [(h, K(h^{-1} g) w)]
    let rows = par_map(np, |gi| -> Result<Vec<(usize, Quaternion)>> {
        let mut row = Vec::new();
        for (hi, h) in pts.iter().enumerate() {
            let d = group_mul(&group_inv(&h.point), &pts[gi].point)?;
            let r = crate::heisenberg::hnorm(&d);
            if r >= spec.exclusion && r <= spec.radius {
                row.push((hi, kernel(&d, cfg)?.scale(&w)));
            }
        }
        Ok(row)
    });
    let rows: Vec<Vec<(usize, Quaternion)>> = rows.into_iter().collect::<Result<_>>()?;
    let mut cols: Vec<Vec<(usize, Quaternion)>> = vec![Vec::new(); np];
    for (gi, row) in rows.iter().enumerate() {
        for (hi, k) in row {
            cols[*hi].push((gi, k.conj()));
        }
    }
    let apply = |m: &[Vec<(usize, Quaternion)>], x: &[Quaternion]| -> Vec<Quaternion> {
        par_map(m.len(), |i| {
            let mut acc = QuaternionSum::default();
            for (j, k) in &m[i] {
                acc.add(&(x[*j] * *k));
            }
            acc.value()
        })
    };
    let norm = |x: &[Quaternion]| -> f64 {
        let mut acc = Neumaier::default();
        for q in x {
            acc.add(q.norm_sqr());
        }
        acc.value().sqrt()
    };

    let mut best = 0.0f64;
    let mut all_converged = true;
    let mut max_iter = 0;
    for trial in 0..trials {
        let mut rng = sample_rng(seed, trial as u64);
        let mut x: Vec<Quaternion> = (0..np)
            .map(|_| {
                let mut c = [0.0; 4];
                for v in c.iter_mut() {
                    *v = StandardNormal.sample(&mut rng);
                }
                Quaternion::from_array(c)
            })
            .collect();
        let nx = norm(&x);
        x.iter_mut().for_each(|q| *q = q.scale(&(1.0 / nx)));
        let mut est = 0.0;
        let mut converged = false;
        let mut it = 0;
        while it < 500 {
            it += 1;
            let ax = apply(&rows, &x);
            let next = norm(&ax);
            let back = apply(&cols, &ax);
            let nb = norm(&back);
            if nb == 0.0 || next == 0.0 {
                est = 0.0;
                converged = true;
                break;
            }
            let done = (next - est).abs() <= 1e-10 * next;
            est = next;
            x = back.into_iter().map(|q| q.scale(&(1.0 / nb))).collect();
            if done {
                converged = true;
                break;
            }
        }
        best = best.max(est);
        all_converged &= converged;
        max_iter = max_iter.max(it);
    }
    Ok(OperatorNormReport {
        norm: best,
        converged: all_converged,
        iterations: max_iter,
        points: np,
        spec: *spec,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quaternion::HVector;

    fn small() -> (LatticeSpec, KernelConfig) {
        (LatticeSpec::new(1.0, 0.5, 0.2).unwrap(), KernelConfig::new(2, 1.0).unwrap())
    }

    fn ball_function(spec: &LatticeSpec, radius: f64, f: impl Fn(&GroupPoint) -> Quaternion) -> SampledFunction {
        let big = LatticeSpec { radius, ..*spec };
        let pts: Vec<GroupPoint> = lattice_full(&big, 2).unwrap().into_iter().map(|p| p.point).collect();
        SampledFunction::tabulate(2, spec.hy, spec.ht, &pts, f).unwrap()
    }

    #[test]
    fn zero_function_projects_to_zero() {
        let (spec, cfg) = small();
        let f = ball_function(&spec, 1.0, |_| Quaternion::zero());
        let g = GroupPoint::identity(2);
        assert_eq!(project(&f, &g, &spec, &cfg).unwrap(), Quaternion::zero());
        assert_eq!(project_eps(&f, &g, 0.3, &spec, &cfg).unwrap(), Quaternion::zero());
    }

    #[test]
    fn missing_samples_are_input_errors() {
        let (spec, cfg) = small();
        let f = ball_function(&spec, 0.6, |_| Quaternion::one());
        let r = project(&f, &GroupPoint::identity(2), &spec, &cfg);
        assert!(matches!(r, Err(Error::Input(_))));
    }

    #[test]
    fn empty_shell_is_quadrature_error() {
        let spec = LatticeSpec {
            radius: 0.95,
            hy: 1.0,
            ht: 1.0,
            exclusion: 0.9,
        };
        let f = SampledFunction::new(2, 1.0, 1.0).unwrap();
        let r = project(&f, &GroupPoint::identity(2), &spec, &KernelConfig::new(2, 1.0).unwrap());
        assert!(matches!(r, Err(Error::Quadrature(_))));
    }

    #[test]
    fn order_of_factors_matters() {
        let (spec, cfg) = small();
        let f = ball_function(&spec, 1.0, |g| Quaternion::new(1.0, 0.0, g.t.t1, 0.0));
        let plan = ConvolutionPlan::new(&spec, &cfg).unwrap();
        let g = GroupPoint::identity(2);
        let a = plan.apply(&f, &g).unwrap();
        let b = plan.apply_reversed(&f, &g).unwrap();
        assert!((a - b).modulus() > 1e-6 * a.modulus());
    }

    #[test]
    fn csv_round_trip() {
        let (spec, _) = small();
        let f = ball_function(&spec, 0.8, |g| Quaternion::new(g.t.t1, 1.0 / 3.0, -0.1, g.y.0[0].x4));
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = SampledFunction::read_csv(buf.as_slice(), spec.hy, spec.ht).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let text = "t1,t2,t3,y1,y2,y3,y4,f1,f2,f3,f4\n0,0,0,0,0,0,0,1,0,0,0\n0,0,x,0,0,0,0,1,0,0,0\n";
        match SampledFunction::read_csv(text.as_bytes(), 0.5, 0.25) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let off = "t1,t2,t3,y1,y2,y3,y4,f1,f2,f3,f4\n0,0,0,0.3,0,0,0,1,0,0,0\n";
        assert!(matches!(
            SampledFunction::read_csv(off.as_bytes(), 0.5, 0.25),
            Err(Error::Parse { line: 2, .. })
        ));
        let bad = "a,b\n1,2\n";
        assert!(matches!(
            SampledFunction::read_csv(bad.as_bytes(), 0.5, 0.25),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn radial_and_dense_agree() {
        let spec = LatticeSpec::new(1.5, 0.5, 0.1).unwrap();
        let cfg = KernelConfig::reproducing(2).unwrap();
        let p = SiegelPoint::new(Quaternion::real(2.0), HVector::zeros(1));
        let q = SiegelPoint::new(Quaternion::real(1.5), HVector::zeros(1));
        let d = reproduce_check_dense(&p, &q, &spec, &cfg).unwrap();
        let r = reproduce_check_radial(&p, &q, &spec, &cfg).unwrap();
        assert_eq!(d.points, r.points);
        assert!((d.approx - r.approx).modulus() < 1e-12 * d.approx.modulus());
        assert!((d.tail - r.tail).modulus() < 1e-12 * d.approx.modulus());
    }

    #[test]
    fn reproduce_rejects_boundary_points() {
        let (spec, cfg) = small();
        let p = SiegelPoint::new(Quaternion::zero(), HVector::zeros(1));
        let q = SiegelPoint::new(Quaternion::real(1.0), HVector::zeros(1));
        assert!(reproduce_check(&p, &q, &spec, &cfg).is_err());
    }

    #[test]
    fn operator_norm_scales_with_c() {
        let spec = LatticeSpec::new(0.8, 0.5, 0.2).unwrap();
        let a = operator_norm_estimate(&spec, &KernelConfig::new(2, 1.0).unwrap(), 1, 3).unwrap();
        let b = operator_norm_estimate(&spec, &KernelConfig::new(2, -3.0).unwrap(), 1, 3).unwrap();
        let z = operator_norm_estimate(&spec, &KernelConfig::new(2, 0.0).unwrap(), 1, 3).unwrap();
        assert!(a.norm > 0.0 && a.converged);
        assert!((b.norm - 3.0 * a.norm).abs() < 1e-6 * b.norm);
        assert_eq!(z.norm, 0.0);
    }
}
