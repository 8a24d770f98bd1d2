//! Anisotropic grids on `ℋ^{n-1}` for quadrature.
//!
//! Points are `(ht·a, hy·b)` for integer vectors `a ∈ ℤ^3`, `b ∈ ℤ^{4(n-1)}`,
//! restricted to a homogeneous shell `exclusion ≤ ‖g‖ ≤ radius`. Haar measure
//! is Lebesgue measure in these coordinates, so every point carries the cell
//! volume `ht^3 hy^{4(n-1)}`. The grid is symmetric under `g ↦ g^{-1}`, which
//! is what makes the principal-value sums cancel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heisenberg::{hnorm, GroupPoint};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LatticeSpec {
    pub radius: f64,
    pub hy: f64,
    pub ht: f64,
    pub exclusion: f64,
}

#[derive(Deserialize)]
struct LatticeSpecJson {
    radius: f64,
    hy: f64,
    ht: Option<f64>,
    exclusion: f64,
}

impl<'de> Deserialize<'de> for LatticeSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = LatticeSpecJson::deserialize(d)?;
        Ok(LatticeSpec {
            radius: raw.radius,
            hy: raw.hy,
            ht: raw.ht.unwrap_or(raw.hy * raw.hy),
            exclusion: raw.exclusion,
        })
    }
}

impl LatticeSpec {
    /// Vertical spacing defaults to `hy^2`, matching the dilation structure.
    pub fn new(radius: f64, hy: f64, exclusion: f64) -> Result<Self> {
        let spec = LatticeSpec {
            radius,
            hy,
            ht: hy * hy,
            exclusion,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_ht(mut self, ht: f64) -> Result<Self> {
        self.ht = ht;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.radius, self.hy, self.ht, self.exclusion]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.hy <= 0.0 || self.ht <= 0.0 {
            return Err(Error::Argument(format!(
                "lattice spacings must be positive and finite: hy={}, ht={}",
                self.hy, self.ht
            )));
        }
        if !(0.0 < self.exclusion && self.exclusion < self.radius) {
            return Err(Error::Argument(format!(
                "need 0 < exclusion < radius, got exclusion={}, radius={}",
                self.exclusion, self.radius
            )));
        }
        Ok(())
    }

    /// Cell volume `ht^3 hy^{4(n-1)}`.
    pub fn weight(&self, n: usize) -> f64 {
        self.ht.powi(3) * self.hy.powi(4 * (n as i32 - 1))
    }
}

/// Integer coordinates of a grid point: `[a1, a2, a3, b1, ..., b_{4(n-1)}]`.
pub type LatticeKey = Vec<i64>;

#[derive(Clone, Debug, PartialEq)]
pub struct LatticePoint {
    pub key: LatticeKey,
    pub point: GroupPoint,
    pub norm: f64,
}

/// Grid points with `spec.exclusion ≤ ‖g‖ ≤ spec.radius`, sorted by norm and
/// then lexicographically by key.
pub fn lattice(spec: &LatticeSpec, n: usize) -> Result<Vec<LatticePoint>> {
    spec.validate()?;
    Ok(enumerate(spec, n, spec.exclusion))
}

/// Same grid without the exclusion hole (the origin included).
pub fn lattice_full(spec: &LatticeSpec, n: usize) -> Result<Vec<LatticePoint>> {
    spec.validate()?;
    Ok(enumerate(spec, n, 0.0))
}

/// `(point, weight)` pairs in summation order.
pub fn lattice_weighted(spec: &LatticeSpec, n: usize) -> Result<Vec<(GroupPoint, f64)>> {
    let w = spec.weight(n);
    Ok(lattice(spec, n)?.into_iter().map(|p| (p.point, w)).collect())
}

fn enumerate(spec: &LatticeSpec, n: usize, inner: f64) -> Vec<LatticePoint> {
    assert!(n >= 2, "dimension n must be at least 2");
    let r4 = spec.radius.powi(4);
    let mut out = Vec::new();
    let hdim = 4 * (n - 1);
    let ymax = (spec.radius / spec.hy).floor() as i64;
    let ybound = ((spec.radius / spec.hy).powi(2)).floor() as i64 + 1;
    let mut ys: Vec<(Vec<i64>, i64)> = Vec::new();
    integer_ball(hdim, ymax, ybound, &mut Vec::new(), 0, &mut ys);
    for (b, bsq) in &ys {
        let y2 = spec.hy * spec.hy * *bsq as f64;
        let room = r4 - y2 * y2;
        if room < 0.0 {
            continue;
        }
        let tmax = (room.sqrt() / spec.ht).floor() as i64;
        let tbound = (room / (spec.ht * spec.ht)).floor() as i64 + 1;
        let mut ts = Vec::new();
        integer_ball(3, tmax, tbound, &mut Vec::new(), 0, &mut ts);
        for (a, asq) in ts {
            let t2 = spec.ht * spec.ht * asq as f64;
            if y2 * y2 + t2 > r4 {
                continue;
            }
            let mut key = a;
            key.extend_from_slice(b);
            let coords: Vec<f64> = key
                .iter()
                .enumerate()
                .map(|(i, &k)| k as f64 * if i < 3 { spec.ht } else { spec.hy })
                .collect();
            let point = GroupPoint::from_coords(&coords).expect("valid coordinates");
            let norm = hnorm(&point);
            if norm < inner {
                continue;
            }
            out.push(LatticePoint { key, point, norm });
        }
    }
    out.sort_by(|p, q| {
        p.norm
            .partial_cmp(&q.norm)
            .expect("finite norms")
            .then_with(|| p.key.cmp(&q.key))
    });
    out
}

/// All integer vectors of length `dim` with entries in `[-max, max]` and
/// squared length at most `bound`, paired with that squared length.
fn integer_ball(
    dim: usize,
    max: i64,
    bound: i64,
    prefix: &mut Vec<i64>,
    acc: i64,
    out: &mut Vec<(Vec<i64>, i64)>,
) {
    if prefix.len() == dim {
        out.push((prefix.clone(), acc));
        return;
    }
    for v in -max..=max {
        let next = acc + v * v;
        if next > bound {
            continue;
        }
        prefix.push(v);
        integer_ball(dim, max, bound, prefix, next, out);
        prefix.pop();
    }
}

/// `counts[m]` = number of `k ∈ ℤ^dim` with `|k|^2 = m`, for `m ≤ max_sq`.
pub fn shell_counts(dim: usize, max_sq: usize) -> Vec<u64> {
    let mut counts = vec![0u64; max_sq + 1];
    counts[0] = 1;
    let root = (max_sq as f64).sqrt().floor() as usize + 1;
    let squares: Vec<usize> = (0..=root).map(|v| v * v).filter(|&s| s <= max_sq).collect();
    for _ in 0..dim {
        let mut next = vec![0u64; max_sq + 1];
        for (m, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (v, &s) in squares.iter().enumerate() {
                if m + s > max_sq {
                    break;
                }
                next[m + s] += if v == 0 { c } else { 2 * c };
            }
        }
        counts = next;
    }
    counts
}

/// Grid key of `g`, or `None` when `g` is not a grid point of spacing `(hy, ht)`.
pub fn key_of(g: &GroupPoint, hy: f64, ht: f64) -> Option<LatticeKey> {
    g.coords()
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let h = if i < 3 { ht } else { hy };
            let k = (c / h).round();
            if (c - k * h).abs() <= 1e-9 * h.max(c.abs()) {
                Some(k as i64)
            } else {
                None
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::group_inv;

    #[test]
    fn spec_validation() {
        assert!(LatticeSpec::new(2.0, 0.5, 0.1).is_ok());
        assert!(LatticeSpec::new(2.0, 0.5, 0.0).is_err());
        assert!(LatticeSpec::new(2.0, 0.5, 2.0).is_err());
        assert!(LatticeSpec::new(2.0, -0.5, 0.1).is_err());
        assert_eq!(LatticeSpec::new(2.0, 0.5, 0.1).unwrap().ht, 0.25);
    }

    #[test]
    fn json_defaults_ht() {
        let s: LatticeSpec = serde_json::from_str(r#"{"radius":2,"hy":0.5,"exclusion":0.1}"#).unwrap();
        assert_eq!(s.ht, 0.25);
        let s: LatticeSpec =
            serde_json::from_str(r#"{"radius":2,"hy":0.5,"ht":0.3,"exclusion":0.1}"#).unwrap();
        assert_eq!(s.ht, 0.3);
    }

    #[test]
    fn grid_is_inverse_symmetric_and_sorted() {
        let spec = LatticeSpec::new(1.2, 0.5, 0.2).unwrap();
        let pts = lattice(&spec, 2).unwrap();
        assert!(!pts.is_empty());
        let keys: std::collections::HashSet<_> = pts.iter().map(|p| p.key.clone()).collect();
        for p in &pts {
            let inv = key_of(&group_inv(&p.point), spec.hy, spec.ht).unwrap();
            assert!(keys.contains(&inv));
            assert!(p.norm >= spec.exclusion && p.norm <= spec.radius);
        }
        assert!(pts.windows(2).all(|w| w[0].norm <= w[1].norm));
    }

    #[test]
    fn empty_shell() {
        // spacing 1 and shell (0.9, 0.95): no grid point has that norm
        let spec = LatticeSpec {
            radius: 0.95,
            hy: 1.0,
            ht: 1.0,
            exclusion: 0.9,
        };
        assert!(lattice(&spec, 2).unwrap().is_empty());
    }

    #[test]
    fn grid_matches_shell_counts() {
        // every (|b|^2, |a|^2) pair inside the ball, weighted by multiplicity
        let spec = LatticeSpec::new(1.5, 0.5, 0.1).unwrap();
        let pts = lattice_full(&spec, 2).unwrap();
        let cy = shell_counts(4, 9);
        let ct = shell_counts(3, 81);
        let mut expect = 0;
        for (m, &a) in cy.iter().enumerate() {
            for (k, &b) in ct.iter().enumerate() {
                let y2 = 0.25 * m as f64;
                if y2 * y2 + 0.0625 * k as f64 <= 1.5f64.powi(4) {
                    expect += a * b;
                }
            }
        }
        assert_eq!(pts.len() as u64, expect);
    }

    #[test]
    fn shell_counts_small() {
        // r_2: 1, 4, 4, 0, 4, 8 ; r_4(1) = 8, r_4(2) = 24
        assert_eq!(shell_counts(2, 5), vec![1, 4, 4, 0, 4, 8]);
        let c4 = shell_counts(4, 3);
        assert_eq!(c4, vec![1, 8, 24, 32]);
    }

    #[test]
    fn keys() {
        let g = GroupPoint::from_coords(&[0.5, -0.25, 0.0, 1.0, 0.0, -0.5, 1.5]).unwrap();
        assert_eq!(key_of(&g, 0.5, 0.25), Some(vec![2, -1, 0, 2, 0, -1, 3]));
        assert_eq!(key_of(&g, 0.4, 0.25), None);
    }
}
