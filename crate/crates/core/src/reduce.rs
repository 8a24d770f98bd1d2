//! Deterministic parallel maps and sums.
//!
//! Work is cut into fixed-size chunks independent of the thread count. Each
//! chunk is summed sequentially with Neumaier compensation and the chunk
//! totals are folded in chunk order, so results are bit-identical whatever
//! the pool size.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::Result;
use crate::quaternion::Quaternion;

pub const CHUNK: usize = 1024;

/// Compensated accumulator for one real component.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct QuaternionSum([Neumaier; 4]);

impl QuaternionSum {
    pub fn add(&mut self, q: &Quaternion) {
        for (acc, v) in self.0.iter_mut().zip(q.to_array()) {
            acc.add(v);
        }
    }

    pub fn value(&self) -> Quaternion {
        Quaternion::new(self.0[0].value(), self.0[1].value(), self.0[2].value(), self.0[3].value())
    }
}

/// `f(0), ..., f(len-1)` in index order.
pub fn par_map<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// `Σ_i f(i)` with the fixed chunking described above. The first error in
/// index order wins.
pub fn par_sum<F>(len: usize, f: F) -> Result<Quaternion>
where
    F: Fn(usize) -> Result<Quaternion> + Sync + Send,
{
    let chunks = len.div_ceil(CHUNK);
    let partials = par_map(chunks, |c| -> Result<Quaternion> {
        let mut acc = QuaternionSum::default();
        for i in c * CHUNK..((c + 1) * CHUNK).min(len) {
            acc.add(&f(i)?);
        }
        Ok(acc.value())
    });
    let mut total = QuaternionSum::default();
    for p in partials {
        total.add(&p?);
    }
    Ok(total.value())
}

/// Index of the largest value (NaN skipped); ties go to the first index.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        match best {
            Some(b) if values[b] >= v => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Index of the smallest value; ties go to the first index.
pub fn argmin(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        match best {
            Some(b) if values[b] <= v => {}
            _ => best = Some(i),
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_beats_naive() {
        let mut acc = Neumaier::default();
        for v in [1.0, 1e100, 1.0, -1e100] {
            acc.add(v);
        }
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn chunked_sum_matches_sequential() {
        let len = 3 * CHUNK + 17;
        let s = par_sum(len, |i| Ok(Quaternion::new(i as f64, 1.0, 0.0, -(i as f64)))).unwrap();
        let n = len as f64;
        assert_eq!(s, Quaternion::new(n * (n - 1.0) / 2.0, n, 0.0, -n * (n - 1.0) / 2.0));
    }

    #[test]
    fn first_error_wins() {
        let r = par_sum(5000, |i| {
            if i == 1500 || i == 4000 {
                Err(crate::Error::Input(format!("bad {i}")))
            } else {
                Ok(Quaternion::zero())
            }
        });
        assert_eq!(r, Err(crate::Error::Input("bad 1500".into())));
    }

    #[test]
    fn ties_go_first() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, f64::NAN]), Some(1));
        assert_eq!(argmin(&[2.0, 0.5, 0.5]), Some(1));
        assert_eq!(argmax(&[]), None);
    }
}
