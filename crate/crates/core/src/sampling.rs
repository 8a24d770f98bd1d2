//! Seeded sampling. Every sample index owns its own ChaCha stream, so a scan
//! over `N` samples is a prefix of the scan over `2N` and the values never
//! depend on how the work is split across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::heisenberg::{dilate, hnorm, GroupPoint};
use crate::quaternion::Quaternion;

pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn gaussian_point<R: Rng>(rng: &mut R, n: usize) -> GroupPoint {
    let coords: Vec<f64> = (0..3 + 4 * (n - 1))
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    GroupPoint::from_coords(&coords).expect("valid dimension")
}

/// A point with `‖g‖ = 1`, obtained by dilating a Gaussian draw.
pub fn sphere_point<R: Rng>(rng: &mut R, n: usize) -> GroupPoint {
    loop {
        let g = gaussian_point(rng, n);
        let r = hnorm(&g);
        if r > 1e-12 {
            return dilate(&(1.0 / r), &g).expect("positive factor");
        }
    }
}

/// A point of the homogeneous ball `‖u‖ ≤ radius`, radial profile `r^{Q-1}`.
pub fn ball_point<R: Rng>(rng: &mut R, n: usize, radius: f64) -> GroupPoint {
    let q = (4 * n + 2) as f64;
    let s = sphere_point(rng, n);
    let r = radius * rng.gen::<f64>().powf(1.0 / q);
    if r <= 0.0 {
        return GroupPoint::identity(n);
    }
    dilate(&r, &s).expect("positive factor")
}

pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.gen::<f64>() * (hi.ln() - lo.ln())).exp()
}

/// Uniformly distributed unit quaternion.
pub fn unit_quaternion<R: Rng>(rng: &mut R) -> Quaternion {
    loop {
        let q = Quaternion::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        let m = q.modulus();
        if m > 1e-12 {
            return q.scale(&(1.0 / m));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let a = gaussian_point(&mut sample_rng(7, 3), 2);
        let b = gaussian_point(&mut sample_rng(7, 3), 2);
        let c = gaussian_point(&mut sample_rng(7, 4), 2);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sphere_and_ball() {
        let mut rng = sample_rng(1, 0);
        for _ in 0..100 {
            let s = sphere_point(&mut rng, 3);
            assert!((hnorm(&s) - 1.0).abs() < 1e-12);
            let b = ball_point(&mut rng, 3, 0.5);
            assert!(hnorm(&b) <= 0.5 + 1e-12);
        }
    }
}
