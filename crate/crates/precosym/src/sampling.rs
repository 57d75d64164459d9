//! Reproducible point clouds around a chart point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` points `center + σ·N(0, I)`.
pub fn gaussian_cloud(center: &[f64], count: usize, sigma: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    (0..count).map(|_| perturb(&mut r, center, sigma)).collect()
}

pub fn perturb(r: &mut ChaCha8Rng, center: &[f64], sigma: f64) -> Vec<f64> {
    center
        .iter()
        .map(|&c| {
            let z: f64 = r.sample(StandardNormal);
            c + sigma * z
        })
        .collect()
}
