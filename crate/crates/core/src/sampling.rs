//! Deterministic random points on the built-in models.

use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::kahler::{ChartPoint, ManifoldModel, ModelKind};
use crate::C64;

/// `count` points from a seeded generator. Projective points come from
/// Gaussian homogeneous coordinates placed in the dominant chart; flat and
/// custom points are Gaussian chart coordinates.
pub fn random_points(model: &ManifoldModel, count: usize, seed: u64) -> Vec<ChartPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = model.dim();
    let mut gauss = move || -> f64 { rng.sample(StandardNormal) };
    (0..count)
        .map(|_| match model.kind() {
            ModelKind::Projective { .. } => {
                let z: Vec<C64> = (0..=n).map(|_| C64::new(gauss(), gauss())).collect();
                model
                    .from_homogeneous(&z)
                    .expect("gaussian homogeneous coordinates are nonzero")
            }
            _ => ChartPoint::new(0, (0..n).map(|_| C64::new(gauss(), gauss()) * 0.7).collect()),
        })
        .collect()
}

/// Uniform samples in `[lo, hi)` from a seeded generator.
pub fn uniform(count: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.random_range(lo..hi)).collect()
}
