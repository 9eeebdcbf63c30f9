//! Inputs shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rtd_core::PointCloud;

/// `n` uniform points in the unit cube of dimension `d`.
pub fn uniform_cloud(n: usize, d: usize, seed: u64) -> PointCloud {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| r.random::<f64>()).collect()).collect();
    PointCloud::from_rows(&rows).expect("finite points")
}
