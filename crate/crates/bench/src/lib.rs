//! Shared fixtures for the criterion benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hausloc_core::geometry::{GridSpec, Point, PointSet};
use hausloc_core::loss::ProbMap;

/// Deterministic random map on an `size`×`size` grid.
pub fn random_map(size: usize, seed: u64) -> ProbMap {
    let grid = GridSpec::new(size, size).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.num_pixels())
        .map(|_| rng.random_range(0.0..=1.0))
        .collect();
    ProbMap::new(grid, values).unwrap()
}

/// Deterministic random point set inside an `size`×`size` grid.
pub fn random_points(size: usize, count: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hi = (size - 1) as f64;
    (0..count)
        .map(|_| Point::new(rng.random_range(0.0..hi), rng.random_range(0.0..hi)).unwrap())
        .collect()
}
