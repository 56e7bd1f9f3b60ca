//! Otsu's adaptive threshold over a 256-bin histogram of map values.

use crate::error::{Error, Result};
use crate::loss::ProbMap;

const BINS: usize = 256;

fn bin_of(value: f64) -> usize {
    ((value * BINS as f64) as usize).min(BINS - 1)
}

/// Returns the bin edge τ ∈ (0, 1) that maximizes the between-class
/// variance of the map values, using 256 uniform bins on `[0, 1]`.
/// Classes are split as `v < τ` versus `v ≥ τ`; ties prefer the lowest
/// edge. Fails with `DegenerateMap` when no edge separates two non-empty
/// classes.
pub fn otsu_threshold(map: &ProbMap) -> Result<f64> {
    let mut counts = [0u64; BINS];
    let mut sums = [0.0f64; BINS];
    for &v in map.values() {
        let b = bin_of(v);
        counts[b] += 1;
        sums[b] += v;
    }

    let total_count = map.values().len() as f64;
    let total_sum: f64 = sums.iter().sum();

    let mut best: Option<(f64, usize)> = None;
    let mut below_count = 0.0;
    let mut below_sum = 0.0;
    for k in 1..BINS {
        below_count += counts[k - 1] as f64;
        below_sum += sums[k - 1];
        let above_count = total_count - below_count;
        if below_count == 0.0 {
            continue;
        }
        if above_count == 0.0 {
            break;
        }
        let mean_below = below_sum / below_count;
        let mean_above = (total_sum - below_sum) / above_count;
        let diff = mean_below - mean_above;
        let score = below_count * above_count * diff * diff;
        if best.is_none_or(|(s, _)| score > s) {
            best = Some((score, k));
        }
    }

    match best {
        Some((_, k)) => Ok(k as f64 / BINS as f64),
        None => Err(Error::DegenerateMap),
    }
}
