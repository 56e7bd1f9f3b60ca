//! Direct gradient-descent optimization of a probability map against a
//! fixed ground-truth point set, plus a synthetic scene generator.
//!
//! This is a desk-scale stand-in for network training: the map itself is
//! the parameter vector. Each step descends on the combined loss, with the
//! map mass `S` standing in for the count estimate (it is the only
//! differentiable count proxy available without a regression model).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{euclidean, GridSpec, Point, PointSet};
use crate::loss::{huber, DistanceCache, ProbMap, WhdParams};

/// Map values are kept inside `[CLAMP, 1 − CLAMP]` so power-mean
/// arguments stay in the smooth interior.
const CLAMP: f64 = 1e-4;

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Rows of pairwise distances are cached across iterations up to this
/// many entries (256 MB of f64); beyond that they are recomputed per step.
const MAX_CACHED_DISTANCES: usize = 32 << 20;

/// Total candidate draws before scene generation gives up.
const MAX_PLACEMENT_ATTEMPTS: usize = 100_000;

/// Hyperparameters of the direct map optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    /// Recorded for reproducibility of pipelines; the descent loop itself
    /// is deterministic and draws no random numbers.
    pub seed: u64,
    /// Adam-style adaptive moments instead of plain gradient descent.
    pub use_adam_moments: bool,
    /// Weight of the Huber count-regression term.
    pub mass_reg_weight: f64,
    /// Uniform initial activation, strictly inside (0, 1).
    pub init_value: f64,
}

impl OptimizerConfig {
    /// Plain gradient descent at the default step size.
    pub fn plain(iterations: usize) -> Self {
        Self {
            iterations,
            learning_rate: 0.05,
            seed: 0,
            use_adam_moments: false,
            mass_reg_weight: 1.0,
            init_value: 0.1,
        }
    }

    /// Adam-style moments at the default step size.
    pub fn adam(iterations: usize) -> Self {
        Self {
            learning_rate: 0.01,
            use_adam_moments: true,
            ..Self::plain(iterations)
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidParam {
                name: "learning_rate",
                reason: format!("must be positive and finite, got {}", self.learning_rate),
            });
        }
        if !(self.mass_reg_weight.is_finite() && self.mass_reg_weight >= 0.0) {
            return Err(Error::InvalidParam {
                name: "mass_reg_weight",
                reason: format!("must be non-negative and finite, got {}", self.mass_reg_weight),
            });
        }
        if !(self.init_value > 0.0 && self.init_value < 1.0) {
            return Err(Error::InvalidParam {
                name: "init_value",
                reason: format!("must lie strictly inside (0, 1), got {}", self.init_value),
            });
        }
        Ok(())
    }
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self::adam(2000)
    }
}

/// One row of the optimization trace. Losses are evaluated at the start of
/// the iteration, before its update is applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    /// Full objective: `term1 + term2 + regression`.
    pub total: f64,
    pub term1: f64,
    pub term2: f64,
    /// Weighted Huber count term.
    pub regression: f64,
    /// Map mass `S` (the count proxy).
    pub mass: f64,
}

/// Per-iteration loss history of one optimization run.
#[derive(Debug, Clone, Default)]
pub struct OptimizationTrace {
    records: Vec<TraceRecord>,
}

impl OptimizationTrace {
    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn first_total(&self) -> Option<f64> {
        self.records.first().map(|r| r.total)
    }

    pub fn final_total(&self) -> Option<f64> {
        self.records.last().map(|r| r.total)
    }

    /// Iteration and value of the lowest objective seen.
    pub fn best(&self) -> Option<(usize, f64)> {
        self.records
            .iter()
            .min_by(|a, b| a.total.total_cmp(&b.total))
            .map(|r| (r.iteration, r.total))
    }
}

/// Specification of a random synthetic scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneSpec {
    pub grid: GridSpec,
    pub num_points: usize,
    /// Minimum pairwise distance between placed points, in pixels.
    pub min_separation: f64,
    pub seed: u64,
}

/// Places `num_points` random points on the grid by rejection sampling,
/// keeping every pair at least `min_separation` apart. Deterministic per
/// seed. Points stay a small margin away from the border so that the mass
/// a blob needs can fit on the grid.
pub fn generate_scene(spec: &SceneSpec) -> Result<PointSet> {
    if spec.num_points == 0 {
        return Err(Error::InvalidParam {
            name: "num_points",
            reason: "at least one point is required".into(),
        });
    }
    if !(spec.min_separation.is_finite() && spec.min_separation >= 0.0) {
        return Err(Error::InvalidParam {
            name: "min_separation",
            reason: format!("must be non-negative and finite, got {}", spec.min_separation),
        });
    }

    let max_row = (spec.grid.height() - 1) as f64;
    let max_col = (spec.grid.width() - 1) as f64;
    let margin = if spec.grid.height().min(spec.grid.width()) >= 9 {
        2.0
    } else {
        0.0
    };

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut placed: Vec<Point> = Vec::with_capacity(spec.num_points);
    let mut attempts = 0;
    while placed.len() < spec.num_points {
        if attempts >= MAX_PLACEMENT_ATTEMPTS {
            return Err(Error::InfeasibleSpec {
                requested: spec.num_points,
                placed: placed.len(),
                attempts,
            });
        }
        attempts += 1;
        let candidate = Point::new(
            rng.random_range(margin..=(max_row - margin)),
            rng.random_range(margin..=(max_col - margin)),
        )?;
        if placed
            .iter()
            .all(|&p| euclidean(p, candidate) >= spec.min_separation)
        {
            placed.push(candidate);
        }
    }
    Ok(PointSet::new(placed))
}

/// Optimizes a probability map to localize `targets` by gradient descent
/// on the combined loss, using the map mass as the count estimate.
///
/// The map starts uniform at `cfg.init_value` and is clamped to
/// `[1e-4, 1 − 1e-4]` after every step. Requires power-mean mode. The
/// returned trace has exactly `cfg.iterations` records.
pub fn optimize_map(
    targets: &PointSet,
    grid: GridSpec,
    params: &WhdParams,
    cfg: &OptimizerConfig,
) -> Result<(ProbMap, OptimizationTrace)> {
    cfg.validate()?;
    let n = grid.num_pixels();
    let cache_rows = targets.len().saturating_mul(n) <= MAX_CACHED_DISTANCES;
    let cache = DistanceCache::new(grid, targets, params.scale(), cache_rows)?;

    let true_count = targets.len() as f64;
    let mut values = vec![cfg.init_value; n];
    let mut records = Vec::with_capacity(cfg.iterations);

    let mut moment1 = vec![0.0; n];
    let mut moment2 = vec![0.0; n];

    for iteration in 0..cfg.iterations {
        let breakdown = crate::loss::eval_whd(&values, params, &cache, true)?;
        let gradient = breakdown.gradient.as_deref().expect("gradient requested");

        let count_error = true_count - breakdown.mass;
        let regression = cfg.mass_reg_weight * huber(count_error);
        let total = breakdown.total + regression;
        if !total.is_finite() {
            return Err(Error::NonFiniteLoss { iteration });
        }
        records.push(TraceRecord {
            iteration,
            total,
            term1: breakdown.term1,
            term2: breakdown.term2,
            regression,
            mass: breakdown.mass,
        });

        // ∂/∂p_x of w·huber(C − S): the mass S sums every pixel once.
        let reg_gradient = -cfg.mass_reg_weight * crate::loss::huber_derivative(count_error);

        if cfg.use_adam_moments {
            let t = (iteration + 1) as i32;
            let bias1 = 1.0 - ADAM_BETA1.powi(t);
            let bias2 = 1.0 - ADAM_BETA2.powi(t);
            for i in 0..n {
                let g = gradient[i] + reg_gradient;
                moment1[i] = ADAM_BETA1 * moment1[i] + (1.0 - ADAM_BETA1) * g;
                moment2[i] = ADAM_BETA2 * moment2[i] + (1.0 - ADAM_BETA2) * g * g;
                let step = cfg.learning_rate * (moment1[i] / bias1)
                    / ((moment2[i] / bias2).sqrt() + ADAM_EPS);
                values[i] = (values[i] - step).clamp(CLAMP, 1.0 - CLAMP);
            }
        } else {
            for i in 0..n {
                let g = gradient[i] + reg_gradient;
                values[i] = (values[i] - cfg.learning_rate * g).clamp(CLAMP, 1.0 - CLAMP);
            }
        }
    }

    let map = ProbMap::new(grid, values)?;
    Ok((map, OptimizationTrace { records }))
}
