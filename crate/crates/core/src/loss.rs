//! The weighted Hausdorff distance (WHD), its analytic gradient with
//! respect to the probability map, and the combined training loss.
//!
//! The WHD compares a per-pixel confidence map `p` against a ground-truth
//! point set `Y`:
//!
//! ```text
//! d_WH(p, Y) = 1/(S+ε) · Σ_x p_x · min_y d(x,y)
//!            + 1/|Y|   · Σ_y M_α over x of [ p_x·d(x,y) + (1−p_x)·d_max ]
//! ```
//!
//! where `S = Σ p_x` and `M_α` is the generalized mean, a smooth surrogate
//! for the minimum when `α < 0`.

use crate::error::{Error, Result};
use crate::geometry::{euclidean, sum_canonical, GridSpec, Point, PointSet};

/// Floor applied to generalized-mean arguments before exponentiation.
/// The argument `p_x·d + (1−p_x)·d_max` is zero only when `p_x = 1` and
/// `x = y`; negative exponents are singular there, and flooring preserves
/// the minimum semantics to machine precision.
const MEAN_ARG_FLOOR: f64 = 1e-12;

/// Inner reduction used by the loss's second term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    /// Generalized (power) mean with the given exponent. The loss path
    /// requires a negative exponent; `generalized_mean` accepts any
    /// non-zero one.
    Power(f64),
    /// Exact minimum (the `α = −∞` limit). Non-smooth: gradients are
    /// refused in this mode.
    Min,
}

/// Anisotropic coordinate scaling used when a map was produced at a
/// different resolution than the ground truth. Distances are measured
/// between scaled points, and the distance bound becomes the diagonal of
/// the scaled (original-resolution) image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleTransform {
    s_row: f64,
    s_col: f64,
}

impl ScaleTransform {
    pub fn new(s_row: f64, s_col: f64) -> Result<Self> {
        if !(s_row.is_finite() && s_row > 0.0 && s_col.is_finite() && s_col > 0.0) {
            return Err(Error::InvalidParam {
                name: "scale",
                reason: format!("factors must be positive and finite, got ({s_row}, {s_col})"),
            });
        }
        Ok(Self { s_row, s_col })
    }

    pub fn s_row(&self) -> f64 {
        self.s_row
    }

    pub fn s_col(&self) -> f64 {
        self.s_col
    }

    /// Maps `(row, col)` to `(s_row·row, s_col·col)`.
    pub fn apply(&self, p: Point) -> Point {
        Point::new(self.s_row * p.row(), self.s_col * p.col())
            .expect("scaled coordinate overflowed")
    }
}

/// Parameters of the weighted Hausdorff distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhdParams {
    alpha: Alpha,
    epsilon: f64,
    scale: Option<ScaleTransform>,
}

impl WhdParams {
    /// `alpha` must be negative in power-mean mode; `epsilon ≥ 0`.
    pub fn new(alpha: Alpha, epsilon: f64) -> Result<Self> {
        if let Alpha::Power(a) = alpha {
            if !(a.is_finite() && a < 0.0) {
                return Err(Error::InvalidParam {
                    name: "alpha",
                    reason: format!("loss exponent must be negative and finite, got {a}"),
                });
            }
        }
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::InvalidParam {
                name: "epsilon",
                reason: format!("must be non-negative and finite, got {epsilon}"),
            });
        }
        Ok(Self {
            alpha,
            epsilon,
            scale: None,
        })
    }

    pub fn with_scale(mut self, scale: ScaleTransform) -> Self {
        self.scale = Some(scale);
        self
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn scale(&self) -> Option<ScaleTransform> {
        self.scale
    }
}

impl Default for WhdParams {
    /// `α = −1`, `ε = 10⁻⁶`, no scaling.
    fn default() -> Self {
        Self {
            alpha: Alpha::Power(-1.0),
            epsilon: 1e-6,
            scale: None,
        }
    }
}

/// A per-pixel confidence map over a grid, row-major, values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMap {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ProbMap {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_pixels() {
            return Err(Error::InvalidParam {
                name: "map",
                reason: format!(
                    "expected {} values for a {}x{} grid, got {}",
                    grid.num_pixels(),
                    grid.height(),
                    grid.width(),
                    values.len()
                ),
            });
        }
        for (index, &value) in values.iter().enumerate() {
            if !(value.is_finite() && (0.0..=1.0).contains(&value)) {
                return Err(Error::InvalidMap { index, value });
            }
        }
        Ok(Self { grid, values })
    }

    /// A map with every pixel at `value`.
    pub fn uniform(grid: GridSpec, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.num_pixels()])
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[self.grid.index(row, col)]
    }
}

/// Loss terms of one WHD evaluation. `total = term1 + term2` always; the
/// gradient is present only when requested.
#[derive(Debug, Clone)]
pub struct LossBreakdown {
    pub total: f64,
    pub term1: f64,
    pub term2: f64,
    /// Map mass `S = Σ p_x`.
    pub mass: f64,
    /// `∂ total / ∂ p_x`, row-major, when computed.
    pub gradient: Option<Vec<f64>>,
}

/// Generalized (power) mean `((1/n)·Σ vᵅ)^(1/α)` of strictly positive
/// values, or the exact minimum in `Alpha::Min` mode.
pub fn generalized_mean(values: &[f64], alpha: Alpha) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    match alpha {
        Alpha::Min => Ok(values.iter().copied().fold(f64::INFINITY, f64::min)),
        Alpha::Power(a) => {
            if !(a.is_finite() && a != 0.0) {
                return Err(Error::InvalidParam {
                    name: "alpha",
                    reason: format!("exponent must be non-zero and finite, got {a}"),
                });
            }
            for &v in values {
                if v.is_nan() || v <= 0.0 {
                    return Err(Error::NonPositiveValue { value: v });
                }
            }
            let sum: f64 = values.iter().map(|&v| v.powf(a)).sum();
            Ok((sum / values.len() as f64).powf(1.0 / a))
        }
    }
}

/// Smooth L1 (Huber) penalty: `0.5x²` for `|x| < 1`, `|x| − 0.5` otherwise.
pub fn huber(x: f64) -> f64 {
    if x.abs() < 1.0 {
        0.5 * x * x
    } else {
        x.abs() - 0.5
    }
}

/// Derivative of [`huber`]: `x` inside the quadratic region, `±1` outside.
pub(crate) fn huber_derivative(x: f64) -> f64 {
    if x.abs() < 1.0 {
        x
    } else {
        x.signum()
    }
}

/// Precomputed distance geometry for one `(grid, Y, scale)` combination.
/// Rows of pairwise distances are materialized only when asked for, so a
/// one-shot evaluation stays at O(|Ω|) memory while an optimization loop
/// can pay the O(|Y|·|Ω|) storage once.
pub(crate) struct DistanceCache {
    grid: GridSpec,
    scaled_targets: Vec<Point>,
    scale: (f64, f64),
    d_max: f64,
    min_field: Vec<f64>,
    rows: Option<Vec<Vec<f64>>>,
}

impl DistanceCache {
    pub(crate) fn new(
        grid: GridSpec,
        targets: &PointSet,
        scale: Option<ScaleTransform>,
        cache_rows: bool,
    ) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::EmptySet {
                context: "weighted_hausdorff",
            });
        }
        let (s_row, s_col) = scale.map_or((1.0, 1.0), |s| (s.s_row(), s.s_col()));
        let scaled_targets: Vec<Point> = targets
            .iter()
            .map(|&q| Point::new(s_row * q.row(), s_col * q.col()))
            .collect::<Result<_>>()?;

        let dr = s_row * (grid.height() - 1) as f64;
        let dc = s_col * (grid.width() - 1) as f64;
        let d_max = (dr * dr + dc * dc).sqrt();

        let n = grid.num_pixels();
        let mut min_field = vec![f64::INFINITY; n];
        let mut rows = cache_rows.then(|| Vec::with_capacity(scaled_targets.len()));
        let mut buf = vec![0.0; n];
        for &target in &scaled_targets {
            Self::distances_to(grid, (s_row, s_col), target, &mut buf);
            for (slot, &d) in min_field.iter_mut().zip(buf.iter()) {
                if d < *slot {
                    *slot = d;
                }
            }
            if let Some(rows) = rows.as_mut() {
                rows.push(buf.clone());
            }
        }

        Ok(Self {
            grid,
            scaled_targets,
            scale: (s_row, s_col),
            d_max,
            min_field,
            rows,
        })
    }

    fn distances_to(grid: GridSpec, scale: (f64, f64), target: Point, out: &mut [f64]) {
        let (s_row, s_col) = scale;
        let width = grid.width();
        for r in 0..grid.height() {
            let row_coord = s_row * r as f64;
            let base = r * width;
            for c in 0..width {
                let p = Point::new(row_coord, s_col * c as f64).expect("pixel coordinate");
                out[base + c] = euclidean(p, target);
            }
        }
    }

    pub(crate) fn num_targets(&self) -> usize {
        self.scaled_targets.len()
    }

    pub(crate) fn d_max(&self) -> f64 {
        self.d_max
    }

    pub(crate) fn min_field(&self) -> &[f64] {
        &self.min_field
    }

    /// Distances from every pixel to target `j`, either borrowed from the
    /// cached rows or recomputed into `buf`.
    fn row<'a>(&'a self, j: usize, buf: &'a mut [f64]) -> &'a [f64] {
        match &self.rows {
            Some(rows) => &rows[j],
            None => {
                Self::distances_to(self.grid, self.scale, self.scaled_targets[j], buf);
                buf
            }
        }
    }
}

/// Evaluates the WHD (and optionally its gradient) for raw map values.
/// `values` must already be valid `[0, 1]` probabilities for `cache.grid`.
pub(crate) fn eval_whd(
    values: &[f64],
    params: &WhdParams,
    cache: &DistanceCache,
    want_gradient: bool,
) -> Result<LossBreakdown> {
    debug_assert_eq!(values.len(), cache.grid.num_pixels());
    if want_gradient && matches!(params.alpha(), Alpha::Min) {
        return Err(Error::NonSmoothMode);
    }

    let n = values.len();
    let m = cache.num_targets();
    let d_max = cache.d_max();

    let mass: f64 = values.iter().sum();
    let denominator = mass + params.epsilon();
    let weighted_sum: f64 = values
        .iter()
        .zip(cache.min_field())
        .map(|(&p, &d)| p * d)
        .sum();
    // A zero numerator means zero activation mass on the distance field;
    // the term is zero even when ε = 0 leaves the denominator at zero.
    let term1 = if weighted_sum == 0.0 {
        0.0
    } else {
        weighted_sum / denominator
    };

    let mut gradient = if want_gradient {
        Some(vec![0.0; n])
    } else {
        None
    };

    let mut buf = vec![0.0; if cache.rows.is_some() { 0 } else { n }];
    let mut means = Vec::with_capacity(m);
    for j in 0..m {
        let row = cache.row(j, &mut buf);
        match params.alpha() {
            Alpha::Min => {
                let mut min = f64::INFINITY;
                for (&p, &d) in values.iter().zip(row) {
                    let f = p * d + (1.0 - p) * d_max;
                    if f < min {
                        min = f;
                    }
                }
                means.push(min);
            }
            Alpha::Power(a) => {
                // Reciprocal fast path for the default exponent.
                let mean = if a == -1.0 {
                    let mut acc = 0.0;
                    for (&p, &d) in values.iter().zip(row) {
                        let f = (p * d + (1.0 - p) * d_max).max(MEAN_ARG_FLOOR);
                        acc += 1.0 / f;
                    }
                    n as f64 / acc
                } else {
                    let mut acc = 0.0;
                    for (&p, &d) in values.iter().zip(row) {
                        let f = (p * d + (1.0 - p) * d_max).max(MEAN_ARG_FLOOR);
                        acc += f.powf(a);
                    }
                    (acc / n as f64).powf(1.0 / a)
                };
                means.push(mean);

                if let Some(grad) = gradient.as_mut() {
                    // ∂M/∂p_x = (1/n)·M^(1−α)·f^(α−1)·(d − d_max); pixels in
                    // the floored region are constant and contribute zero.
                    let outer = 1.0 / (m as f64 * n as f64);
                    if a == -1.0 {
                        let m_sq = mean * mean * outer;
                        for ((g, &p), &d) in grad.iter_mut().zip(values).zip(row) {
                            let f = p * d + (1.0 - p) * d_max;
                            if f > MEAN_ARG_FLOOR {
                                *g += m_sq / (f * f) * (d - d_max);
                            }
                        }
                    } else {
                        let m_pow = mean.powf(1.0 - a) * outer;
                        for ((g, &p), &d) in grad.iter_mut().zip(values).zip(row) {
                            let f = p * d + (1.0 - p) * d_max;
                            if f > MEAN_ARG_FLOOR {
                                *g += m_pow * f.powf(a - 1.0) * (d - d_max);
                            }
                        }
                    }
                }
            }
        }
    }
    let term2 = sum_canonical(means) / m as f64;

    if let Some(grad) = gradient.as_mut() {
        for (g, &d) in grad.iter_mut().zip(cache.min_field()) {
            *g += (d - term1) / denominator;
        }
    }

    Ok(LossBreakdown {
        total: term1 + term2,
        term1,
        term2,
        mass,
        gradient,
    })
}

/// The weighted Hausdorff distance between a probability map and a
/// non-empty point set.
pub fn weighted_hausdorff(
    map: &ProbMap,
    targets: &PointSet,
    params: &WhdParams,
) -> Result<LossBreakdown> {
    let cache = DistanceCache::new(map.grid(), targets, params.scale(), false)?;
    eval_whd(map.values(), params, &cache, false)
}

/// The weighted Hausdorff distance together with `∂ total / ∂ p_x`.
/// Requires power-mean mode; the exact minimum is non-smooth.
pub fn weighted_hausdorff_with_gradient(
    map: &ProbMap,
    targets: &PointSet,
    params: &WhdParams,
) -> Result<LossBreakdown> {
    let cache = DistanceCache::new(map.grid(), targets, params.scale(), false)?;
    eval_whd(map.values(), params, &cache, true)
}

/// Convenience wrapper returning only the gradient field.
pub fn whd_gradient(map: &ProbMap, targets: &PointSet, params: &WhdParams) -> Result<Vec<f64>> {
    weighted_hausdorff_with_gradient(map, targets, params)
        .map(|b| b.gradient.expect("gradient was requested"))
}

/// Training loss: WHD plus the Huber penalty on the count error
/// `|Y| − ĉ`. The count estimate `ĉ` is supplied by the caller.
pub fn combined_loss(
    map: &ProbMap,
    targets: &PointSet,
    count_estimate: f64,
    params: &WhdParams,
) -> Result<f64> {
    let breakdown = weighted_hausdorff(map, targets, params)?;
    Ok(breakdown.total + huber(targets.len() as f64 - count_estimate))
}
