//! Evaluation metrics for location estimates: proximity-based
//! precision/recall/F-score at a radius `r`, the F-vs-r sweep, the average
//! Hausdorff distance as a location-error summary, and count error
//! statistics (MAE, RMSE, MAPE).

use crate::error::Result;
use crate::geometry::{average_hausdorff, euclidean, GridSpec, Point, PointSet};

/// Raw match tallies at one radius.
///
/// Matching uses per-point proximity predicates, not a one-to-one
/// assignment: every estimate within `r` of some ground-truth point is a
/// true positive, so duplicate estimates near one target can all count.
/// Count metrics exist to surface that duplication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchCounts {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub radius: f64,
}

/// Precision, recall and F-score; `None` encodes an undefined value
/// (empty denominators) rather than NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionRecall {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub fscore: Option<f64>,
}

/// One entry of an F-vs-r sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepEntry {
    pub radius: f64,
    pub fscore: Option<f64>,
}

/// Tallies proximity matches at radius `r`.
///
/// - true positive: an estimate with a ground-truth point within `r`;
/// - false positive: an estimate with none;
/// - false negative: a ground-truth point with no estimate within `r`.
pub fn match_at_radius(estimated: &PointSet, ground_truth: &PointSet, radius: f64) -> MatchCounts {
    debug_assert!(radius >= 0.0);
    let near = |p: Point, set: &PointSet| set.iter().any(|&q| euclidean(p, q) <= radius);
    let true_positives = estimated
        .iter()
        .filter(|&&e| near(e, ground_truth))
        .count();
    let false_negatives = ground_truth
        .iter()
        .filter(|&&g| !near(g, estimated))
        .count();
    MatchCounts {
        true_positives,
        false_positives: estimated.len() - true_positives,
        false_negatives,
        radius,
    }
}

/// Precision `tp/(tp+fp)`, recall `tp/(tp+fn)` and their harmonic mean.
///
/// A zero denominator leaves the metric undefined (`None`); the F-score is
/// undefined when either input is. When both are defined but zero, the
/// F-score is zero by the usual limit convention.
pub fn precision_recall_f(counts: &MatchCounts) -> PrecisionRecall {
    let tp = counts.true_positives as f64;
    let precision = if counts.true_positives + counts.false_positives > 0 {
        Some(tp / (counts.true_positives + counts.false_positives) as f64)
    } else {
        None
    };
    let recall = if counts.true_positives + counts.false_negatives > 0 {
        Some(tp / (counts.true_positives + counts.false_negatives) as f64)
    } else {
        None
    };
    let fscore = match (precision, recall) {
        (Some(p), Some(r)) => {
            if p + r > 0.0 {
                Some(2.0 * p * r / (p + r))
            } else {
                Some(0.0)
            }
        }
        _ => None,
    };
    PrecisionRecall {
        precision,
        recall,
        fscore,
    }
}

/// F-score at each radius of an ascending list. Larger radii only convert
/// misses into matches, so the defined F-scores are non-decreasing.
pub fn f_vs_r_sweep(
    estimated: &PointSet,
    ground_truth: &PointSet,
    radii: &[f64],
) -> Vec<SweepEntry> {
    debug_assert!(radii.windows(2).all(|w| w[0] <= w[1]));
    radii
        .iter()
        .map(|&radius| SweepEntry {
            radius,
            fscore: precision_recall_f(&match_at_radius(estimated, ground_truth, radius)).fscore,
        })
        .collect()
}

/// Per-image pairs of true and estimated object counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CountSeries {
    pairs: Vec<(u64, u64)>,
}

impl CountSeries {
    /// `pairs` holds `(true_count, estimated_count)` per image; at least
    /// one image is required.
    pub fn new(pairs: Vec<(u64, u64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(crate::error::Error::InvalidParam {
                name: "counts",
                reason: "at least one image is required".into(),
            });
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(u64, u64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Count error statistics. MAPE is `None` when every image has a zero
/// true count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountMetrics {
    pub mae: f64,
    pub rmse: f64,
    pub mape: Option<f64>,
}

/// MAE, RMSE and MAPE of the count errors `e_i = ĉ_i − c_i`.
///
/// MAPE skips images with a zero true count but still divides by the total
/// image count `N`.
pub fn count_metrics(series: &CountSeries) -> CountMetrics {
    let n = series.len() as f64;
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    let mut pct_sum = 0.0;
    let mut any_nonzero = false;
    for &(true_count, estimated) in series.pairs() {
        let error = estimated as f64 - true_count as f64;
        abs_sum += error.abs();
        sq_sum += error * error;
        if true_count > 0 {
            any_nonzero = true;
            pct_sum += error.abs() / true_count as f64;
        }
    }
    CountMetrics {
        mae: abs_sum / n,
        rmse: (sq_sum / n).sqrt(),
        mape: any_nonzero.then(|| 100.0 * pct_sum / n),
    }
}

/// Average Hausdorff distance between estimates and ground truth — the
/// mean location error in pixels. Errors on empty sets; see
/// [`evaluate_points`] for the empty-estimate reporting convention.
pub fn eval_ahd(estimated: &PointSet, ground_truth: &PointSet) -> Result<f64> {
    average_hausdorff(estimated, ground_truth)
}

/// Full evaluation of one image.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub fscore: Option<f64>,
    /// Average Hausdorff distance; `None` when undefined and no reporting
    /// convention applies.
    pub ahd: Option<f64>,
    /// Set when `ahd` is the grid diagonal reported for an empty estimate
    /// set rather than a measured distance.
    pub empty_estimate: bool,
    pub counts: MatchCounts,
}

/// Evaluates estimates against ground truth at radius `r`.
///
/// When the estimate set is empty and a grid is supplied, the AHD is
/// reported as the grid diagonal (the worst possible distance) with the
/// `empty_estimate` flag set.
pub fn evaluate_points(
    estimated: &PointSet,
    ground_truth: &PointSet,
    radius: f64,
    grid: Option<GridSpec>,
) -> EvalReport {
    let counts = match_at_radius(estimated, ground_truth, radius);
    let pr = precision_recall_f(&counts);
    let (ahd, empty_estimate) = if !estimated.is_empty() && !ground_truth.is_empty() {
        (eval_ahd(estimated, ground_truth).ok(), false)
    } else if estimated.is_empty() && !ground_truth.is_empty() {
        (grid.map(|g| g.diagonal()), grid.is_some())
    } else {
        (None, false)
    };
    EvalReport {
        precision: pr.precision,
        recall: pr.recall,
        fscore: pr.fscore,
        ahd,
        empty_estimate,
        counts,
    }
}
