//! Point-set localization toolkit built around Hausdorff-style distances.
//!
//! The crate provides:
//!
//! - [`geometry`]: point sets, the classic and average Hausdorff distances,
//!   and nearest-distance fields on a pixel grid;
//! - [`loss`]: the weighted Hausdorff distance over a probability map, its
//!   analytic gradient, and the combined training loss;
//! - [`optim`]: direct gradient-descent optimization of a map against a
//!   ground-truth point set, plus a synthetic scene generator;
//! - [`postprocess`]: thresholding (fixed, Otsu, Beta-mixture), connected
//!   component counting, and Gaussian-mixture location extraction;
//! - [`metrics`]: proximity-based precision/recall/F-score, evaluation
//!   AHD, and count error statistics;
//! - [`io`]: the CSV and PGM file formats used by the command-line tools.

pub mod error;
pub mod geometry;
pub mod io;
pub mod loss;
pub mod metrics;
pub mod optim;
pub mod postprocess;

pub use error::{Error, Result};
pub use geometry::{GridSpec, Point, PointSet};
pub use loss::{Alpha, LossBreakdown, ProbMap, ScaleTransform, WhdParams};
pub use metrics::{CountMetrics, CountSeries, EvalReport, MatchCounts};
pub use optim::{OptimizationTrace, OptimizerConfig, SceneSpec, TraceRecord};
pub use postprocess::{
    BetaMixture, GaussianMixture2D, LocalizationResult, Mask, ThresholdMethod,
};
