//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Errors produced by distance, loss, optimization and post-processing
/// routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A point was constructed with a NaN or infinite coordinate.
    #[error("point coordinates must be finite, got ({row}, {col})")]
    NonFinitePoint { row: f64, col: f64 },

    /// A distance was requested against an empty point set.
    #[error("{context}: point set must be non-empty")]
    EmptySet { context: &'static str },

    /// The generalized mean of an empty collection is undefined.
    #[error("generalized mean requires a non-empty input")]
    EmptyInput,

    /// Generalized-mean arguments must be strictly positive.
    #[error("generalized mean requires strictly positive values, got {value}")]
    NonPositiveValue { value: f64 },

    /// A probability map value fell outside `[0, 1]` or was not finite.
    #[error("map value at pixel {index} is {value}, expected a finite value in [0, 1]")]
    InvalidMap { index: usize, value: f64 },

    /// Gradients are undefined when the loss uses the exact minimum.
    #[error("gradient is undefined in exact-min mode")]
    NonSmoothMode,

    /// A parameter violated its documented range.
    #[error("invalid {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// Rejection sampling could not place the requested points.
    #[error("placed only {placed} of {requested} points after {attempts} attempts")]
    InfeasibleSpec {
        requested: usize,
        placed: usize,
        attempts: usize,
    },

    /// The optimizer encountered a NaN or infinite loss.
    #[error("loss became non-finite at iteration {iteration}")]
    NonFiniteLoss { iteration: usize },

    /// Otsu thresholding needs at least two distinct map values.
    #[error("threshold undefined: map values are indistinguishable")]
    DegenerateMap,

    /// The Beta-mixture fit needs a minimum number of samples.
    #[error("beta mixture needs at least {needed} samples in (0, 1), got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// The Beta-mixture fit collapsed.
    #[error("beta mixture fit degenerated: {reason}")]
    DegenerateFit { reason: String },

    /// A Gaussian mixture cannot have more components than points.
    #[error("cannot fit {k} mixture components to {n} points")]
    TooFewPoints { k: usize, n: usize },

    /// A positive count was requested on an empty mask.
    #[error("count estimate is {count} but the thresholded mask is empty")]
    MaskCountMismatch { count: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
