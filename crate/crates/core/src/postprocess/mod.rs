//! Conversion of a probability map into estimated object locations:
//! thresholding, count estimation, and Gaussian-mixture extraction.
//!
//! The pipeline is `localize`: pick a threshold τ, binarize the map into
//! the pixel set `T = {x | p_x > τ}`, estimate a count from the mask's
//! 8-connected components (or accept a caller-supplied count), then fit a
//! Gaussian mixture with that many components to the mask pixels. The
//! mixture means are the estimated locations.

mod beta;
mod components;
mod gmm;
mod otsu;

pub use beta::{bmm_threshold, fit_beta_mixture, BetaComponent, BetaMixture, BmmThreshold};
pub use components::estimate_count;
pub use gmm::{fit_gmm, GaussianComponent, GaussianMixture2D};
pub use otsu::otsu_threshold;

use crate::error::{Error, Result};
use crate::geometry::{GridSpec, PointSet};
use crate::loss::ProbMap;

/// EM iteration cap used by [`localize`].
pub const EM_MAX_ITER: usize = 200;
/// EM log-likelihood convergence tolerance used by [`localize`].
pub const EM_TOL: f64 = 1e-8;

/// How the binarization threshold τ is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdMethod {
    /// A constant τ in `[0, 1]`.
    Fixed(f64),
    /// Otsu's between-class variance maximization over a 256-bin histogram.
    Otsu,
    /// Beta-mixture thresholding: the mean of the fitted high component.
    Bmm,
}

/// Boolean pixel mask over a grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    grid: GridSpec,
    values: Vec<bool>,
}

impl Mask {
    /// Pixels with activation strictly above τ.
    pub fn from_threshold(map: &ProbMap, tau: f64) -> Self {
        Self {
            grid: map.grid(),
            values: map.values().iter().map(|&p| p > tau).collect(),
        }
    }

    pub fn new(grid: GridSpec, values: Vec<bool>) -> Result<Self> {
        if values.len() != grid.num_pixels() {
            return Err(Error::InvalidParam {
                name: "mask",
                reason: format!(
                    "expected {} values, got {}",
                    grid.num_pixels(),
                    values.len()
                ),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.values[self.grid.index(row, col)]
    }

    pub fn count_true(&self) -> usize {
        self.values.iter().filter(|&&v| v).count()
    }

    /// Centers of the masked pixels, in row-major order.
    pub fn true_points(&self) -> PointSet {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(|(i, _)| self.grid.pixel(i))
            .collect()
    }
}

/// Output of [`localize`].
#[derive(Debug, Clone)]
pub struct LocalizationResult {
    pub tau: f64,
    pub mask: Mask,
    /// Estimated object count Ĉ.
    pub count_estimate: usize,
    /// Estimated locations Ŷ (the mixture means).
    pub locations: PointSet,
    pub mixture: Option<GaussianMixture2D>,
    /// True when Beta-mixture thresholding fell back to a simpler rule.
    pub fallback_used: bool,
}

/// Extracts object locations from a probability map.
///
/// `count_override` replaces the connected-component count when the caller
/// knows the true count. A zero count yields an empty location set; a
/// positive count with an empty mask is an error.
pub fn localize(
    map: &ProbMap,
    method: ThresholdMethod,
    count_override: Option<usize>,
    seed: u64,
) -> Result<LocalizationResult> {
    let (tau, fallback_used) = match method {
        ThresholdMethod::Fixed(tau) => {
            if !(tau.is_finite() && (0.0..=1.0).contains(&tau)) {
                return Err(Error::InvalidParam {
                    name: "tau",
                    reason: format!("fixed threshold must lie in [0, 1], got {tau}"),
                });
            }
            (tau, false)
        }
        ThresholdMethod::Otsu => (otsu_threshold(map)?, false),
        ThresholdMethod::Bmm => {
            let choice = bmm_threshold(map)?;
            (choice.tau, choice.fallback_used)
        }
    };

    let mask = Mask::from_threshold(map, tau);
    let count_estimate = count_override.unwrap_or_else(|| estimate_count(&mask));

    if count_estimate == 0 {
        return Ok(LocalizationResult {
            tau,
            mask,
            count_estimate,
            locations: PointSet::default(),
            mixture: None,
            fallback_used,
        });
    }

    let pixels = mask.true_points();
    if pixels.is_empty() {
        return Err(Error::MaskCountMismatch {
            count: count_estimate,
        });
    }

    let mixture = fit_gmm(&pixels, count_estimate, seed, EM_MAX_ITER, EM_TOL)?;
    let locations: PointSet = mixture.components.iter().map(|c| c.mean).collect();

    Ok(LocalizationResult {
        tau,
        mask,
        count_estimate,
        locations,
        mixture: Some(mixture),
        fallback_used,
    })
}
