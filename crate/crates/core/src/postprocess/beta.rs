//! Two-component Beta mixture fitting by EM with a weighted
//! method-of-moments M-step, and the derived map threshold.
//!
//! Beta maximum likelihood has no closed form, so the M-step matches each
//! component's weighted mean and variance instead. The E-step and the
//! log-likelihood are exact.

use statrs::function::beta::ln_beta;

use crate::error::{Error, Result};
use crate::loss::ProbMap;
use crate::postprocess::otsu_threshold;

/// Samples are pulled into `[CLAMP, 1 − CLAMP]` before fitting; the Beta
/// density is unbounded at the interval ends.
const CLAMP: f64 = 1e-4;
const MIN_SAMPLES: usize = 10;
const WEIGHT_FLOOR: f64 = 1e-6;
const VARIANCE_FLOOR: f64 = 1e-12;
/// Cap on `a + b`; keeps the density evaluable when a component's
/// variance collapses toward zero.
const CONCENTRATION_CAP: f64 = 1e8;

const DEFAULT_MAX_ITER: usize = 200;
const DEFAULT_TOL: f64 = 1e-9;

/// One Beta(a, b) component with its mixture weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaComponent {
    pub a: f64,
    pub b: f64,
    pub weight: f64,
}

impl BetaComponent {
    pub fn mean(&self) -> f64 {
        self.a / (self.a + self.b)
    }

    fn ln_pdf(&self, v: f64) -> f64 {
        (self.a - 1.0) * v.ln() + (self.b - 1.0) * (1.0 - v).ln() - ln_beta(self.a, self.b)
    }
}

/// A fitted two-component Beta mixture. `log_likelihood` holds the
/// per-iteration EM trace, which is non-decreasing.
#[derive(Debug, Clone)]
pub struct BetaMixture {
    pub components: [BetaComponent; 2],
    pub log_likelihood: Vec<f64>,
}

impl BetaMixture {
    /// The component with the larger mean.
    pub fn high_component(&self) -> &BetaComponent {
        if self.components[0].mean() >= self.components[1].mean() {
            &self.components[0]
        } else {
            &self.components[1]
        }
    }
}

fn moments_to_component(mean: f64, variance: f64, weight: f64) -> Result<BetaComponent> {
    let variance = variance.max(VARIANCE_FLOOR);
    let feasible = mean * (1.0 - mean);
    if variance >= feasible {
        return Err(Error::DegenerateFit {
            reason: format!("variance {variance} exceeds Beta feasibility at mean {mean}"),
        });
    }
    let concentration = (feasible / variance - 1.0).min(CONCENTRATION_CAP);
    Ok(BetaComponent {
        a: mean * concentration,
        b: (1.0 - mean) * concentration,
        weight,
    })
}

fn m_step(values: &[f64], responsibilities: &[f64]) -> Result<[BetaComponent; 2]> {
    let n = values.len() as f64;
    let mut components = [BetaComponent {
        a: 1.0,
        b: 1.0,
        weight: 0.5,
    }; 2];
    for (c, slot) in components.iter_mut().enumerate() {
        let resp = |i: usize| {
            if c == 0 {
                responsibilities[i]
            } else {
                1.0 - responsibilities[i]
            }
        };
        let total: f64 = (0..values.len()).map(resp).sum();
        let weight = total / n;
        if weight < WEIGHT_FLOOR {
            return Err(Error::DegenerateFit {
                reason: format!("component {c} weight collapsed to {weight}"),
            });
        }
        let mean: f64 = (0..values.len()).map(|i| resp(i) * values[i]).sum::<f64>() / total;
        let variance: f64 = (0..values.len())
            .map(|i| resp(i) * (values[i] - mean) * (values[i] - mean))
            .sum::<f64>()
            / total;
        *slot = moments_to_component(mean, variance, weight)?;
    }
    Ok(components)
}

/// Responsibilities of component 0 plus the data log-likelihood.
fn e_step(values: &[f64], components: &[BetaComponent; 2]) -> (Vec<f64>, f64) {
    let lw0 = components[0].weight.ln();
    let lw1 = components[1].weight.ln();
    let mut responsibilities = Vec::with_capacity(values.len());
    let mut log_likelihood = 0.0;
    for &v in values {
        let l0 = lw0 + components[0].ln_pdf(v);
        let l1 = lw1 + components[1].ln_pdf(v);
        let hi = l0.max(l1);
        let lse = hi + ((l0 - hi).exp() + (l1 - hi).exp()).ln();
        responsibilities.push((l0 - lse).exp());
        log_likelihood += lse;
    }
    (responsibilities, log_likelihood)
}

/// Fits a two-component Beta mixture to samples in `(0, 1)`.
///
/// Initialization splits the samples at their mean. EM stops when the
/// log-likelihood change drops below `tol`, an iteration would decrease it
/// (the previous parameters are kept), or `max_iter` is reached.
pub fn fit_beta_mixture(values: &[f64], max_iter: usize, tol: f64) -> Result<BetaMixture> {
    for &v in values {
        if !v.is_finite() {
            return Err(Error::InvalidParam {
                name: "values",
                reason: format!("samples must be finite, got {v}"),
            });
        }
    }
    let values: Vec<f64> = values.iter().map(|&v| v.clamp(CLAMP, 1.0 - CLAMP)).collect();
    if values.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_SAMPLES,
            got: values.len(),
        });
    }

    // Seed responsibilities by a hard split at the midpoint of the value
    // range; unlike a mean split this stays balanced when one cluster
    // holds almost all samples.
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let midpoint = 0.5 * (min + max);
    let seed_resp: Vec<f64> = values
        .iter()
        .map(|&v| if v <= midpoint { 1.0 } else { 0.0 })
        .collect();
    let mut components = m_step(&values, &seed_resp)?;

    let mut log_likelihood = Vec::new();
    let mut previous = f64::NEG_INFINITY;
    let mut previous_components = components;
    for _ in 0..max_iter {
        let (responsibilities, ll) = e_step(&values, &components);
        if ll + 1e-12 < previous {
            // Moment matching is not an exact M-step; keep the better fit.
            components = previous_components;
            break;
        }
        log_likelihood.push(ll);
        if (ll - previous).abs() < tol {
            break;
        }
        previous = ll;
        previous_components = components;
        components = m_step(&values, &responsibilities)?;
    }

    Ok(BetaMixture {
        components,
        log_likelihood,
    })
}

/// Threshold choice made by [`bmm_threshold`].
#[derive(Debug, Clone)]
pub struct BmmThreshold {
    pub tau: f64,
    /// Set when the Beta fit degenerated and a simpler rule was used.
    pub fallback_used: bool,
    pub mixture: Option<BetaMixture>,
}

/// Beta-mixture threshold: the mean `a/(a+b)` of the component with the
/// larger mean.
///
/// Falls back to Otsu when the fit degenerates or when the fitted τ
/// reaches the map's maximum (a saturated high cluster collapses onto a
/// single value, and a threshold at that value selects nothing). When even
/// Otsu cannot separate the values, τ becomes the map's largest value and
/// the mask is empty.
pub fn bmm_threshold(map: &ProbMap) -> Result<BmmThreshold> {
    let max_value = map
        .values()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    match fit_beta_mixture(map.values(), DEFAULT_MAX_ITER, DEFAULT_TOL) {
        Ok(mixture) => {
            let tau = mixture.high_component().mean();
            if tau < max_value {
                return Ok(BmmThreshold {
                    tau,
                    fallback_used: false,
                    mixture: Some(mixture),
                });
            }
        }
        Err(Error::DegenerateFit { .. }) | Err(Error::InsufficientData { .. }) => {}
        Err(e) => return Err(e),
    }
    let tau = match otsu_threshold(map) {
        Ok(tau) => tau,
        Err(Error::DegenerateMap) => max_value,
        Err(e) => return Err(e),
    };
    Ok(BmmThreshold {
        tau,
        fallback_used: true,
        mixture: None,
    })
}
