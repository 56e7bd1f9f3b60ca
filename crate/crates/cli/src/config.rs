//! Flat key-value run configuration files.
//!
//! One `key = value` pair per line; `#` starts a comment. Unknown keys are
//! rejected. Command-line flags override anything set here.

use std::path::Path;

/// Raw configuration values; every field is optional and the per-command
/// defaults apply when neither the file nor a flag sets it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub alpha: Option<String>,
    pub epsilon: Option<f64>,
    pub scale_row: Option<f64>,
    pub scale_col: Option<f64>,
    pub iterations: Option<usize>,
    pub learning_rate: Option<f64>,
    pub use_adam_moments: Option<bool>,
    pub mass_reg_weight: Option<f64>,
    pub init_value: Option<f64>,
    pub seed: Option<u64>,
    pub threshold_method: Option<String>,
    pub radius: Option<f64>,
    pub radii: Option<String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config '{}': {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut config = Self::default();
        for (index, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = index + 1;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {lineno}: expected 'key = value'"))?;
            let key = key.trim();
            let value = value.trim();
            let parse_f64 = || -> Result<f64, String> {
                value
                    .parse()
                    .map_err(|e| format!("config line {lineno}: bad {key} '{value}': {e}"))
            };
            match key {
                "alpha" => config.alpha = Some(value.to_string()),
                "epsilon" => config.epsilon = Some(parse_f64()?),
                "scale_row" => config.scale_row = Some(parse_f64()?),
                "scale_col" => config.scale_col = Some(parse_f64()?),
                "iterations" => {
                    config.iterations = Some(value.parse().map_err(|e| {
                        format!("config line {lineno}: bad iterations '{value}': {e}")
                    })?)
                }
                "learning_rate" => config.learning_rate = Some(parse_f64()?),
                "use_adam_moments" => {
                    config.use_adam_moments = Some(crate::parse::parse_bool(value).map_err(
                        |e| format!("config line {lineno}: {e}"),
                    )?)
                }
                "mass_reg_weight" => config.mass_reg_weight = Some(parse_f64()?),
                "init_value" => config.init_value = Some(parse_f64()?),
                "seed" => {
                    config.seed = Some(value.parse().map_err(|e| {
                        format!("config line {lineno}: bad seed '{value}': {e}")
                    })?)
                }
                "threshold_method" => config.threshold_method = Some(value.to_string()),
                "radius" => config.radius = Some(parse_f64()?),
                "radii" => config.radii = Some(value.to_string()),
                other => {
                    return Err(format!("config line {lineno}: unknown key '{other}'"));
                }
            }
        }
        Ok(config)
    }
}
