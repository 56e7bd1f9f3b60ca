//! Parsers for the small flag grammars shared by flags and config files.

use hausloc_core::loss::Alpha;
use hausloc_core::postprocess::ThresholdMethod;
use hausloc_core::GridSpec;

/// `HxW`, e.g. `64x64` (height first).
pub fn parse_size(text: &str) -> Result<GridSpec, String> {
    let (h, w) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected HxW, got '{text}'"))?;
    let height: usize = h.parse().map_err(|e| format!("bad height '{h}': {e}"))?;
    let width: usize = w.parse().map_err(|e| format!("bad width '{w}': {e}"))?;
    GridSpec::new(height, width).map_err(|e| e.to_string())
}

/// A negative exponent, or `min` for the exact-minimum mode.
pub fn parse_alpha(text: &str) -> Result<Alpha, String> {
    if text.eq_ignore_ascii_case("min") {
        return Ok(Alpha::Min);
    }
    let value: f64 = text
        .parse()
        .map_err(|e| format!("bad alpha '{text}': {e}"))?;
    Ok(Alpha::Power(value))
}

/// `fixed:<tau>`, `otsu`, or `bmm`.
pub fn parse_method(text: &str) -> Result<ThresholdMethod, String> {
    match text {
        "otsu" => Ok(ThresholdMethod::Otsu),
        "bmm" => Ok(ThresholdMethod::Bmm),
        other => {
            let tau = other
                .strip_prefix("fixed:")
                .ok_or_else(|| format!("expected fixed:<tau>, otsu or bmm, got '{other}'"))?;
            let tau: f64 = tau.parse().map_err(|e| format!("bad tau '{tau}': {e}"))?;
            Ok(ThresholdMethod::Fixed(tau))
        }
    }
}

/// `SROWxSCOL` scale factors, e.g. `2x2`.
pub fn parse_scale(text: &str) -> Result<(f64, f64), String> {
    let (r, c) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected SROWxSCOL, got '{text}'"))?;
    let s_row: f64 = r.parse().map_err(|e| format!("bad row scale '{r}': {e}"))?;
    let s_col: f64 = c.parse().map_err(|e| format!("bad col scale '{c}': {e}"))?;
    Ok((s_row, s_col))
}

/// `lo:hi:step` inclusive radius sweep, e.g. `0:15:1` for 16 radii.
pub fn parse_sweep(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected lo:hi:step, got '{text}'"));
    }
    let parse = |s: &str| -> Result<f64, String> {
        s.parse().map_err(|e| format!("bad number '{s}': {e}"))
    };
    let lo = parse(parts[0])?;
    let hi = parse(parts[1])?;
    let step = parse(parts[2])?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(format!("step must be positive, got {step}"));
    }
    if !(lo.is_finite() && hi.is_finite() && lo <= hi && lo >= 0.0) {
        return Err(format!("need 0 <= lo <= hi, got {lo}:{hi}"));
    }
    let mut radii = Vec::new();
    let mut i = 0u64;
    loop {
        let r = lo + i as f64 * step;
        if r > hi + 1e-9 {
            break;
        }
        radii.push(r);
        i += 1;
    }
    Ok(radii)
}

pub fn parse_bool(text: &str) -> Result<bool, String> {
    match text {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(format!("expected true/false, got '{other}'")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        let g = parse_size("64x48").unwrap();
        assert_eq!((g.height(), g.width()), (64, 48));
        assert!(parse_size("64").is_err());
        assert!(parse_size("0x4").is_err());
    }

    #[test]
    fn alphas_and_methods() {
        assert_eq!(parse_alpha("min").unwrap(), Alpha::Min);
        assert_eq!(parse_alpha("-1").unwrap(), Alpha::Power(-1.0));
        assert!(parse_alpha("fast").is_err());
        assert_eq!(parse_method("otsu").unwrap(), ThresholdMethod::Otsu);
        assert_eq!(
            parse_method("fixed:0.5").unwrap(),
            ThresholdMethod::Fixed(0.5)
        );
        assert!(parse_method("fixed:").is_err());
        assert!(parse_method("watershed").is_err());
    }

    #[test]
    fn sweeps() {
        assert_eq!(parse_sweep("0:15:1").unwrap().len(), 16);
        assert_eq!(parse_sweep("1:2:0.5").unwrap(), vec![1.0, 1.5, 2.0]);
        assert!(parse_sweep("2:1:1").is_err());
        assert!(parse_sweep("0:1:0").is_err());
        assert!(parse_sweep("0:1").is_err());
    }
}
