//! Parsing of unit-carrying quantities from the command line and config
//! files. Densities must name their unit (`10/km2`, `1e-5/m2`); lengths
//! likewise (`100m`, `0.1km`).

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnitError {
    #[error("`{0}` has no unit; use /km2 or /m2")]
    MissingDensityUnit(String),
    #[error("`{0}` has no unit; use m or km")]
    MissingLengthUnit(String),
    #[error("cannot parse `{0}` as a number")]
    BadNumber(String),
}

// Divisors rather than factors keep e.g. 10/km2 at exactly 1e-5.
const DENSITY_UNITS: [(&str, f64); 4] = [("/km^2", 1e6), ("/km2", 1e6), ("/m^2", 1.0), ("/m2", 1.0)];
const LENGTH_UNITS: [(&str, f64); 2] = [("km", 1e3), ("m", 1.0)];

fn number(s: &str, original: &str) -> Result<f64, UnitError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| UnitError::BadNumber(original.to_string()))
}

/// Parses a density into points per square meter.
pub fn parse_density(s: &str) -> Result<f64, UnitError> {
    let t = s.trim();
    for (suffix, scale) in DENSITY_UNITS {
        if let Some(num) = t.strip_suffix(suffix) {
            return Ok(number(num, s)? / scale);
        }
    }
    Err(UnitError::MissingDensityUnit(s.to_string()))
}

/// Parses a length into meters.
pub fn parse_length(s: &str) -> Result<f64, UnitError> {
    let t = s.trim();
    for (suffix, scale) in LENGTH_UNITS {
        if let Some(num) = t.strip_suffix(suffix) {
            return Ok(number(num, s)? * scale);
        }
    }
    Err(UnitError::MissingLengthUnit(s.to_string()))
}
