//! Decibel and efficiency-unit conversions.
//!
//! Everything inside the crate works in SI; `%/W` only appears at I/O
//! boundaries and goes through the two functions here.

use crate::error::{Error, Result};

/// `10 log10(ratio)`.
pub fn db(ratio: f64) -> Result<f64> {
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(Error::Domain(format!(
            "decibels need a positive finite ratio, got {ratio}"
        )));
    }
    Ok(10.0 * ratio.log10())
}

pub fn from_db(level_db: f64) -> f64 {
    10f64.powf(level_db / 10.0)
}

/// dBm to watts.
pub fn dbm_to_watts(level_dbm: f64) -> f64 {
    1e-3 * from_db(level_dbm)
}

pub fn watts_to_dbm(power_w: f64) -> Result<f64> {
    Ok(db(power_w)? + 30.0)
}

pub fn per_watt_to_percent(a_per_watt: f64) -> f64 {
    a_per_watt * 100.0
}

pub fn percent_to_per_watt(a_percent_per_watt: f64) -> f64 {
    a_percent_per_watt / 100.0
}
