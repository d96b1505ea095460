//! Small shared numerical helpers.

use crate::error::{Error, Result};

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        // 1 − x²/6 + x⁴/120 is exact to double precision here
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Argument at which `sinc²(x) = ½`.
pub const SINC2_HALF_MAX_ARG: f64 = 1.391_557_378_251_51;

/// Left and right abscissae where a sampled single-peaked curve falls to half
/// of its maximum, by linear interpolation between the bracketing samples.
pub fn half_max_crossings(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::Precondition(
            "half-maximum search needs at least 3 matching samples".into(),
        ));
    }
    let (peak_idx, &peak) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    if !(peak > 0.0) {
        return Err(Error::Precondition("curve has no positive maximum".into()));
    }
    let half = 0.5 * peak;
    let interp = |a: usize, b: usize| x[a] + (half - y[a]) * (x[b] - x[a]) / (y[b] - y[a]);

    let right = (peak_idx + 1..y.len())
        .find(|&k| y[k] <= half)
        .map(|k| interp(k - 1, k));
    let left = (0..peak_idx)
        .rev()
        .find(|&k| y[k] <= half)
        .map(|k| interp(k + 1, k));
    match (left, right) {
        (Some(l), Some(r)) => Ok((l, r)),
        _ => Err(Error::Range {
            what: "half-maximum crossing not inside the sampled grid; widen the grid".into(),
            value: peak,
            min: x[0],
            max: x[x.len() - 1],
        }),
    }
}

/// Linear interpolation in a table sorted by ascending abscissa.
pub fn interpolate(xs: &[f64], ys: &[f64], x: f64, what: &str) -> Result<f64> {
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    if !(x >= lo && x <= hi) {
        return Err(Error::range(what, x, lo, hi));
    }
    let k = xs.partition_point(|&v| v <= x);
    if k == 0 {
        return Ok(ys[0]);
    }
    if k >= xs.len() {
        return Ok(ys[xs.len() - 1]);
    }
    if xs[k - 1] == x {
        return Ok(ys[k - 1]);
    }
    let t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    Ok(ys[k - 1] + t * (ys[k] - ys[k - 1]))
}
