use rayon::prelude::*;

use super::geometry::{build_grid, GridOptions, WaveguideGeometry};
use super::solve::{solve_modes, ModeSolution, SolverOptions};
use crate::error::{Error, Result};

pub const DEFAULT_BOUNDARY_TOLERANCE_UM: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint {
    pub wavelength_um: f64,
    pub effective_index: f64,
}

/// Settings shared by the geometry-level sweeps.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SweepOptions {
    pub grid: GridOptions,
    pub solver: SolverOptions,
}

/// Guided modes of a geometry at one wavelength (grid + solve).
pub fn modes_at(
    geometry: &WaveguideGeometry,
    wavelength_um: f64,
    n_modes: usize,
    options: &SweepOptions,
) -> Result<Vec<ModeSolution>> {
    let grid = build_grid(geometry, wavelength_um, &options.grid)?;
    solve_modes(&grid, wavelength_um, n_modes, &options.solver)
}

/// Fundamental-mode effective index at each wavelength.
///
/// Wavelengths are solved independently (in parallel); each result equals a
/// standalone [`modes_at`] call.
pub fn dispersion_sweep(
    geometry: &WaveguideGeometry,
    wavelengths_um: &[f64],
    options: &SweepOptions,
) -> Result<Vec<DispersionPoint>> {
    wavelengths_um
        .par_iter()
        .map(|&lambda| {
            let modes = modes_at(geometry, lambda, 1, options)
                .map_err(|e| e.context(format!("dispersion sweep at {lambda} um")))?;
            let fundamental = modes.first().ok_or_else(|| {
                Error::Numerical {
                    message: "no guided mode".into(),
                    residual: f64::NAN,
                    iterations: 0,
                }
                .context(format!("dispersion sweep at {lambda} um"))
            })?;
            Ok(DispersionPoint {
                wavelength_um: lambda,
                effective_index: fundamental.effective_index,
            })
        })
        .collect()
}

/// Number of guided modes, counting at most `limit`.
pub fn guided_mode_count(
    geometry: &WaveguideGeometry,
    wavelength_um: f64,
    limit: usize,
    options: &SweepOptions,
) -> Result<usize> {
    Ok(modes_at(geometry, wavelength_um, limit, options)?.len())
}

/// Smallest top width (within `tolerance_um`) at which a second guided mode
/// appears, by bisection on the mode count. Returns the midpoint of the final
/// bracket.
pub fn single_mode_boundary(
    geometry: &WaveguideGeometry,
    wavelength_um: f64,
    width_range_um: (f64, f64),
    tolerance_um: f64,
    options: &SweepOptions,
) -> Result<f64> {
    let (mut lo, mut hi) = width_range_um;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Bracket(format!(
            "width range must satisfy 0 < low < high, got ({lo}, {hi})"
        )));
    }
    if !(tolerance_um > 0.0) {
        return Err(Error::Precondition("boundary tolerance must be > 0".into()));
    }
    let count = |w: f64| {
        guided_mode_count(&geometry.with_top_width(w), wavelength_um, 2, options)
            .map_err(|e| e.context(format!("mode count at top width {w} um")))
    };
    let (n_lo, n_hi) = rayon::join(|| count(lo), || count(hi));
    let (n_lo, n_hi) = (n_lo?, n_hi?);
    if n_lo != 1 || n_hi < 2 {
        return Err(Error::Bracket(format!(
            "width range ({lo}, {hi}) um does not bracket the single-mode boundary \
             ({n_lo} guided mode(s) at the low end, {n_hi} at the high end)"
        )));
    }
    while hi - lo > tolerance_um {
        let mid = 0.5 * (lo + hi);
        if count(mid)? >= 2 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Guided effective indices at one top width.
#[derive(Debug, Clone, PartialEq)]
pub struct WidthPoint {
    pub top_width_um: f64,
    /// Descending; its length is the number of guided modes found.
    pub effective_indices: Vec<f64>,
}

/// Guided modes (at most `n_modes`) at each top width, solved in parallel.
pub fn width_sweep(
    geometry: &WaveguideGeometry,
    wavelength_um: f64,
    widths_um: &[f64],
    n_modes: usize,
    options: &SweepOptions,
) -> Result<Vec<WidthPoint>> {
    if widths_um.is_empty() {
        return Err(Error::Precondition("width list is empty".into()));
    }
    widths_um
        .par_iter()
        .map(|&w| {
            let modes = modes_at(&geometry.with_top_width(w), wavelength_um, n_modes, options)
                .map_err(|e| e.context(format!("width sweep at top width {w} um")))?;
            Ok(WidthPoint {
                top_width_um: w,
                effective_indices: modes.iter().map(|m| m.effective_index).collect(),
            })
        })
        .collect()
}
