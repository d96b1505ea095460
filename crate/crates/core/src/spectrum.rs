//! Frequency-domain model of single-pass degenerate down-conversion:
//! sideband phase mismatch, Bogoliubov gain profile, fluorescence spectrum
//! and its half width.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::materials::{dispersion_from_index, GroupDispersion, SPEED_OF_LIGHT};
use crate::modesolver::{modes_at, SweepOptions, WaveguideGeometry};
use crate::numerics::{half_max_crossings, SINC2_HALF_MAX_ARG};

/// Wavelength step used for waveguide dispersion, μm.
pub const WAVEGUIDE_DERIVATIVE_STEP_UM: f64 = 0.02;

/// OSA resolution bandwidth, m.
pub const OSA_RESOLUTION_M: f64 = 50e-12;

/// Local dispersion of the waveguide around the degenerate signal frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionLocal {
    pub center_frequency_hz: f64,
    /// s²/m
    pub beta2: f64,
    /// s⁴/m
    pub beta4: f64,
    pub length_m: f64,
    /// Largest detuning for which the expansion is trusted, Hz.
    pub max_detuning_hz: f64,
}

impl DispersionLocal {
    pub fn new(center_frequency_hz: f64, beta2: f64, length_m: f64) -> Result<Self> {
        let d = DispersionLocal {
            center_frequency_hz,
            beta2,
            beta4: 0.0,
            length_m,
            max_detuning_hz: 0.5 * center_frequency_hz,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length_m > 0.0) {
            return Err(Error::Precondition(format!(
                "length must be > 0, got {} m",
                self.length_m
            )));
        }
        if !(self.beta2.is_finite() && self.beta4.is_finite()) {
            return Err(Error::Precondition("beta2 and beta4 must be finite".into()));
        }
        if !(self.center_frequency_hz > 0.0 && self.max_detuning_hz > 0.0) {
            return Err(Error::Precondition(
                "center frequency and max detuning must be > 0".into(),
            ));
        }
        Ok(())
    }

    /// Degenerate signal wavelength, μm.
    pub fn center_wavelength_um(&self) -> f64 {
        SPEED_OF_LIGHT / self.center_frequency_hz * 1e6
    }

    fn check_detuning(&self, detuning_hz: f64) -> Result<()> {
        if !(detuning_hz.abs() <= self.max_detuning_hz) {
            return Err(Error::range(
                "detuning (Hz) outside the dispersion expansion",
                detuning_hz,
                -self.max_detuning_hz,
                self.max_detuning_hz,
            ));
        }
        Ok(())
    }
}

/// Δk(Ω) = β₂Ω² + (β₄/12)Ω⁴ with Ω = 2π·detuning, in m⁻¹. Odd orders cancel
/// between signal and idler.
pub fn phase_mismatch(disp: &DispersionLocal, detuning_hz: f64) -> Result<f64> {
    disp.check_detuning(detuning_hz)?;
    let w2 = (2.0 * PI * detuning_hz).powi(2);
    Ok(disp.beta2 * w2 + disp.beta4 / 12.0 * w2 * w2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainSpectrum {
    pub detunings_hz: Vec<f64>,
    pub mu_abs: Vec<f64>,
    pub nu_abs: Vec<f64>,
    /// |ν|²
    pub photon_flux: Vec<f64>,
    pub center_frequency_hz: f64,
}

/// `|sinh(s)/s|` for s² = `s2` of either sign.
fn sinhc_abs(s2: f64) -> f64 {
    if s2.abs() < 1e-8 {
        return 1.0 + s2 / 6.0;
    }
    if s2 > 0.0 {
        let s = s2.sqrt();
        s.sinh() / s
    } else {
        let s = (-s2).sqrt();
        (s.sin() / s).abs()
    }
}

/// |ν(Ω)| = g₀ |sinh(s)/s| with s = √(g₀² − (ΔkL/2)²), |μ|² = 1 + |ν|².
/// At Ω = 0 the quadrature gains are exp(±2g₀).
pub fn bogoliubov_gain(
    g0: f64,
    disp: &DispersionLocal,
    detunings_hz: &[f64],
) -> Result<GainSpectrum> {
    if !(g0 >= 0.0 && g0.is_finite()) {
        return Err(Error::Precondition(format!(
            "total gain must be finite and >= 0, got {g0}"
        )));
    }
    disp.validate()?;
    let nu_abs = detunings_hz
        .par_iter()
        .map(|&f| {
            let half = 0.5 * phase_mismatch(disp, f)? * disp.length_m;
            Ok(g0 * sinhc_abs(g0 * g0 - half * half))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(GainSpectrum {
        detunings_hz: detunings_hz.to_vec(),
        mu_abs: nu_abs.iter().map(|n| (1.0 + n * n).sqrt()).collect(),
        photon_flux: nu_abs.iter().map(|n| n * n).collect(),
        nu_abs,
        center_frequency_hz: disp.center_frequency_hz,
    })
}

/// Symmetric detuning grid `[-max, max]` with `points` samples.
pub fn detuning_grid(max_detuning_hz: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n)
        .map(|k| max_detuning_hz * (2.0 * k as f64 / (n - 1) as f64 - 1.0))
        .collect()
}

/// Relative power spectral density against optical frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct FluorescenceSpectrum {
    /// Ascending.
    pub optical_freq_hz: Vec<f64>,
    pub psd_rel: Vec<f64>,
    pub center_frequency_hz: f64,
}

/// Maps |ν|² onto ν₀ + detuning. `osa_resolution_m`, if given, applies a
/// moving average whose full width is that wavelength resolution at ν₀.
pub fn fluorescence_spectrum(
    gain: &GainSpectrum,
    osa_resolution_m: Option<f64>,
) -> Result<FluorescenceSpectrum> {
    let mut pairs: Vec<(f64, f64)> = gain
        .detunings_hz
        .iter()
        .zip(&gain.photon_flux)
        .map(|(&f, &p)| (gain.center_frequency_hz + f, p))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (optical_freq_hz, mut psd_rel): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();

    if let Some(res) = osa_resolution_m {
        if !(res > 0.0) {
            return Err(Error::Precondition(format!(
                "OSA resolution must be > 0, got {res} m"
            )));
        }
        let lambda0 = SPEED_OF_LIGHT / gain.center_frequency_hz;
        let half_width_hz = 0.5 * SPEED_OF_LIGHT * res / (lambda0 * lambda0);
        psd_rel = moving_average(&optical_freq_hz, &psd_rel, half_width_hz);
    }
    Ok(FluorescenceSpectrum {
        optical_freq_hz,
        psd_rel,
        center_frequency_hz: gain.center_frequency_hz,
    })
}

/// Mean of all samples within ±`half_width` of each abscissa (x ascending).
fn moving_average(x: &[f64], y: &[f64], half_width: f64) -> Vec<f64> {
    let mut prefix = Vec::with_capacity(y.len() + 1);
    prefix.push(0.0);
    for v in y {
        prefix.push(prefix.last().unwrap() + v);
    }
    x.iter()
        .map(|&c| {
            let lo = x.partition_point(|&v| v < c - half_width);
            let hi = x.partition_point(|&v| v <= c + half_width);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// One-sided half width at half maximum, Hz (mean of both sides).
pub fn hwhm_bandwidth(spectrum: &FluorescenceSpectrum) -> Result<f64> {
    let (l, r) = half_max_crossings(&spectrum.optical_freq_hz, &spectrum.psd_rel)?;
    Ok(0.5 * (r - l))
}

/// Low-gain HWHM from β₂ and length: √(2·x½/(β₂L))/(2π), with sinc²(x½) = ½.
pub fn low_gain_hwhm(beta2: f64, length_m: f64) -> Result<f64> {
    if !(beta2 > 0.0 && length_m > 0.0) {
        return Err(Error::Precondition(format!(
            "need beta2 > 0 and length > 0, got {beta2} s^2/m, {length_m} m"
        )));
    }
    Ok((2.0 * SINC2_HALF_MAX_ARG / (beta2 * length_m)).sqrt() / (2.0 * PI))
}

/// β₂ for which the low-gain spectrum has the requested HWHM.
pub fn calibrate_beta2(target_hwhm_hz: f64, length_m: f64) -> Result<f64> {
    if !(target_hwhm_hz > 0.0 && length_m > 0.0) {
        return Err(Error::Precondition(format!(
            "need HWHM > 0 and length > 0, got {target_hwhm_hz} Hz, {length_m} m"
        )));
    }
    Ok(2.0 * SINC2_HALF_MAX_ARG / (length_m * (2.0 * PI * target_hwhm_hz).powi(2)))
}

/// Fundamental-mode group index and β₂ of a waveguide from mode-solver
/// effective indices at λ and λ ± `step_um`.
pub fn waveguide_dispersion(
    geometry: &WaveguideGeometry,
    wavelength_um: f64,
    step_um: f64,
    options: &SweepOptions,
) -> Result<GroupDispersion> {
    dispersion_from_index(
        |l| {
            modes_at(geometry, l, 1, options)?
                .first()
                .map(|m| m.effective_index)
                .ok_or_else(|| Error::Numerical {
                    message: format!("no guided mode at {l} um"),
                    residual: f64::NAN,
                    iterations: 0,
                })
        },
        wavelength_um,
        step_um,
    )
}
