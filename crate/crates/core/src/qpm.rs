//! First-order quasi-phase matching for second-harmonic generation.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{interpolate, sinc};
use crate::units;

/// Design point of a periodically poled device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseMatchSpec {
    pub fundamental_wavelength_um: f64,
    pub device_length_m: f64,
    pub poling_period_um: f64,
    pub n_eff_fundamental: f64,
    pub n_eff_second_harmonic: f64,
}

impl PhaseMatchSpec {
    /// Designs the poling period so that the mismatch vanishes at
    /// `fundamental_wavelength_um`, using the tabulated indices there.
    pub fn design(
        dispersion: &QpmDispersion,
        fundamental_wavelength_um: f64,
        device_length_m: f64,
    ) -> Result<Self> {
        if !(device_length_m > 0.0) {
            return Err(Error::Precondition(format!(
                "device_length must be > 0, got {device_length_m} m"
            )));
        }
        let (n_f, n_sh) = dispersion.indices(fundamental_wavelength_um)?;
        Ok(PhaseMatchSpec {
            fundamental_wavelength_um,
            device_length_m,
            poling_period_um: poling_period(n_f, n_sh, fundamental_wavelength_um)?,
            n_eff_fundamental: n_f,
            n_eff_second_harmonic: n_sh,
        })
    }
}

/// Λ = λ / (2 (n_SH − n_F)), all lengths in μm.
pub fn poling_period(
    n_eff_fund: f64,
    n_eff_sh: f64,
    fundamental_wavelength_um: f64,
) -> Result<f64> {
    if !(fundamental_wavelength_um > 0.0) {
        return Err(Error::Precondition(format!(
            "wavelength must be > 0, got {fundamental_wavelength_um}"
        )));
    }
    let dn = n_eff_sh - n_eff_fund;
    if !(dn > 0.0) {
        return Err(Error::Dispersion(format!(
            "first-order QPM needs n_SH > n_F (normal dispersion), got n_SH - n_F = {dn}"
        )));
    }
    Ok(fundamental_wavelength_um / (2.0 * dn))
}

/// Effective index versus wavelength, linearly interpolated between points.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionTable {
    wavelengths_um: Vec<f64>,
    indices: Vec<f64>,
}

impl DispersionTable {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Precondition("dispersion table is empty".into()));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Precondition(
                "dispersion table has duplicate wavelengths".into(),
            ));
        }
        let (wavelengths_um, indices) = points.into_iter().unzip();
        Ok(DispersionTable {
            wavelengths_um,
            indices,
        })
    }

    /// Samples an index function on the given wavelengths.
    pub fn from_fn<F>(wavelengths_um: &[f64], index: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let points = wavelengths_um
            .iter()
            .map(|&l| index(l).map(|n| (l, n)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(points)
    }

    pub fn index_at(&self, wavelength_um: f64) -> Result<f64> {
        interpolate(
            &self.wavelengths_um,
            &self.indices,
            wavelength_um,
            "wavelength (um) outside dispersion table",
        )
    }

    pub fn range(&self) -> (f64, f64) {
        (
            self.wavelengths_um[0],
            self.wavelengths_um[self.wavelengths_um.len() - 1],
        )
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.wavelengths_um
            .iter()
            .copied()
            .zip(self.indices.iter().copied())
    }
}

/// Fundamental- and second-harmonic-mode index tables.
#[derive(Debug, Clone, PartialEq)]
pub struct QpmDispersion {
    pub fundamental: DispersionTable,
    /// Tabulated against the SH wavelength itself (λ/2).
    pub second_harmonic: DispersionTable,
}

impl QpmDispersion {
    /// (n_F(λ), n_SH(λ/2))
    pub fn indices(&self, fundamental_wavelength_um: f64) -> Result<(f64, f64)> {
        Ok((
            self.fundamental.index_at(fundamental_wavelength_um)?,
            self.second_harmonic
                .index_at(0.5 * fundamental_wavelength_um)?,
        ))
    }
}

/// Δk(λ) = 4π (n_SH(λ/2) − n_F(λ)) / λ − 2π/Λ, in m⁻¹.
pub fn phase_mismatch(
    spec: &PhaseMatchSpec,
    dispersion: &QpmDispersion,
    fundamental_wavelength_um: f64,
) -> Result<f64> {
    let (n_f, n_sh) = dispersion.indices(fundamental_wavelength_um)?;
    let lambda_m = fundamental_wavelength_um * 1e-6;
    let period_m = spec.poling_period_um * 1e-6;
    Ok(4.0 * PI * (n_sh - n_f) / lambda_m - 2.0 * PI / period_m)
}

/// Normalised SH efficiency `sinc²(Δk L / 2)` at each fundamental wavelength.
pub fn tuning_curve(
    spec: &PhaseMatchSpec,
    dispersion: &QpmDispersion,
    wavelengths_um: &[f64],
) -> Result<Vec<f64>> {
    if !(spec.device_length_m > 0.0 && spec.poling_period_um > 0.0) {
        return Err(Error::Precondition(
            "device length and poling period must be > 0".into(),
        ));
    }
    wavelengths_um
        .iter()
        .map(|&l| {
            let dk = phase_mismatch(spec, dispersion, l)?;
            Ok(sinc(0.5 * dk * spec.device_length_m).powi(2))
        })
        .collect()
}

/// Normalised conversion efficiency `a = P_SH / P_F²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShEfficiency {
    pub per_watt: f64,
}

impl ShEfficiency {
    pub fn percent_per_watt(&self) -> f64 {
        units::per_watt_to_percent(self.per_watt)
    }

    /// Low-gain SH power predicted for a given fundamental power.
    pub fn predicted_sh_power(&self, fundamental_w: f64) -> f64 {
        self.per_watt * fundamental_w * fundamental_w
    }
}

pub fn sh_efficiency_normalized(fundamental_in_w: f64, sh_out_w: f64) -> Result<ShEfficiency> {
    if !(fundamental_in_w > 0.0) || !(sh_out_w >= 0.0) {
        return Err(Error::Precondition(format!(
            "need fundamental power > 0 and SH power >= 0, got {fundamental_in_w} W, {sh_out_w} W"
        )));
    }
    Ok(ShEfficiency {
        per_watt: sh_out_w / (fundamental_in_w * fundamental_in_w),
    })
}
