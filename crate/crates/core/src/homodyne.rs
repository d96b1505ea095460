//! Balanced-homodyne measurement of the squeezed vacuum: phase-scanned
//! zero-span traces and sideband-frequency roll-off of the measured levels.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numerics::interpolate;
use crate::squeezer::{squeeze_levels, SqueezerParams};
use crate::units;

/// V(θ) = R₋ cos²θ + R₊ sin²θ, relative to shot noise.
pub fn quadrature_variance(params: &SqueezerParams, pump_w: f64, lo_phase: f64) -> Result<f64> {
    let r = squeeze_levels(params, pump_w)?;
    let (s, c) = lo_phase.sin_cos();
    Ok(r.minus * c * c + r.plus * s * s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanWaveform {
    Triangle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSettings {
    pub waveform: ScanWaveform,
    pub scan_frequency_hz: f64,
    /// LO phase swept during each half period, rad.
    pub phase_excursion_rad: f64,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings {
            waveform: ScanWaveform::Triangle,
            scan_frequency_hz: 0.5,
            phase_excursion_rad: 2.0 * PI,
            duration_s: 2.0,
            sample_rate_hz: 10_000.0,
        }
    }
}

impl ScanSettings {
    /// LO phase at time `t`: a triangle from 0 up to the excursion and back
    /// once per scan period.
    pub fn lo_phase(&self, t: f64) -> f64 {
        match self.waveform {
            ScanWaveform::Triangle => {
                let u = (t * self.scan_frequency_hz).rem_euclid(1.0);
                let tri = if u < 0.5 { 2.0 * u } else { 2.0 * (1.0 - u) };
                self.phase_excursion_rad * tri
            }
        }
    }

    /// Times at which the LO phase reaches the top of the triangle.
    pub fn apex_times(&self) -> Vec<f64> {
        let period = 1.0 / self.scan_frequency_hz;
        (0..)
            .map(|k| (k as f64 + 0.5) * period)
            .take_while(|&t| t <= self.duration_s)
            .collect()
    }

    /// Noise-fringe rate (V is π-periodic in θ), Hz.
    pub fn fringe_rate_hz(&self) -> f64 {
        2.0 * self.scan_frequency_hz * self.phase_excursion_rad / PI
    }

    pub fn sample_count(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scan_frequency_hz > 0.0 && self.phase_excursion_rad > 0.0) {
            return Err(Error::Settings(
                "scan_frequency and phase_excursion must be > 0".into(),
            ));
        }
        if !(self.duration_s > 0.0 && self.sample_rate_hz > 0.0) {
            return Err(Error::Settings(
                "duration and sample_rate must be > 0".into(),
            ));
        }
        if !(self.sample_rate_hz > 2.0 * self.fringe_rate_hz()) {
            return Err(Error::Settings(format!(
                "sample_rate {} Hz aliases the {} Hz noise fringes (need > {} Hz)",
                self.sample_rate_hz,
                self.fringe_rate_hz(),
                2.0 * self.fringe_rate_hz()
            )));
        }
        if self.sample_count() < 2 {
            return Err(Error::Settings("trace needs at least 2 samples".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzerSettings {
    pub center_frequency_hz: f64,
    pub rbw_hz: f64,
    pub vbw_hz: f64,
    pub shot_level_dbm: f64,
    pub circuit_level_dbm: f64,
}

impl Default for AnalyzerSettings {
    fn default() -> Self {
        AnalyzerSettings {
            center_frequency_hz: 20e6,
            rbw_hz: 5e6,
            vbw_hz: 3e3,
            shot_level_dbm: -30.0,
            circuit_level_dbm: -50.0,
        }
    }
}

impl AnalyzerSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.vbw_hz > 0.0 && self.rbw_hz > self.vbw_hz) {
            return Err(Error::Settings(format!(
                "need rbw > vbw > 0, got rbw {} Hz, vbw {} Hz",
                self.rbw_hz, self.vbw_hz
            )));
        }
        if !(self.circuit_level_dbm < self.shot_level_dbm) {
            return Err(Error::Settings(format!(
                "circuit level {} dBm must be below shot level {} dBm",
                self.circuit_level_dbm, self.shot_level_dbm
            )));
        }
        Ok(())
    }

    /// Relative standard deviation of a zero-span power reading after the
    /// video filter: `√(vbw / rbw)`.
    pub fn relative_noise_std(&self) -> f64 {
        (self.vbw_hz / self.rbw_hz).sqrt()
    }

    pub fn circuit_to_shot(&self) -> f64 {
        units::from_db(self.circuit_level_dbm - self.shot_level_dbm)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomodyneTrace {
    pub time_s: Vec<f64>,
    pub power_dbm: Vec<f64>,
    pub scan: ScanSettings,
    pub analyzer: AnalyzerSettings,
}

impl HomodyneTrace {
    pub fn min_dbm(&self) -> f64 {
        self.power_dbm.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_dbm(&self) -> f64 {
        self.power_dbm
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Noise-free trace power in mW: shot·V(θ(t)) + circuit.
pub fn expected_trace_mw(
    params: &SqueezerParams,
    pump_w: f64,
    scan: &ScanSettings,
    analyzer: &AnalyzerSettings,
) -> Result<Vec<f64>> {
    scan.validate()?;
    analyzer.validate()?;
    let r = squeeze_levels(params, pump_w)?;
    let shot = units::from_db(analyzer.shot_level_dbm);
    let circuit = units::from_db(analyzer.circuit_level_dbm);
    Ok((0..scan.sample_count())
        .map(|k| {
            let (s, c) = scan.lo_phase(k as f64 / scan.sample_rate_hz).sin_cos();
            shot * (r.minus * c * c + r.plus * s * s) + circuit
        })
        .collect())
}

/// Zero-span spectrum-analyser trace under LO phase scanning.
///
/// Each sample of the expected power gets a Gaussian relative fluctuation,
/// then a first-order video low-pass at `vbw`. The pre-filter spread is chosen
/// so the filtered trace has relative standard deviation `√(vbw/rbw)`.
/// Readings are floored at the circuit level. Same inputs and seed give the
/// same trace bit for bit.
pub fn phase_scan_trace(
    params: &SqueezerParams,
    pump_w: f64,
    scan: &ScanSettings,
    analyzer: &AnalyzerSettings,
    seed: u64,
) -> Result<HomodyneTrace> {
    let expected = expected_trace_mw(params, pump_w, scan, analyzer)?;
    let alpha = 1.0 - (-2.0 * PI * analyzer.vbw_hz / scan.sample_rate_hz).exp();
    let sigma_pre = analyzer.relative_noise_std() * ((2.0 - alpha) / alpha).sqrt();
    let circuit = units::from_db(analyzer.circuit_level_dbm);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = 0.0;
    let mut time_s = Vec::with_capacity(expected.len());
    let mut power_dbm = Vec::with_capacity(expected.len());
    for (k, &p) in expected.iter().enumerate() {
        let xi: f64 = StandardNormal.sample(&mut rng);
        // The first sample starts the filter in its stationary state.
        state = if k == 0 {
            p * (1.0 + analyzer.relative_noise_std() * xi)
        } else {
            state + alpha * (p * (1.0 + sigma_pre * xi) - state)
        };
        time_s.push(k as f64 / scan.sample_rate_hz);
        power_dbm.push(10.0 * state.max(circuit).log10());
    }
    Ok(HomodyneTrace {
        time_s,
        power_dbm,
        scan: *scan,
        analyzer: *analyzer,
    })
}

/// Piecewise-linear function of frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    freqs_hz: Vec<f64>,
    values: Vec<f64>,
}

impl FrequencyTable {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Precondition("frequency table is empty".into()));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (freqs_hz, values) = points.into_iter().unzip();
        Ok(FrequencyTable { freqs_hz, values })
    }

    pub fn at(&self, freq_hz: f64) -> Result<f64> {
        interpolate(
            &self.freqs_hz,
            &self.values,
            freq_hz,
            "frequency (Hz) outside response table",
        )
    }
}

/// Detector power response G(f) relative to its low-frequency value.
#[derive(Debug, Clone, PartialEq)]
pub enum DetectorResponse {
    Flat,
    /// Two coincident real poles: G(f) = 1 / (1 + (f/f_c)²)².
    TwoPole {
        corner_hz: f64,
    },
    Table(FrequencyTable),
}

impl DetectorResponse {
    pub fn gain(&self, freq_hz: f64) -> Result<f64> {
        let g = match self {
            DetectorResponse::Flat => 1.0,
            DetectorResponse::TwoPole { corner_hz } => {
                let x = freq_hz / corner_hz;
                1.0 / (1.0 + x * x).powi(2)
            }
            DetectorResponse::Table(t) => t.at(freq_hz)?,
        };
        if !(g > 0.0 && g <= 1.0) {
            return Err(Error::Precondition(format!(
                "detector response must lie in (0, 1], got {g} at {freq_hz} Hz"
            )));
        }
        Ok(g)
    }
}

/// Circuit noise relative to the low-frequency shot-noise level.
#[derive(Debug, Clone, PartialEq)]
pub enum CircuitNoise {
    Constant(f64),
    Table(FrequencyTable),
}

impl CircuitNoise {
    pub fn ratio(&self, freq_hz: f64) -> Result<f64> {
        let c = match self {
            CircuitNoise::Constant(c) => *c,
            CircuitNoise::Table(t) => t.at(freq_hz)?,
        };
        if !(c >= 0.0) {
            return Err(Error::Precondition(format!(
                "circuit-to-shot ratio must be >= 0, got {c} at {freq_hz} Hz"
            )));
        }
        Ok(c)
    }
}

/// Measured noise relative to the measured shot level: (G R + c) / (G + c).
pub fn measured_relative_noise(true_level: f64, detector_gain: f64, circuit_ratio: f64) -> f64 {
    (detector_gain * true_level + circuit_ratio) / (detector_gain + circuit_ratio)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyPoint {
    pub freq_hz: f64,
    pub squeezing_db: f64,
    pub antisqueezing_db: f64,
    pub shot_dbm: f64,
    pub circuit_dbm: f64,
}

pub fn measured_squeezing_vs_frequency(
    params: &SqueezerParams,
    pump_w: f64,
    detector: &DetectorResponse,
    circuit: &CircuitNoise,
    shot_level_dbm: f64,
    freqs_hz: &[f64],
) -> Result<Vec<FrequencyPoint>> {
    let r = squeeze_levels(params, pump_w)?;
    freqs_hz
        .iter()
        .map(|&f| {
            let g = detector.gain(f)?;
            let c = circuit.ratio(f)?;
            Ok(FrequencyPoint {
                freq_hz: f,
                squeezing_db: units::db(measured_relative_noise(r.minus, g, c))?,
                antisqueezing_db: units::db(measured_relative_noise(r.plus, g, c))?,
                shot_dbm: shot_level_dbm + 10.0 * g.log10(),
                circuit_dbm: if c > 0.0 {
                    shot_level_dbm + 10.0 * c.log10()
                } else {
                    f64::NEG_INFINITY
                },
            })
        })
        .collect()
}
