//! Run configuration: one TOML file with a table per subcommand, plus
//! `--set key=value` overrides that win over the file.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use toml::{Table, Value};

use crate::exit::CliError;

pub const SECTIONS: [&str; 7] = [
    "modes",
    "qpm",
    "squeeze",
    "fit",
    "trace",
    "freqsweep",
    "spectrum",
];

/// Parsed file: the optional top-level seed and the table for one subcommand.
pub struct RawConfig {
    pub seed: Option<u64>,
    pub section: Table,
}

pub fn load(
    path: Option<&Path>,
    section: &str,
    overrides: &[String],
) -> Result<RawConfig, CliError> {
    let mut root = match path {
        Some(p) => {
            let text =
                fs::read_to_string(p).map_err(|e| CliError::io(format!("{}: {e}", p.display())))?;
            text.parse::<Table>()
                .map_err(|e| CliError::config(format!("{}: {e}", p.display())))?
        }
        None => Table::new(),
    };
    for key in root.keys() {
        if key != "seed" && !SECTIONS.contains(&key.as_str()) {
            return Err(CliError::config(format!(
                "unknown top-level key `{key}` (expected `seed` or one of {})",
                SECTIONS.join(", ")
            )));
        }
    }
    let seed = match root.remove("seed") {
        None => None,
        Some(Value::Integer(n)) if n >= 0 => Some(n as u64),
        Some(v) => {
            return Err(CliError::config(format!(
                "`seed` must be a non-negative integer, got {v}"
            )))
        }
    };
    let mut table = match root.remove(section) {
        None => Table::new(),
        Some(Value::Table(t)) => t,
        Some(_) => return Err(CliError::config(format!("`{section}` must be a table"))),
    };
    for item in overrides {
        apply_override(&mut table, item)?;
    }
    Ok(RawConfig {
        seed,
        section: table,
    })
}

/// `key=value` or `a.b=value`; the value is read as a TOML value, or as a
/// string if it does not parse as one.
fn apply_override(table: &mut Table, item: &str) -> Result<(), CliError> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("--set expects key=value, got `{item}`")))?;
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let mut cursor = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cursor
            .entry(part.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        cursor = entry
            .as_table_mut()
            .ok_or_else(|| CliError::config(format!("--set {key}: `{part}` is not a table")))?;
    }
    cursor.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Deserializes a section. The section is re-rendered as TOML first so that
/// errors quote the offending key and value.
pub fn parse_section<T: DeserializeOwned>(name: &str, table: Table) -> Result<T, CliError> {
    let text = toml::to_string(&table).map_err(|e| CliError::config(e.to_string()))?;
    toml::from_str(&text).map_err(|e| CliError::config(format!("[{name}] {e}")))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveguideConfig {
    /// Built-in material name or path to a material file.
    pub core: String,
    pub substrate: String,
    pub core_thickness_um: f64,
    pub top_width_um: f64,
    pub sidewall_angle_deg: f64,
    pub cladding_index: f64,
    pub polarization: String,
    pub resolution: f64,
    pub padding_um: f64,
}

impl Default for WaveguideConfig {
    fn default() -> Self {
        WaveguideConfig {
            core: "MgLN-e".into(),
            substrate: "SLT-e".into(),
            core_thickness_um: 5.0,
            top_width_um: 6.0,
            sidewall_angle_deg: 73.5,
            cladding_index: 1.0,
            polarization: "vertical".into(),
            resolution: 20.0,
            padding_um: 3.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModesConfig {
    pub waveguide: WaveguideConfig,
    pub wavelength_um: f64,
    pub top_widths_um: Vec<f64>,
    pub n_modes: usize,
    /// Directory for per-width mode-field files.
    pub field_dir: Option<String>,
    pub dispersion_wavelengths_um: Vec<f64>,
    pub dispersion_out: Option<String>,
    /// Locate the single-mode boundary by bisection over the width range.
    pub boundary: bool,
}

impl Default for ModesConfig {
    fn default() -> Self {
        ModesConfig {
            waveguide: WaveguideConfig::default(),
            wavelength_um: 1.55,
            top_widths_um: (0..=9).map(|k| 3.0 + k as f64).collect(),
            n_modes: 3,
            field_dir: None,
            dispersion_wavelengths_um: Vec::new(),
            dispersion_out: None,
            boundary: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QpmConfig {
    pub waveguide: WaveguideConfig,
    /// "waveguide" (mode solver) or "bulk" (core material index).
    pub index_source: String,
    pub design_wavelength_um: f64,
    pub device_length_m: f64,
    /// Overrides the designed period.
    pub poling_period_um: Option<f64>,
    pub scan_start_um: f64,
    pub scan_stop_um: f64,
    pub scan_points: usize,
    /// Index samples per harmonic for the interpolation tables.
    pub table_points: usize,
}

impl Default for QpmConfig {
    fn default() -> Self {
        QpmConfig {
            waveguide: WaveguideConfig::default(),
            index_source: "waveguide".into(),
            design_wavelength_um: 1.55,
            device_length_m: 0.045,
            poling_period_um: None,
            scan_start_um: 1.548,
            scan_stop_um: 1.552,
            scan_points: 401,
            table_points: 5,
        }
    }
}

/// η given directly or as a loss budget.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceConfig {
    pub eta: Option<f64>,
    pub l_wg: Option<f64>,
    pub l_hd: Option<f64>,
    pub a_percent_per_watt: f64,
}

impl Default for SourceConfig {
    fn default() -> Self {
        SourceConfig {
            eta: None,
            l_wg: None,
            l_hd: None,
            a_percent_per_watt: 1210.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SqueezeConfig {
    pub source: SourceConfig,
    pub pump_mw: Vec<f64>,
}

impl Default for SqueezeConfig {
    fn default() -> Self {
        SqueezeConfig {
            source: SourceConfig::default(),
            pump_mw: (0..=16).map(|k| 25.0 * k as f64).chain([304.0]).collect(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub input: Option<String>,
    pub l_hd: f64,
    pub curve_points: usize,
    pub curve_max_mw: Option<f64>,
    pub max_iterations: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            input: None,
            l_hd: 0.06,
            curve_points: 201,
            curve_max_mw: None,
            max_iterations: 500,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub waveform: String,
    pub scan_frequency_hz: f64,
    pub phase_excursion_rad: f64,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            waveform: "triangle".into(),
            scan_frequency_hz: 0.5,
            phase_excursion_rad: 2.0 * PI,
            duration_s: 2.0,
            sample_rate_hz: 10_000.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzerConfig {
    pub center_frequency_hz: f64,
    pub rbw_hz: f64,
    pub vbw_hz: f64,
    pub shot_level_dbm: f64,
    pub circuit_level_dbm: f64,
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        AnalyzerConfig {
            center_frequency_hz: 20e6,
            rbw_hz: 5e6,
            vbw_hz: 3e3,
            shot_level_dbm: -30.0,
            circuit_level_dbm: -50.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceConfig {
    pub source: SourceConfig,
    pub pump_mw: f64,
    pub scan: ScanConfig,
    pub analyzer: AnalyzerConfig,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig {
            source: SourceConfig::default(),
            pump_mw: 304.0,
            scan: ScanConfig::default(),
            analyzer: AnalyzerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FreqSweepConfig {
    pub source: SourceConfig,
    pub pump_mw: f64,
    pub shot_level_dbm: f64,
    /// Constant circuit level, used unless `circuit_table_dbm` is given.
    pub circuit_level_dbm: f64,
    /// `[[freq_hz, dbm], ...]`
    pub circuit_table_dbm: Vec<[f64; 2]>,
    /// "flat", "two_pole" or "table".
    pub detector: String,
    pub corner_hz: f64,
    /// `[[freq_hz, gain], ...]`
    pub detector_table: Vec<[f64; 2]>,
    pub start_hz: f64,
    pub stop_hz: f64,
    pub points: usize,
}

impl Default for FreqSweepConfig {
    fn default() -> Self {
        FreqSweepConfig {
            source: SourceConfig::default(),
            pump_mw: 304.0,
            shot_level_dbm: -30.0,
            circuit_level_dbm: -50.0,
            circuit_table_dbm: Vec::new(),
            detector: "two_pole".into(),
            corner_hz: 400e6,
            detector_table: Vec::new(),
            start_hz: 10e6,
            stop_hz: 1e9,
            points: 100,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub center_frequency_thz: f64,
    pub length_m: f64,
    /// "calibrate" (from `target_hwhm_thz`), "value" (`beta2`) or
    /// "waveguide" (mode-solver dispersion).
    pub beta2_source: String,
    pub beta2: Option<f64>,
    pub target_hwhm_thz: f64,
    pub beta4: f64,
    pub waveguide: WaveguideConfig,
    /// Total gain √(aP); if absent it comes from `pump_mw` and the source.
    pub g0: Option<f64>,
    pub pump_mw: Option<f64>,
    pub a_percent_per_watt: f64,
    pub span_thz: f64,
    pub points: usize,
    pub osa: bool,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            center_frequency_thz: 193.4,
            length_m: 0.045,
            beta2_source: "calibrate".into(),
            beta2: None,
            target_hwhm_thz: 2.5,
            beta4: 0.0,
            waveguide: WaveguideConfig::default(),
            g0: None,
            pump_mw: None,
            a_percent_per_watt: 1210.0,
            span_thz: 6.0,
            points: 4001,
            osa: false,
        }
    }
}
