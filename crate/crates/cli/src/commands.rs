use std::io::Write as _;
use std::path::{Path, PathBuf};

use wgsqueeze::homodyne::{
    measured_squeezing_vs_frequency, phase_scan_trace, AnalyzerSettings, CircuitNoise,
    DetectorResponse, FrequencyTable, ScanSettings, ScanWaveform,
};
use wgsqueeze::io;
use wgsqueeze::materials::{resolve_material, SPEED_OF_LIGHT};
use wgsqueeze::modesolver::{
    dispersion_sweep, modes_at, single_mode_boundary, width_sweep, GridOptions, Polarization,
    SweepOptions, WaveguideGeometry, DEFAULT_BOUNDARY_TOLERANCE_UM,
};
use wgsqueeze::qpm::{tuning_curve, DispersionTable, PhaseMatchSpec, QpmDispersion};
use wgsqueeze::spectrum::{
    bogoliubov_gain, calibrate_beta2, detuning_grid, fluorescence_spectrum, hwhm_bandwidth,
    waveguide_dispersion, DispersionLocal, OSA_RESOLUTION_M, WAVEGUIDE_DERIVATIVE_STEP_UM,
};
use wgsqueeze::squeezer::{
    eta_from_budget, fit_squeezer, infer_waveguide_loss, squeeze_levels, FitOptions, LossBudget,
    SqueezerParams,
};
use wgsqueeze::units;

use crate::config::*;
use crate::exit::{CliError, ConfigContext};

/// Where results go. CSV goes to `--out` or stdout; report lines go to stdout
/// when the CSV has its own file and to stderr otherwise.
pub struct Output {
    pub out: Option<PathBuf>,
    pub summary: bool,
}

impl Output {
    fn csv(&self, text: &str) -> Result<(), CliError> {
        match &self.out {
            Some(path) => io::write_text(path, text).map_err(CliError::from),
            None => std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::io(format!("stdout: {e}"))),
        }
    }

    fn report(&self, line: &str) {
        if self.out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
}

fn config_error(key: &str, message: impl std::fmt::Display) -> CliError {
    CliError::config(format!("{key}: {message}"))
}

fn geometry(c: &WaveguideConfig) -> Result<(WaveguideGeometry, SweepOptions), CliError> {
    let polarization = match c.polarization.as_str() {
        "vertical" => Polarization::Vertical,
        "horizontal" => Polarization::Horizontal,
        other => {
            return Err(config_error(
                "waveguide.polarization",
                format!("expected `vertical` or `horizontal`, got `{other}`"),
            ))
        }
    };
    let g = WaveguideGeometry {
        core_thickness_um: c.core_thickness_um,
        top_width_um: c.top_width_um,
        sidewall_angle_deg: c.sidewall_angle_deg,
        core: resolve_material(&c.core).key("waveguide.core")?,
        substrate: resolve_material(&c.substrate).key("waveguide.substrate")?,
        cladding_index: c.cladding_index,
        polarization,
    };
    g.validate().key("waveguide")?;
    let options = SweepOptions {
        grid: GridOptions {
            resolution: c.resolution,
            padding_um: c.padding_um,
            window_um: None,
        },
        ..SweepOptions::default()
    };
    Ok((g, options))
}

fn squeezer_params(c: &SourceConfig) -> Result<SqueezerParams, CliError> {
    let eta = match (c.eta, c.l_wg, c.l_hd) {
        (Some(eta), None, None) => eta,
        (None, Some(lwg), Some(lhd)) => {
            eta_from_budget(&LossBudget::new(lwg, lhd).key("source.l_wg/l_hd")?)
        }
        (None, None, None) => 0.79,
        _ => {
            return Err(config_error(
                "source",
                "give either `eta` or both `l_wg` and `l_hd`",
            ))
        }
    };
    SqueezerParams::from_percent_per_watt(eta, c.a_percent_per_watt).key("source")
}

fn pump_w(key: &str, mw: f64) -> Result<f64, CliError> {
    if mw >= 0.0 && mw.is_finite() {
        Ok(mw * 1e-3)
    } else {
        Err(config_error(
            key,
            format!("pump power must be >= 0 mW, got {mw}"),
        ))
    }
}

pub fn modes(c: ModesConfig, out: &Output) -> Result<(), CliError> {
    if c.top_widths_um.is_empty() {
        return Err(config_error("top_widths_um", "width list is empty"));
    }
    if c.n_modes == 0 {
        return Err(config_error("n_modes", "must be >= 1"));
    }
    let (g, options) = geometry(&c.waveguide)?;
    let points = width_sweep(&g, c.wavelength_um, &c.top_widths_um, c.n_modes, &options)?;
    out.csv(&io::width_sweep_csv(&points))?;

    if let Some(dir) = &c.field_dir {
        for &w in &c.top_widths_um {
            let modes = modes_at(&g.with_top_width(w), c.wavelength_um, c.n_modes, &options)
                .map_err(|e| e.context(format!("mode fields at top width {w} um")))?;
            for m in &modes {
                let path = Path::new(dir).join(format!("mode_w{w}_m{}.txt", m.order_label));
                io::write_text(&path, &io::render_mode_field(&m.into()))?;
            }
        }
    }
    if !c.dispersion_wavelengths_um.is_empty() {
        let path = c.dispersion_out.as_ref().ok_or_else(|| {
            config_error("dispersion_out", "needed with dispersion_wavelengths_um")
        })?;
        let d = dispersion_sweep(&g, &c.dispersion_wavelengths_um, &options)?;
        io::write_text(Path::new(path), &io::dispersion_csv(&d))?;
    }

    if out.summary {
        let onset = points.iter().find(|p| p.effective_indices.len() >= 2);
        match onset {
            Some(p) => out.report(&format!(
                "second guided mode first present at top width {} um",
                p.top_width_um
            )),
            None => out.report("single-mode at every listed width"),
        }
    }
    if c.boundary {
        let mut widths = c.top_widths_um.clone();
        widths.sort_by(f64::total_cmp);
        let w = single_mode_boundary(
            &g,
            c.wavelength_um,
            (widths[0], widths[widths.len() - 1]),
            DEFAULT_BOUNDARY_TOLERANCE_UM,
            &options,
        )?;
        out.report(&format!("single-mode boundary: top width {w:.2} um"));
    }
    Ok(())
}

pub fn qpm(c: QpmConfig, out: &Output) -> Result<(), CliError> {
    if c.scan_points < 2 || !(c.scan_stop_um > c.scan_start_um) {
        return Err(config_error(
            "scan_start_um/scan_stop_um/scan_points",
            "need start < stop and >= 2 points",
        ));
    }
    let (g, options) = geometry(&c.waveguide)?;
    let lo = c.scan_start_um.min(c.design_wavelength_um);
    let hi = c.scan_stop_um.max(c.design_wavelength_um);
    let n = c.table_points.max(2);
    let fund: Vec<f64> = (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .chain([c.design_wavelength_um])
        .collect();
    let mut fund = fund;
    fund.sort_by(f64::total_cmp);
    fund.dedup();
    let sh: Vec<f64> = fund.iter().map(|l| 0.5 * l).collect();

    let table = |ls: &[f64]| -> Result<DispersionTable, CliError> {
        match c.index_source.as_str() {
            "waveguide" => {
                let pts = dispersion_sweep(&g, ls, &options)?;
                Ok(DispersionTable::new(
                    pts.iter()
                        .map(|p| (p.wavelength_um, p.effective_index))
                        .collect(),
                )?)
            }
            "bulk" => Ok(DispersionTable::from_fn(ls, |l| {
                g.core.refractive_index(l)
            })?),
            other => Err(config_error(
                "index_source",
                format!("expected `waveguide` or `bulk`, got `{other}`"),
            )),
        }
    };
    let dispersion = QpmDispersion {
        fundamental: table(&fund)?,
        second_harmonic: table(&sh)?,
    };
    let mut design = PhaseMatchSpec::design(&dispersion, c.design_wavelength_um, c.device_length_m)
        .key("device_length_m")?;
    if let Some(p) = c.poling_period_um {
        if !(p > 0.0) {
            return Err(config_error("poling_period_um", "must be > 0"));
        }
        design.poling_period_um = p;
    }
    let scan: Vec<f64> = (0..c.scan_points)
        .map(|k| {
            c.scan_start_um
                + (c.scan_stop_um - c.scan_start_um) * k as f64 / (c.scan_points - 1) as f64
        })
        .collect();
    let eff = tuning_curve(&design, &dispersion, &scan)?;
    out.csv(&io::tuning_csv(&scan, &eff))?;
    out.report(&format!(
        "poling_period_um = {:.3}",
        design.poling_period_um
    ));
    out.report(&format!("device_length_m = {}", design.device_length_m));
    out.report(&format!(
        "design_wavelength_um = {}",
        design.fundamental_wavelength_um
    ));
    if out.summary {
        out.report(&format!(
            "n_eff fundamental {:.6}, second harmonic {:.6}",
            design.n_eff_fundamental, design.n_eff_second_harmonic
        ));
    }
    Ok(())
}

pub fn squeeze(c: SqueezeConfig, out: &Output) -> Result<(), CliError> {
    let params = squeezer_params(&c.source)?;
    let mut pumps = c.pump_mw.clone();
    pumps.sort_by(f64::total_cmp);
    pumps.dedup();
    if pumps.is_empty() {
        return Err(config_error("pump_mw", "pump list is empty"));
    }
    let mut rows = Vec::with_capacity(pumps.len());
    for &mw in &pumps {
        let l = squeeze_levels(&params, pump_w("pump_mw", mw)?)?;
        rows.push([mw, l.squeezing_db(), l.antisqueezing_db()]);
    }
    out.csv(&io::render_csv(
        &["pump_mw", "squeezing_db", "antisqueezing_db"],
        &rows,
    ))?;
    if out.summary {
        let last = rows[rows.len() - 1];
        out.report(&format!(
            "eta {:.4}, a {:.1} %/W; at {} mW: squeezing {:.2} dB, anti-squeezing {:.2} dB",
            params.eta,
            params.a_percent_per_watt(),
            last[0],
            last[1],
            last[2]
        ));
    }
    Ok(())
}

pub fn fit(c: FitConfig, input: Option<PathBuf>, out: &Output) -> Result<(), CliError> {
    let path = input
        .or_else(|| c.input.as_ref().map(PathBuf::from))
        .ok_or_else(|| config_error("input", "no sweep CSV given (use --input or `input`)"))?;
    let data = io::read_sweep_csv(&path)?;
    let report = fit_squeezer(
        &data,
        &FitOptions {
            max_iterations: c.max_iterations,
            ..FitOptions::default()
        },
    )?;
    let (se_eta, se_a) = report.std_errors();
    let max_mw = c
        .curve_max_mw
        .unwrap_or_else(|| 1.1 * data.iter().map(|d| d.pump_w * 1e3).fold(0.0, f64::max));
    out.csv(&io::model_curve_csv(
        &report.params,
        pump_w("curve_max_mw", max_mw)?,
        c.curve_points,
    ))?;
    out.report(&format!("eta = {:.4} +- {:.4}", report.params.eta, se_eta));
    out.report(&format!(
        "a = {:.1} +- {:.1} %/W",
        report.params.a_percent_per_watt(),
        units::per_watt_to_percent(se_a)
    ));
    out.report(&format!("rms residual = {:.4} dB", report.rms_db));
    out.report(&format!(
        "covariance diagonal = {:.3e}, {:.3e}",
        report.covariance[0][0], report.covariance[1][1]
    ));
    match infer_waveguide_loss(report.params.eta, c.l_hd) {
        Ok(lwg) => out.report(&format!("l_wg = {lwg:.4} (given l_hd = {})", c.l_hd)),
        Err(e) => out.report(&format!("l_wg not inferred: {e}")),
    }
    Ok(())
}

fn scan_settings(c: &ScanConfig) -> Result<ScanSettings, CliError> {
    let waveform = match c.waveform.as_str() {
        "triangle" => ScanWaveform::Triangle,
        other => {
            return Err(config_error(
                "scan.waveform",
                format!("only `triangle` is supported, got `{other}`"),
            ))
        }
    };
    let s = ScanSettings {
        waveform,
        scan_frequency_hz: c.scan_frequency_hz,
        phase_excursion_rad: c.phase_excursion_rad,
        duration_s: c.duration_s,
        sample_rate_hz: c.sample_rate_hz,
    };
    s.validate().key("scan")?;
    Ok(s)
}

pub fn trace(c: TraceConfig, seed: u64, out: &Output) -> Result<(), CliError> {
    let params = squeezer_params(&c.source)?;
    let scan = scan_settings(&c.scan)?;
    let a = &c.analyzer;
    let analyzer = AnalyzerSettings {
        center_frequency_hz: a.center_frequency_hz,
        rbw_hz: a.rbw_hz,
        vbw_hz: a.vbw_hz,
        shot_level_dbm: a.shot_level_dbm,
        circuit_level_dbm: a.circuit_level_dbm,
    };
    analyzer.validate().key("analyzer")?;
    let t = phase_scan_trace(
        &params,
        pump_w("pump_mw", c.pump_mw)?,
        &scan,
        &analyzer,
        seed,
    )?;
    out.csv(&io::trace_csv(&t))?;
    if out.summary {
        out.report(&format!(
            "min {:.2} dBm ({:+.2} dB rel. shot), max {:.2} dBm ({:+.2} dB rel. shot)",
            t.min_dbm(),
            t.min_dbm() - analyzer.shot_level_dbm,
            t.max_dbm(),
            t.max_dbm() - analyzer.shot_level_dbm
        ));
    }
    Ok(())
}

fn table(key: &str, rows: &[[f64; 2]]) -> Result<FrequencyTable, CliError> {
    FrequencyTable::new(rows.iter().map(|r| (r[0], r[1])).collect()).key(key)
}

pub fn freqsweep(c: FreqSweepConfig, out: &Output) -> Result<(), CliError> {
    let params = squeezer_params(&c.source)?;
    if c.points < 2 || !(c.start_hz > 0.0 && c.stop_hz > c.start_hz) {
        return Err(config_error(
            "start_hz/stop_hz/points",
            "need 0 < start < stop and >= 2 points",
        ));
    }
    let detector = match c.detector.as_str() {
        "flat" => DetectorResponse::Flat,
        "two_pole" if c.corner_hz > 0.0 => DetectorResponse::TwoPole {
            corner_hz: c.corner_hz,
        },
        "two_pole" => return Err(config_error("corner_hz", "must be > 0")),
        "table" => DetectorResponse::Table(table("detector_table", &c.detector_table)?),
        other => {
            return Err(config_error(
                "detector",
                format!("expected `flat`, `two_pole` or `table`, got `{other}`"),
            ))
        }
    };
    let circuit = if c.circuit_table_dbm.is_empty() {
        if !(c.circuit_level_dbm < c.shot_level_dbm) {
            return Err(config_error(
                "circuit_level_dbm",
                "must be below shot_level_dbm",
            ));
        }
        CircuitNoise::Constant(units::from_db(c.circuit_level_dbm - c.shot_level_dbm))
    } else {
        let rel: Vec<[f64; 2]> = c
            .circuit_table_dbm
            .iter()
            .map(|r| [r[0], units::from_db(r[1] - c.shot_level_dbm)])
            .collect();
        CircuitNoise::Table(table("circuit_table_dbm", &rel)?)
    };
    let freqs: Vec<f64> = (0..c.points)
        .map(|k| c.start_hz + (c.stop_hz - c.start_hz) * k as f64 / (c.points - 1) as f64)
        .collect();
    let pts = measured_squeezing_vs_frequency(
        &params,
        pump_w("pump_mw", c.pump_mw)?,
        &detector,
        &circuit,
        c.shot_level_dbm,
        &freqs,
    )?;
    out.csv(&io::frequency_sweep_csv(&pts))?;
    if out.summary {
        let reach = pts
            .iter()
            .take_while(|p| p.squeezing_db <= -4.5)
            .last()
            .map(|p| p.freq_hz);
        match reach {
            Some(f) => out.report(&format!(
                "squeezing beyond 4.5 dB up to {:.0} MHz",
                f * 1e-6
            )),
            None => out.report("squeezing never beyond 4.5 dB"),
        }
    }
    Ok(())
}

pub fn spectrum(c: SpectrumConfig, out: &Output) -> Result<(), CliError> {
    let center_hz = c.center_frequency_thz * 1e12;
    if !(center_hz > 0.0) {
        return Err(config_error("center_frequency_thz", "must be > 0"));
    }
    if !(c.length_m > 0.0) {
        return Err(config_error("length_m", "must be > 0"));
    }
    let beta2 = match c.beta2_source.as_str() {
        "calibrate" => {
            calibrate_beta2(c.target_hwhm_thz * 1e12, c.length_m).key("target_hwhm_thz")?
        }
        "value" => c
            .beta2
            .ok_or_else(|| config_error("beta2", "needed with beta2_source = \"value\""))?,
        "waveguide" => {
            let (g, options) = geometry(&c.waveguide)?;
            let lambda_um = SPEED_OF_LIGHT / center_hz * 1e6;
            waveguide_dispersion(&g, lambda_um, WAVEGUIDE_DERIVATIVE_STEP_UM, &options)?.beta2
        }
        other => {
            return Err(config_error(
                "beta2_source",
                format!("expected `calibrate`, `value` or `waveguide`, got `{other}`"),
            ))
        }
    };
    let mut disp = DispersionLocal::new(center_hz, beta2, c.length_m).key("beta2")?;
    disp.beta4 = c.beta4;
    disp.validate().key("beta4")?;

    let g0 = match (c.g0, c.pump_mw) {
        (Some(g), None) => g,
        (None, Some(mw)) => {
            let a = units::percent_to_per_watt(c.a_percent_per_watt);
            (a * pump_w("pump_mw", mw)?).sqrt()
        }
        (None, None) => 1e-3,
        _ => return Err(config_error("g0/pump_mw", "give at most one of them")),
    };
    if !(c.span_thz > 0.0) || c.points < 3 {
        return Err(config_error(
            "span_thz/points",
            "need span > 0 and >= 3 points",
        ));
    }
    let grid = detuning_grid(c.span_thz * 1e12, c.points);
    let gain = bogoliubov_gain(g0, &disp, &grid).key("g0")?;
    let psd = fluorescence_spectrum(&gain, c.osa.then_some(OSA_RESOLUTION_M))?;
    out.csv(&io::spectrum_csv(&psd))?;
    if out.summary {
        let hwhm = hwhm_bandwidth(&psd)?;
        out.report(&format!(
            "HWHM {} THz (beta2 {beta2:.4e} s^2/m, g0 {g0})",
            three_significant(hwhm * 1e-12)
        ));
    }
    Ok(())
}

fn three_significant(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = (2 - x.abs().log10().floor() as i32).max(0) as usize;
    format!("{x:.digits$}")
}
