//! Plain-text file formats: CSV tables for plotting, mode-field grids and the
//! measured pump-sweep input.
//!
//! Every CSV has exactly one header row naming the unit of each column.
//! Numbers use Rust's shortest round-trip formatting, so output is
//! locale-independent and byte-identical for identical inputs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::homodyne::{FrequencyPoint, HomodyneTrace};
use crate::modesolver::{DispersionPoint, ModeSolution, WidthPoint};
use crate::spectrum::FluorescenceSpectrum;
use crate::squeezer::{model_db, PumpSweepPoint, SqueezerParams};

/// Renders a CSV table. Rows shorter than the header are padded with empty
/// fields.
pub fn render_csv<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let row = row.as_ref();
        for k in 0..header.len() {
            if k > 0 {
                out.push(',');
            }
            if let Some(v) = row.get(k) {
                write!(out, "{v}").expect("write to String");
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn dispersion_csv(points: &[DispersionPoint]) -> String {
    render_csv(
        &["wavelength_um", "n_eff"],
        points.iter().map(|p| [p.wavelength_um, p.effective_index]),
    )
}

pub fn width_sweep_csv(points: &[WidthPoint]) -> String {
    let max_modes = points
        .iter()
        .map(|p| p.effective_indices.len())
        .max()
        .unwrap_or(0);
    let names: Vec<String> = ["top_width_um".to_string(), "n_guided".to_string()]
        .into_iter()
        .chain((1..=max_modes.max(1)).map(|k| format!("n_eff_{k}")))
        .collect();
    let header: Vec<&str> = names.iter().map(String::as_str).collect();
    render_csv(
        &header,
        points.iter().map(|p| {
            let mut row = vec![p.top_width_um, p.effective_indices.len() as f64];
            row.extend(&p.effective_indices);
            row
        }),
    )
}

pub fn tuning_csv(wavelengths_um: &[f64], efficiency: &[f64]) -> String {
    render_csv(
        &["wavelength_nm", "normalized_efficiency"],
        wavelengths_um
            .iter()
            .zip(efficiency)
            .map(|(l, e)| [l * 1e3, *e]),
    )
}

pub fn trace_csv(trace: &HomodyneTrace) -> String {
    render_csv(
        &["time_s", "power_dbm"],
        trace
            .time_s
            .iter()
            .zip(&trace.power_dbm)
            .map(|(t, p)| [*t, *p]),
    )
}

pub fn frequency_sweep_csv(points: &[FrequencyPoint]) -> String {
    render_csv(
        &[
            "freq_hz",
            "squeezing_db",
            "antisqueezing_db",
            "shot_dbm",
            "circuit_dbm",
        ],
        points.iter().map(|p| {
            [
                p.freq_hz,
                p.squeezing_db,
                p.antisqueezing_db,
                p.shot_dbm,
                p.circuit_dbm,
            ]
        }),
    )
}

pub fn spectrum_csv(spectrum: &FluorescenceSpectrum) -> String {
    render_csv(
        &["optical_freq_thz", "psd_rel"],
        spectrum
            .optical_freq_hz
            .iter()
            .zip(&spectrum.psd_rel)
            .map(|(f, p)| [f * 1e-12, *p]),
    )
}

/// Model squeezing and anti-squeezing on `points` pump powers in `[0, max]`.
pub fn model_curve_csv(params: &SqueezerParams, max_pump_w: f64, points: usize) -> String {
    let n = points.max(2);
    render_csv(
        &["pump_mw", "squeezing_db", "antisqueezing_db"],
        (0..n).map(|k| {
            let p = max_pump_w * k as f64 / (n - 1) as f64;
            let (s, a) = model_db(params, p);
            [p * 1e3, s, a]
        }),
    )
}

/// Mode field on its grid, as stored in a field file.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeField {
    pub nx: usize,
    pub ny: usize,
    pub dx_um: f64,
    pub dy_um: f64,
    pub effective_index: f64,
    /// Row-major, row 0 at the bottom of the window.
    pub field: Vec<f64>,
}

impl From<&ModeSolution> for ModeField {
    fn from(m: &ModeSolution) -> Self {
        ModeField {
            nx: m.nx,
            ny: m.ny,
            dx_um: m.dx,
            dy_um: m.dy,
            effective_index: m.effective_index,
            field: m.field.clone(),
        }
    }
}

const FIELD_HEADER: &str = "nx ny dx_um dy_um n_eff";

/// Field file: a label line, a line with the header values, then `ny` rows of
/// `nx` space-separated samples.
pub fn render_mode_field(field: &ModeField) -> String {
    let mut out = format!(
        "{FIELD_HEADER}\n{} {} {} {} {}\n",
        field.nx, field.ny, field.dx_um, field.dy_um, field.effective_index
    );
    for row in field.field.chunks(field.nx.max(1)) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_mode_field(text: &str, source: &Path) -> Result<ModeField> {
    let perr = |line: usize, message: String| Error::Parse {
        source_name: source.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
    match lines.next() {
        Some((_, l)) if l.trim() == FIELD_HEADER => {}
        _ => return Err(perr(1, format!("expected header `{FIELD_HEADER}`"))),
    }
    let (ln, values) = lines
        .next()
        .ok_or_else(|| perr(2, "missing grid description".into()))?;
    let parts: Vec<&str> = values.split_whitespace().collect();
    if parts.len() != 5 {
        return Err(perr(
            ln,
            format!("expected 5 values, found {}", parts.len()),
        ));
    }
    let int = |s: &str| {
        s.parse::<usize>()
            .map_err(|e| perr(ln, format!("`{s}`: {e}")))
    };
    let float = |s: &str| {
        s.parse::<f64>()
            .map_err(|e| perr(ln, format!("`{s}`: {e}")))
    };
    let (nx, ny) = (int(parts[0])?, int(parts[1])?);
    let (dx_um, dy_um, effective_index) = (float(parts[2])?, float(parts[3])?, float(parts[4])?);

    let mut field = Vec::with_capacity(nx * ny);
    let mut rows = 0;
    for (ln, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| perr(ln, format!("`{s}`: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != nx {
            return Err(perr(
                ln,
                format!("expected {nx} values, found {}", row.len()),
            ));
        }
        field.extend(row);
        rows += 1;
    }
    if rows != ny {
        return Err(perr(
            text.lines().count(),
            format!("expected {ny} field rows, found {rows}"),
        ));
    }
    Ok(ModeField {
        nx,
        ny,
        dx_um,
        dy_um,
        effective_index,
        field,
    })
}

pub fn read_mode_field(path: &Path) -> Result<ModeField> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mode_field(&text, path)
}

const SWEEP_COLUMNS: [&str; 4] = ["pump_mw", "squeezing_db", "antisqueezing_db", "sigma_db"];

/// Parses a measured pump sweep with header
/// `pump_mw,squeezing_db,antisqueezing_db[,sigma_db]`.
pub fn parse_sweep_csv(text: &str, source: &Path) -> Result<Vec<PumpSweepPoint>> {
    let perr = |line: usize, message: String| Error::Parse {
        source_name: source.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| perr(1, e.to_string()))?
        .clone();
    let names: Vec<&str> = header.iter().collect();
    let with_sigma = match names.as_slice() {
        n if n == &SWEEP_COLUMNS[..3] => false,
        n if n == &SWEEP_COLUMNS[..] => true,
        _ => {
            return Err(perr(
                1,
                format!(
                    "expected header `{}` with optional `,{}`, found `{}`",
                    SWEEP_COLUMNS[..3].join(","),
                    SWEEP_COLUMNS[3],
                    names.join(",")
                ),
            ))
        }
    };
    let width = if with_sigma { 4 } else { 3 };
    // The reader's line counter ignores blank lines, and a record's offset
    // may point at blank lines before it; count newlines up to its first byte.
    let line_of = |byte: u64| {
        let bytes = text.as_bytes();
        let mut end = byte as usize;
        while end < bytes.len() && matches!(bytes[end], b'\n' | b'\r') {
            end += 1;
        }
        bytes[..end].iter().filter(|&&b| b == b'\n').count() + 1
    };

    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| line_of(p.byte()));
            perr(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| line_of(p.byte()));
        if record.len() != width {
            return Err(perr(
                line,
                format!("expected {width} fields, found {}", record.len()),
            ));
        }
        let values = record
            .iter()
            .zip(SWEEP_COLUMNS)
            .map(|(s, name)| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| perr(line, format!("{name}: `{s}` is not a finite number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let point = PumpSweepPoint {
            pump_w: values[0] * 1e-3,
            squeezing_db: values[1],
            antisqueezing_db: values[2],
            uncertainty_db: values.get(3).copied(),
        };
        point.validate().map_err(|e| perr(line, e.to_string()))?;
        points.push(point);
    }
    Ok(points)
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<PumpSweepPoint>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sweep_csv(&text, path)
}
