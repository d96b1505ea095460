//! Sellmeier-type refractive-index models for the core and substrate crystals.
//!
//! Every model is stored in the single form
//!
//! ```text
//! n²(λ) = A + Σᵢ Bᵢ λ² / (λ² − Cᵢ) + D λ²        (λ in μm, Cᵢ in μm²)
//! ```
//!
//! Tables published in the pole form `B / (λ² − C²)` are converted exactly
//! (`B/(λ²−C²) = b λ²/(λ²−c) − b` with `b = B/C²`, `c = C²`). The coefficient
//! provenance of the built-in models is recorded in `data/PROVENANCE.md`.

use std::fmt;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default wavelength step for the dispersion stencils, μm.
pub const DEFAULT_DERIVATIVE_STEP_UM: f64 = 5e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolarizationAxis {
    Ordinary,
    Extraordinary,
}

impl fmt::Display for PolarizationAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolarizationAxis::Ordinary => f.write_str("ordinary"),
            PolarizationAxis::Extraordinary => f.write_str("extraordinary"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SellmeierTerm {
    pub strength: f64,
    /// Resonance position, μm².
    pub pole_um2: f64,
}

/// Immutable index model for one crystal axis.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialModel {
    name: String,
    axis: PolarizationAxis,
    constant: f64,
    terms: Vec<SellmeierTerm>,
    ir: f64,
    valid_range: (f64, f64),
    temperature_c: Option<f64>,
}

/// Group index and group-velocity dispersion at one wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupDispersion {
    pub index: f64,
    pub group_index: f64,
    /// β₂ in s²/m.
    pub beta2: f64,
}

impl MaterialModel {
    /// Builds a model and checks that the index is real, finite and above 1
    /// across the whole valid range.
    pub fn new(
        name: impl Into<String>,
        axis: PolarizationAxis,
        constant: f64,
        terms: Vec<SellmeierTerm>,
        ir: f64,
        valid_range: (f64, f64),
    ) -> Result<Self> {
        let name = name.into();
        let (lo, hi) = valid_range;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::Precondition(format!(
                "material '{name}': valid_range must satisfy 0 < min < max, got [{lo}, {hi}]"
            )));
        }
        let all_finite = std::iter::once(constant)
            .chain(std::iter::once(ir))
            .chain(terms.iter().flat_map(|t| [t.strength, t.pole_um2]))
            .all(f64::is_finite);
        if !all_finite {
            return Err(Error::Precondition(format!(
                "material '{name}': coefficients must be finite"
            )));
        }
        for t in &terms {
            if t.pole_um2 >= lo * lo && t.pole_um2 <= hi * hi {
                return Err(Error::Precondition(format!(
                    "material '{name}': pole at {} um lies inside the valid range",
                    t.pole_um2.sqrt()
                )));
            }
        }
        let model = MaterialModel {
            name,
            axis,
            constant,
            terms,
            ir,
            valid_range,
            temperature_c: None,
        };
        const SAMPLES: usize = 256;
        for k in 0..=SAMPLES {
            let lambda = lo + (hi - lo) * k as f64 / SAMPLES as f64;
            let n2 = model.index_squared(lambda);
            if !(n2.is_finite() && n2 > 1.0) {
                return Err(Error::Precondition(format!(
                    "material '{}': index not real and > 1 at {lambda} um (n^2 = {n2})",
                    model.name
                )));
            }
        }
        Ok(model)
    }

    /// Dispersionless model, mostly useful as a test double.
    pub fn constant(name: impl Into<String>, index: f64, valid_range: (f64, f64)) -> Result<Self> {
        Self::new(
            name,
            PolarizationAxis::Extraordinary,
            index * index,
            Vec::new(),
            0.0,
            valid_range,
        )
    }

    pub fn with_temperature_label(mut self, celsius: f64) -> Self {
        self.temperature_c = Some(celsius);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn axis(&self) -> PolarizationAxis {
        self.axis
    }

    pub fn valid_range(&self) -> (f64, f64) {
        self.valid_range
    }

    pub fn temperature_label(&self) -> Option<f64> {
        self.temperature_c
    }

    pub fn terms(&self) -> &[SellmeierTerm] {
        &self.terms
    }

    fn index_squared(&self, lambda_um: f64) -> f64 {
        let l2 = lambda_um * lambda_um;
        let poles: f64 = self
            .terms
            .iter()
            .map(|t| t.strength * l2 / (l2 - t.pole_um2))
            .sum();
        self.constant + poles + self.ir * l2
    }

    fn check_range(&self, lambda_um: f64) -> Result<()> {
        let (lo, hi) = self.valid_range;
        if lambda_um >= lo && lambda_um <= hi {
            Ok(())
        } else {
            Err(Error::range(
                format!("wavelength (um) for material '{}'", self.name),
                lambda_um,
                lo,
                hi,
            ))
        }
    }

    /// n(λ), λ in μm.
    pub fn refractive_index(&self, lambda_um: f64) -> Result<f64> {
        self.check_range(lambda_um)?;
        Ok(self.index_squared(lambda_um).sqrt())
    }

    pub fn group_index_and_gvd(&self, lambda_um: f64) -> Result<GroupDispersion> {
        self.group_index_and_gvd_with_step(lambda_um, DEFAULT_DERIVATIVE_STEP_UM)
    }

    /// Central-difference group index and β₂ with an explicit stencil step (μm).
    pub fn group_index_and_gvd_with_step(
        &self,
        lambda_um: f64,
        step_um: f64,
    ) -> Result<GroupDispersion> {
        self.check_range(lambda_um - step_um)?;
        self.check_range(lambda_um + step_um)?;
        dispersion_from_index(|l| self.refractive_index(l), lambda_um, step_um)
    }
}

/// Group index `n − λ dn/dλ` and `β₂ = λ³/(2πc²) d²n/dλ²` of any index
/// function of wavelength (μm), by three-point central differences.
pub fn dispersion_from_index<F>(index: F, lambda_um: f64, step_um: f64) -> Result<GroupDispersion>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(step_um > 0.0 && step_um < lambda_um) {
        return Err(Error::Precondition(format!(
            "derivative step must lie in (0, lambda), got {step_um} um"
        )));
    }
    let minus = index(lambda_um - step_um)?;
    let center = index(lambda_um)?;
    let plus = index(lambda_um + step_um)?;
    let dn = (plus - minus) / (2.0 * step_um);
    let d2n = (plus - 2.0 * center + minus) / (step_um * step_um);
    let lambda_m = lambda_um * 1e-6;
    // d²n/dλ² from μm⁻² to m⁻²
    let beta2 =
        lambda_m.powi(3) / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT.powi(2)) * d2n * 1e12;
    Ok(GroupDispersion {
        index: center,
        group_index: center - lambda_um * dn,
        beta2,
    })
}

/// Congruent LiNbO₃, extraordinary (Zelmon, Small & Jundt 1997).
pub fn congruent_lithium_niobate_e() -> MaterialModel {
    MaterialModel::new(
        "CLN-e",
        PolarizationAxis::Extraordinary,
        1.0,
        vec![
            SellmeierTerm {
                strength: 2.9804,
                pole_um2: 0.02047,
            },
            SellmeierTerm {
                strength: 0.5981,
                pole_um2: 0.0666,
            },
            SellmeierTerm {
                strength: 8.9543,
                pole_um2: 416.08,
            },
        ],
        0.0,
        (0.4, 5.0),
    )
    .expect("built-in CLN coefficients are valid")
}

/// 5 mol% MgO-doped LiNbO₃, extraordinary (Zelmon, Small & Jundt 1997).
///
/// Default core model: the doped crystal stands in for ZnO-doped LiNbO₃,
/// for which no published table is available.
pub fn doped_lithium_niobate_e() -> MaterialModel {
    MaterialModel::new(
        "MgLN-e",
        PolarizationAxis::Extraordinary,
        1.0,
        vec![
            SellmeierTerm {
                strength: 2.2454,
                pole_um2: 0.01242,
            },
            SellmeierTerm {
                strength: 1.3005,
                pole_um2: 0.05313,
            },
            SellmeierTerm {
                strength: 6.8972,
                pole_um2: 331.33,
            },
        ],
        0.0,
        (0.4, 5.0),
    )
    .expect("built-in MgLN coefficients are valid")
}

/// Stoichiometric LiTaO₃, extraordinary (Bruner et al. 2003), evaluated at 20 °C.
pub fn lithium_tantalate_e() -> MaterialModel {
    const A: f64 = 4.502483;
    const B: f64 = 0.007294;
    const C: f64 = 0.185087;
    const D: f64 = -0.02357;
    const E: f64 = 0.073423;
    const F: f64 = 0.199595;
    const B_T: f64 = 3.483933e-8;
    const C_T: f64 = 1.607839e-8;
    const TEMPERATURE_C: f64 = 20.0;

    let kelvin2 = (TEMPERATURE_C + 273.15).powi(2);
    let pole_b = B + B_T * kelvin2;
    let pole_c = C + C_T * kelvin2;
    let terms = vec![
        SellmeierTerm {
            strength: pole_b / (pole_c * pole_c),
            pole_um2: pole_c * pole_c,
        },
        SellmeierTerm {
            strength: E / (F * F),
            pole_um2: F * F,
        },
    ];
    let constant = A - terms.iter().map(|t| t.strength).sum::<f64>();
    MaterialModel::new(
        "SLT-e",
        PolarizationAxis::Extraordinary,
        constant,
        terms,
        D,
        (0.4, 4.0),
    )
    .expect("built-in SLT coefficients are valid")
    .with_temperature_label(TEMPERATURE_C)
}

/// Looks up a built-in model by its short name.
pub fn builtin(name: &str) -> Option<MaterialModel> {
    match name.to_ascii_lowercase().as_str() {
        "cln-e" => Some(congruent_lithium_niobate_e()),
        "mgln-e" => Some(doped_lithium_niobate_e()),
        "slt-e" => Some(lithium_tantalate_e()),
        _ => None,
    }
}

pub const BUILTIN_NAMES: [&str; 3] = ["MgLN-e", "CLN-e", "SLT-e"];

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialFile {
    name: String,
    axis: PolarizationAxis,
    coefficients: toml::Spanned<Vec<f64>>,
    #[serde(default)]
    ir: f64,
    valid_range: toml::Spanned<Vec<f64>>,
    temperature_c: Option<f64>,
}

fn line_of(text: &str, byte: usize) -> usize {
    text[..byte.min(text.len())].matches('\n').count() + 1
}

/// Parses a material coefficient file.
///
/// ```toml
/// name = "MgLN-e"
/// axis = "extraordinary"              # or "ordinary"
/// coefficients = [1.0, 2.2454, 0.01242, 1.3005, 0.05313, 6.8972, 331.33]
/// ir = 0.0                            # optional D of the D·λ² term
/// valid_range = [0.4, 5.0]            # μm
/// temperature_c = 20.0                # optional label, not a model input
/// ```
///
/// `coefficients` is `[A, B₁, C₁, B₂, C₂, …]`.
pub fn parse_material(text: &str, source: &Path) -> Result<MaterialModel> {
    let parse_err = |line: usize, message: String| Error::Parse {
        source_name: source.to_path_buf(),
        line,
        message,
    };
    let file: MaterialFile = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(1);
        parse_err(line, e.message().to_string())
    })?;

    let coeff_line = line_of(text, file.coefficients.span().start);
    let coeffs = file.coefficients.into_inner();
    if coeffs.is_empty() || coeffs.len().is_multiple_of(2) {
        return Err(parse_err(
            coeff_line,
            format!(
                "coefficients must be [A, B1, C1, ...] (odd length), got {} values",
                coeffs.len()
            ),
        ));
    }
    let terms = coeffs[1..]
        .chunks_exact(2)
        .map(|p| SellmeierTerm {
            strength: p[0],
            pole_um2: p[1],
        })
        .collect();

    let range_line = line_of(text, file.valid_range.span().start);
    let range = file.valid_range.into_inner();
    if range.len() != 2 {
        return Err(parse_err(
            range_line,
            format!(
                "valid_range must be [min_um, max_um], got {} values",
                range.len()
            ),
        ));
    }

    let model = MaterialModel::new(
        file.name,
        file.axis,
        coeffs[0],
        terms,
        file.ir,
        (range[0], range[1]),
    )
    .map_err(|e| parse_err(coeff_line, e.to_string()))?;
    Ok(match file.temperature_c {
        Some(t) => model.with_temperature_label(t),
        None => model,
    })
}

pub fn load_material(path: &Path) -> Result<MaterialModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_material(&text, path)
}

/// Resolves either a built-in short name or a path to a coefficient file.
pub fn resolve_material(spec: &str) -> Result<MaterialModel> {
    match builtin(spec) {
        Some(m) => Ok(m),
        None => load_material(Path::new(spec)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Values evaluated independently from the published coefficient tables;
    // see data/PROVENANCE.md.
    const FIXTURE: [(f64, f64, f64, f64); 4] = [
        (
            0.775,
            2.1783723180446946,
            2.1695596726697137,
            2.153470718150594,
        ),
        (
            1.0,
            2.1591403212855416,
            2.150867607307564,
            2.1368296588063256,
        ),
        (
            1.55,
            2.1375596497855565,
            2.129929809470047,
            2.1169028200188515,
        ),
        (2.0, 2.12533281079764, 2.118045264226726, 2.1045992382439875),
    ];

    #[test]
    fn builtin_fixture_regression() {
        let (cln, mg, slt) = (
            congruent_lithium_niobate_e(),
            doped_lithium_niobate_e(),
            lithium_tantalate_e(),
        );
        for (l, n_cln, n_mg, n_slt) in FIXTURE {
            assert!((cln.refractive_index(l).unwrap() - n_cln).abs() < 1e-12);
            assert!((mg.refractive_index(l).unwrap() - n_mg).abs() < 1e-12);
            assert!((slt.refractive_index(l).unwrap() - n_slt).abs() < 1e-12);
        }
    }

    #[test]
    fn lithium_niobate_extraordinary_near_2_14() {
        let n = congruent_lithium_niobate_e()
            .refractive_index(1.55)
            .unwrap();
        assert!((2.10..=2.20).contains(&n), "n = {n}");
    }

    #[test]
    fn boundary_wavelengths_are_inclusive() {
        for m in [congruent_lithium_niobate_e(), lithium_tantalate_e()] {
            let (lo, hi) = m.valid_range();
            assert!(m.refractive_index(lo).is_ok());
            assert!(m.refractive_index(hi).is_ok());
        }
    }

    #[test]
    fn out_of_range_names_model_and_bounds() {
        let err = doped_lithium_niobate_e().refractive_index(6.0).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("MgLN-e") && msg.contains("0.4") && msg.contains('5'),
            "{msg}"
        );
    }

    #[test]
    fn normal_dispersion_ordering() {
        for m in [congruent_lithium_niobate_e(), doped_lithium_niobate_e()] {
            assert!(m.refractive_index(0.775).unwrap() > m.refractive_index(1.55).unwrap());
        }
    }

    #[test]
    fn monotone_decreasing_between_one_and_two_microns() {
        for m in [
            congruent_lithium_niobate_e(),
            doped_lithium_niobate_e(),
            lithium_tantalate_e(),
        ] {
            let mut prev = f64::INFINITY;
            for k in 0..=200 {
                let n = m.refractive_index(1.0 + k as f64 * 0.005).unwrap();
                assert!(n < prev);
                prev = n;
            }
        }
    }

    #[test]
    fn group_index_exceeds_phase_index() {
        let d = doped_lithium_niobate_e().group_index_and_gvd(1.55).unwrap();
        assert!(d.group_index > d.index);
        assert!(d.beta2 > 0.0);
    }

    #[test]
    fn gvd_step_halving_agrees() {
        let m = congruent_lithium_niobate_e();
        let a = m.group_index_and_gvd_with_step(1.55, 0.01).unwrap().beta2;
        let b = m.group_index_and_gvd_with_step(1.55, 0.005).unwrap().beta2;
        assert!(((a - b) / b).abs() < 0.01, "{a} vs {b}");
    }

    #[test]
    fn dispersionless_mock() {
        let m = MaterialModel::constant("flat", 1.8, (0.5, 2.5)).unwrap();
        let d = m.group_index_and_gvd(1.55).unwrap();
        assert_eq!(d.index, 1.8);
        assert_eq!(d.group_index, 1.8);
        assert_eq!(d.beta2, 0.0);
    }

    #[test]
    fn stencil_outside_range_errors() {
        let m = lithium_tantalate_e();
        assert!(matches!(
            m.group_index_and_gvd(0.4),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn pole_inside_range_is_rejected() {
        let r = MaterialModel::new(
            "bad",
            PolarizationAxis::Ordinary,
            1.0,
            vec![SellmeierTerm {
                strength: 1.0,
                pole_um2: 1.0,
            }],
            0.0,
            (0.5, 2.0),
        );
        assert!(r.is_err());
    }

    #[test]
    fn parse_round_trip_matches_builtin() {
        let text = r#"
name = "MgLN-e"
axis = "extraordinary"
coefficients = [1.0, 2.2454, 0.01242, 1.3005, 0.05313, 6.8972, 331.33]
valid_range = [0.4, 5.0]
"#;
        let m = parse_material(text, Path::new("mgln.toml")).unwrap();
        assert_eq!(m, doped_lithium_niobate_e());
    }

    #[test]
    fn parse_error_cites_line() {
        let text = "name = \"x\"\naxis = \"extraordinary\"\ncoefficients = [1.0, 2.0]\nvalid_range = [0.5, 2.0]\n";
        match parse_material(text, Path::new("x.toml")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        let text = "name = \"x\"\naxis = \"sideways\"\n";
        match parse_material(text, Path::new("x.toml")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
