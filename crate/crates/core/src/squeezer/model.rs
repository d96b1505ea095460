use std::f64::consts::LN_10;

use crate::error::{Error, Result};
use crate::units;

/// Total detection efficiency η and normalised nonlinear efficiency `a` (W⁻¹).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezerParams {
    pub eta: f64,
    pub a_per_watt: f64,
}

impl SqueezerParams {
    pub fn new(eta: f64, a_per_watt: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::Precondition(format!(
                "eta must lie in (0, 1], got {eta}"
            )));
        }
        if !(a_per_watt >= 0.0 && a_per_watt.is_finite()) {
            return Err(Error::Precondition(format!(
                "a must be finite and >= 0, got {a_per_watt} W^-1"
            )));
        }
        Ok(SqueezerParams { eta, a_per_watt })
    }

    pub fn from_percent_per_watt(eta: f64, a_percent_per_watt: f64) -> Result<Self> {
        Self::new(eta, units::percent_to_per_watt(a_percent_per_watt))
    }

    pub fn a_percent_per_watt(&self) -> f64 {
        units::per_watt_to_percent(self.a_per_watt)
    }

    /// Single-pass gain `√(aP)`.
    pub fn gain(&self, pump_w: f64) -> f64 {
        (self.a_per_watt * pump_w).sqrt()
    }
}

/// Noise levels relative to shot noise (linear).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeLevels {
    pub minus: f64,
    pub plus: f64,
}

impl SqueezeLevels {
    pub fn squeezing_db(&self) -> f64 {
        10.0 * self.minus.log10()
    }

    pub fn antisqueezing_db(&self) -> f64 {
        10.0 * self.plus.log10()
    }
}

/// R± = 1 − η + η exp(±2√(aP)).
pub fn squeeze_levels(params: &SqueezerParams, pump_w: f64) -> Result<SqueezeLevels> {
    if !(pump_w >= 0.0) {
        return Err(Error::Precondition(format!(
            "pump power must be >= 0, got {pump_w} W"
        )));
    }
    let g2 = 2.0 * params.gain(pump_w);
    let eta = params.eta;
    Ok(SqueezeLevels {
        minus: 1.0 - eta + eta * (-g2).exp(),
        plus: 1.0 - eta + eta * g2.exp(),
    })
}

/// (squeezing dB, anti-squeezing dB) for the model; no precondition checks.
pub fn model_db(params: &SqueezerParams, pump_w: f64) -> (f64, f64) {
    let g2 = 2.0 * (params.a_per_watt * pump_w).sqrt();
    let eta = params.eta;
    (
        10.0 * (1.0 - eta + eta * (-g2).exp()).log10(),
        10.0 * (1.0 - eta + eta * g2.exp()).log10(),
    )
}

/// ∂(dB)/∂(η, a) for the squeezing and anti-squeezing branches.
pub fn model_db_jacobian(params: &SqueezerParams, pump_w: f64) -> [[f64; 2]; 2] {
    let eta = params.eta;
    let a = params.a_per_watt;
    let g2 = 2.0 * (a * pump_w).sqrt();
    // d(2√(aP))/da
    let dg2 = if pump_w > 0.0 && a > 0.0 {
        (pump_w / a).sqrt()
    } else {
        0.0
    };
    let k = 10.0 / LN_10;
    let branch = |sign: f64| {
        let e = (sign * g2).exp();
        let r = 1.0 - eta + eta * e;
        [k * (e - 1.0) / r, k * eta * e * sign * dg2 / r]
    };
    [branch(-1.0), branch(1.0)]
}

/// Detection-side loss contributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionComponents {
    pub quantum_efficiency: f64,
    pub transmittance: f64,
    pub visibility: f64,
    /// 2 for the mode-matching efficiency V²; 1 reproduces a linear-in-V budget.
    pub visibility_exponent: i32,
}

impl DetectionComponents {
    pub fn detection_loss(&self) -> Result<f64> {
        for (name, v) in [
            ("quantum_efficiency", self.quantum_efficiency),
            ("transmittance", self.transmittance),
            ("visibility", self.visibility),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Precondition(format!(
                    "{name} must lie in (0, 1], got {v}"
                )));
            }
        }
        if !matches!(self.visibility_exponent, 1 | 2) {
            return Err(Error::Precondition(format!(
                "visibility_exponent must be 1 or 2, got {}",
                self.visibility_exponent
            )));
        }
        Ok(1.0
            - self.quantum_efficiency
                * self.transmittance
                * self.visibility.powi(self.visibility_exponent))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBudget {
    pub waveguide_loss: f64,
    pub detection_loss: f64,
}

impl LossBudget {
    pub fn new(waveguide_loss: f64, detection_loss: f64) -> Result<Self> {
        for (name, v) in [("l_wg", waveguide_loss), ("l_hd", detection_loss)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::Precondition(format!(
                    "{name} must lie in [0, 1), got {v}"
                )));
            }
        }
        Ok(LossBudget {
            waveguide_loss,
            detection_loss,
        })
    }

    pub fn from_components(waveguide_loss: f64, detection: &DetectionComponents) -> Result<Self> {
        Self::new(waveguide_loss, detection.detection_loss()?)
    }
}

/// η = (1 − L_WG)(1 − L_HD).
pub fn eta_from_budget(budget: &LossBudget) -> f64 {
    (1.0 - budget.waveguide_loss) * (1.0 - budget.detection_loss)
}

/// L_WG = 1 − η / (1 − L_HD); errors if the detection loss alone already
/// exceeds what η allows.
pub fn infer_waveguide_loss(eta: f64, detection_loss: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&detection_loss) {
        return Err(Error::Precondition(format!(
            "l_hd must lie in [0, 1), got {detection_loss}"
        )));
    }
    if !(eta > 0.0) {
        return Err(Error::Precondition(format!("eta must be > 0, got {eta}")));
    }
    let limit = 1.0 - detection_loss;
    if eta > limit {
        return Err(Error::Inconsistent(format!(
            "eta = {eta} exceeds 1 - l_hd = {limit}; the detection loss alone is too large"
        )));
    }
    Ok(1.0 - eta / limit)
}

/// One measured point of a pump-power sweep. Pump power is the power inside
/// the waveguide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpSweepPoint {
    pub pump_w: f64,
    pub squeezing_db: f64,
    pub antisqueezing_db: f64,
    pub uncertainty_db: Option<f64>,
}

impl PumpSweepPoint {
    pub fn validate(&self) -> Result<()> {
        if !(self.pump_w >= 0.0) {
            return Err(Error::Precondition(format!(
                "pump power must be >= 0, got {} W",
                self.pump_w
            )));
        }
        if !(self.squeezing_db <= 0.0 && self.antisqueezing_db >= 0.0) {
            return Err(Error::Precondition(format!(
                "need squeezing_db <= 0 <= antisqueezing_db, got {} / {}",
                self.squeezing_db, self.antisqueezing_db
            )));
        }
        if let Some(s) = self.uncertainty_db {
            if !(s > 0.0) {
                return Err(Error::Precondition(format!(
                    "uncertainty must be > 0, got {s} dB"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_source() -> SqueezerParams {
        SqueezerParams::from_percent_per_watt(0.79, 1210.0).unwrap()
    }

    #[test]
    fn reference_operating_point() {
        let l = squeeze_levels(&reference_source(), 0.304).unwrap();
        assert!((l.minus - 0.2271).abs() < 1e-4, "{}", l.minus);
        assert!((l.plus - 36.81).abs() < 0.01, "{}", l.plus);
        assert!((l.squeezing_db() + 6.44).abs() < 0.01);
        assert!((l.antisqueezing_db() - 15.66).abs() < 0.01);
    }

    #[test]
    fn no_pump_is_shot_noise() {
        let l = squeeze_levels(&reference_source(), 0.0).unwrap();
        assert_eq!((l.minus, l.plus), (1.0, 1.0));
    }

    #[test]
    fn pure_state_product_is_one() {
        let p = SqueezerParams::new(1.0, 4.0).unwrap();
        let l = squeeze_levels(&p, 0.25).unwrap();
        assert!((l.minus - (-2f64).exp()).abs() < 1e-15);
        assert!((l.plus - 2f64.exp()).abs() < 1e-14);
        assert!((l.minus * l.plus - 1.0).abs() < 1e-14);
    }

    #[test]
    fn approaches_loss_floor() {
        let l = squeeze_levels(&reference_source(), 1e4).unwrap();
        assert!((l.minus - 0.21).abs() < 1e-12);
    }

    #[test]
    fn reference_loss_budget() {
        let eta = eta_from_budget(&LossBudget::new(0.16, 0.06).unwrap());
        assert!((eta - 0.7896).abs() < 1e-12);
        assert!((eta_from_budget(&LossBudget::new(0.0, 0.0).unwrap()) - 1.0).abs() == 0.0);
    }

    #[test]
    fn detection_components_linear_visibility() {
        let c = DetectionComponents {
            quantum_efficiency: 0.99,
            transmittance: 0.97,
            visibility: 0.98,
            visibility_exponent: 1,
        };
        assert!((1.0 - c.detection_loss().unwrap() - 0.941094).abs() < 1e-9);
        let squared = DetectionComponents {
            visibility_exponent: 2,
            ..c
        };
        assert!((1.0 - squared.detection_loss().unwrap() - 0.99 * 0.97 * 0.9604).abs() < 1e-12);
    }

    #[test]
    fn waveguide_loss_inference() {
        assert!((infer_waveguide_loss(0.79, 0.06).unwrap() - 0.159574).abs() < 1e-6);
        assert!(infer_waveguide_loss(0.94, 0.06).unwrap().abs() < 1e-15);
        assert!(matches!(
            infer_waveguide_loss(0.95, 0.06),
            Err(Error::Inconsistent(_))
        ));
    }

    #[test]
    fn invalid_params() {
        assert!(SqueezerParams::new(0.0, 1.0).is_err());
        assert!(SqueezerParams::new(1.1, 1.0).is_err());
        assert!(SqueezerParams::new(0.5, -1.0).is_err());
        assert!(squeeze_levels(&reference_source(), -1.0).is_err());
    }
}
