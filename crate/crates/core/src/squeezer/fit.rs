//! Weighted least-squares estimation of (η, a) in decibel space.
//!
//! Both branches of every sweep point contribute one residual each, weighted
//! by `1/σ²` when uncertainties are given. A coarse grid over
//! η ∈ [0.3, 1], a ∈ [0.1, 100] W⁻¹ seeds a Levenberg–Marquardt iteration that
//! is projected back onto η ∈ (0, 1], a > 0 after every step.

use nalgebra::{Matrix2, Vector2};

use super::model::{model_db, model_db_jacobian, PumpSweepPoint, SqueezerParams};
use crate::error::{Error, Result};

const ETA_MIN: f64 = 1e-9;
const A_MIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Stop once the relative parameter step falls below this.
    pub step_tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 500,
            step_tolerance: 1e-13,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointResidual {
    pub pump_w: f64,
    /// model − measured, dB
    pub squeezing_db: f64,
    pub antisqueezing_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub params: SqueezerParams,
    pub residuals: Vec<PointResidual>,
    /// Unweighted RMS over both branches, dB.
    pub rms_db: f64,
    /// Weighted sum of squared residuals.
    pub chi_squared: f64,
    /// Covariance of (η, a) with a in W⁻¹.
    pub covariance: [[f64; 2]; 2],
    pub iterations: usize,
}

impl FitReport {
    pub fn std_errors(&self) -> (f64, f64) {
        (self.covariance[0][0].sqrt(), self.covariance[1][1].sqrt())
    }
}

struct Problem<'a> {
    data: &'a [PumpSweepPoint],
    weights: Vec<f64>,
}

impl Problem<'_> {
    fn cost(&self, p: &SqueezerParams) -> f64 {
        self.data
            .iter()
            .zip(&self.weights)
            .map(|(d, w)| {
                let (s, a) = model_db(p, d.pump_w);
                w * ((s - d.squeezing_db).powi(2) + (a - d.antisqueezing_db).powi(2))
            })
            .sum()
    }

    /// (JᵀWJ, JᵀWr) with analytic derivatives.
    fn normal_equations(&self, p: &SqueezerParams) -> (Matrix2<f64>, Vector2<f64>) {
        let mut jtj = Matrix2::zeros();
        let mut jtr = Vector2::zeros();
        for (d, &w) in self.data.iter().zip(&self.weights) {
            let (s, a) = model_db(p, d.pump_w);
            let jac = model_db_jacobian(p, d.pump_w);
            for (row, r) in jac.iter().zip([s - d.squeezing_db, a - d.antisqueezing_db]) {
                let j = Vector2::new(row[0], row[1]);
                jtj += w * j * j.transpose();
                jtr += w * r * j;
            }
        }
        (jtj, jtr)
    }

    /// Central-difference Jacobian, stacked as (squeezing, anti-squeezing) per point.
    fn fd_jacobian(&self, p: &SqueezerParams) -> Vec<[f64; 2]> {
        let h_eta = 1e-6 * p.eta.max(1e-3);
        let h_a = 1e-6 * p.a_per_watt.max(1e-3);
        let mut rows = Vec::with_capacity(2 * self.data.len());
        for d in self.data {
            let at = |eta: f64, a: f64| model_db(&SqueezerParams { eta, a_per_watt: a }, d.pump_w);
            let (ep, em) = (
                at(p.eta + h_eta, p.a_per_watt),
                at(p.eta - h_eta, p.a_per_watt),
            );
            let (ap, am) = (at(p.eta, p.a_per_watt + h_a), at(p.eta, p.a_per_watt - h_a));
            rows.push([(ep.0 - em.0) / (2.0 * h_eta), (ap.0 - am.0) / (2.0 * h_a)]);
            rows.push([(ep.1 - em.1) / (2.0 * h_eta), (ap.1 - am.1) / (2.0 * h_a)]);
        }
        rows
    }
}

fn project(eta: f64, a: f64) -> SqueezerParams {
    SqueezerParams {
        eta: eta.clamp(ETA_MIN, 1.0),
        a_per_watt: a.max(A_MIN),
    }
}

pub fn fit_squeezer(data: &[PumpSweepPoint], options: &FitOptions) -> Result<FitReport> {
    for d in data {
        d.validate()?;
    }
    if !data.is_empty() && data.iter().all(|d| d.pump_w == 0.0) {
        return Err(Error::Fit {
            message: "degenerate data: every point has zero pump power".into(),
            best: None,
        });
    }
    let mut powers: Vec<f64> = data.iter().map(|d| d.pump_w).filter(|&p| p > 0.0).collect();
    powers.sort_by(f64::total_cmp);
    powers.dedup();
    if data.len() < 3 || powers.len() < 2 {
        return Err(Error::Precondition(format!(
            "fit needs >= 3 points with >= 2 distinct positive pump powers, got {} points / {} powers",
            data.len(),
            powers.len()
        )));
    }

    let problem = Problem {
        data,
        weights: data
            .iter()
            .map(|d| d.uncertainty_db.map_or(1.0, |s| 1.0 / (s * s)))
            .collect(),
    };

    let mut best = SqueezerParams {
        eta: 1.0,
        a_per_watt: 1.0,
    };
    let mut best_cost = f64::INFINITY;
    for i in 0..15 {
        let eta = 0.3 + 0.7 * i as f64 / 14.0;
        for k in 0..31 {
            let a = 0.1 * 10f64.powf(3.0 * k as f64 / 30.0);
            let p = SqueezerParams { eta, a_per_watt: a };
            let c = problem.cost(&p);
            if c < best_cost {
                best_cost = c;
                best = p;
            }
        }
    }

    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < options.max_iterations {
        iterations += 1;
        let (jtj, jtr) = problem.normal_equations(&best);
        let damped = jtj + lambda * Matrix2::from_diagonal(&jtj.diagonal());
        let Some(step) = damped.lu().solve(&(-jtr)) else {
            lambda *= 10.0;
            continue;
        };
        let trial = project(best.eta + step[0], best.a_per_watt + step[1]);
        let trial_cost = problem.cost(&trial);
        let rel_step = ((trial.eta - best.eta) / best.eta)
            .abs()
            .max(((trial.a_per_watt - best.a_per_watt) / best.a_per_watt).abs());
        if trial_cost <= best_cost {
            best = trial;
            best_cost = trial_cost;
            lambda = (lambda / 10.0).max(1e-15);
            if rel_step < options.step_tolerance {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e16 {
                // No downhill step exists at any damping: a (constrained) minimum.
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::Fit {
            message: format!("no convergence after {iterations} iterations"),
            best: Some((best.eta, best.a_per_watt)),
        });
    }

    let residuals: Vec<PointResidual> = data
        .iter()
        .map(|d| {
            let (s, a) = model_db(&best, d.pump_w);
            PointResidual {
                pump_w: d.pump_w,
                squeezing_db: s - d.squeezing_db,
                antisqueezing_db: a - d.antisqueezing_db,
            }
        })
        .collect();
    let rms_db = (residuals
        .iter()
        .map(|r| r.squeezing_db.powi(2) + r.antisqueezing_db.powi(2))
        .sum::<f64>()
        / (2 * residuals.len()) as f64)
        .sqrt();

    let jac = problem.fd_jacobian(&best);
    let mut jtwj = Matrix2::<f64>::zeros();
    for (pair, w) in jac.chunks(2).zip(&problem.weights) {
        for row in pair {
            let j = Vector2::new(row[0], row[1]);
            jtwj += *w * j * j.transpose();
        }
    }
    let dof = (2 * data.len()).saturating_sub(2).max(1) as f64;
    let has_sigma = data.iter().all(|d| d.uncertainty_db.is_some());
    let scale = if has_sigma { 1.0 } else { best_cost / dof };
    let cov = jtwj
        .try_inverse()
        .map(|m| m * scale)
        .unwrap_or_else(|| Matrix2::from_element(f64::NAN));

    Ok(FitReport {
        params: best,
        residuals,
        rms_db,
        chi_squared: best_cost,
        covariance: [[cov[(0, 0)], cov[(0, 1)]], [cov[(1, 0)], cov[(1, 1)]]],
        iterations,
    })
}
