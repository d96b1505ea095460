//! Loss-limited squeezing from a single-pass parametric amplifier and
//! parameter estimation from pump-power sweeps.

mod fit;
mod model;

pub use fit::{fit_squeezer, FitOptions, FitReport, PointResidual};
pub use model::{
    eta_from_budget, infer_waveguide_loss, model_db, model_db_jacobian, squeeze_levels,
    DetectionComponents, LossBudget, PumpSweepPoint, SqueezeLevels, SqueezerParams,
};
