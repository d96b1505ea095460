//! Models for a waveguide single-pass squeezed-light source: mode structure,
//! quasi-phase matching, loss-limited squeezing, homodyne measurement and
//! parametric gain bandwidth.

pub mod error;
pub mod homodyne;
pub mod io;
pub mod materials;
pub mod modesolver;
pub mod numerics;
pub mod qpm;
pub mod spectrum;
pub mod squeezer;
pub mod units;

pub use error::{Error, Result};
