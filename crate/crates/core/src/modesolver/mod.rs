//! Finite-difference scalar mode solver for trapezoidal ridge waveguides.

mod banded;
mod geometry;
mod lanczos;
mod solve;
mod sweep;

pub use banded::{BandCholesky, NotPositiveDefinite};
pub use geometry::{
    build_grid, GridOptions, IndexGrid, Polarization, WaveguideGeometry, DEFAULT_PADDING_UM,
    DEFAULT_RESOLUTION, MIN_PADDING_UM, MIN_RESOLUTION,
};
pub use solve::{solve_modes, ModeSolution, SolverOptions};
pub use sweep::{
    dispersion_sweep, guided_mode_count, modes_at, single_mode_boundary, width_sweep,
    DispersionPoint, SweepOptions, WidthPoint, DEFAULT_BOUNDARY_TOLERANCE_UM,
};
