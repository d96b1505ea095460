use std::f64::consts::PI;

use super::banded::BandCholesky;
use super::geometry::{IndexGrid, Polarization};
use super::lanczos::{LanczosSettings, ShiftInvertProblem};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Maximum Lanczos steps per symmetry sector.
    pub max_iterations: usize,
    /// Required ‖Aψ − β²ψ‖ / (‖ψ‖ ‖A‖).
    pub tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 400,
            tolerance: 1e-8,
        }
    }
}

/// One guided mode.
///
/// `field` is row-major on the parent grid and normalised so that
/// `Σ ψ² dx dy = 1` (μm⁻¹ units); its largest-magnitude sample is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSolution {
    pub effective_index: f64,
    /// β² in μm⁻²
    pub propagation_constant_sq: f64,
    pub field: Vec<f64>,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    /// 1 for the fundamental mode, increasing with decreasing n_eff.
    pub order_label: usize,
    pub wavelength_um: f64,
    pub polarization: Polarization,
    pub relative_residual: f64,
}

impl ModeSolution {
    /// Discrete overlap `Σ ψ₁ψ₂ dx dy`.
    pub fn overlap(&self, other: &ModeSolution) -> f64 {
        self.field
            .iter()
            .zip(&other.field)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.dx
            * self.dy
    }

    pub fn l2_norm(&self) -> f64 {
        self.overlap(self).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum InnerEdge {
    Dirichlet,
    Even,
    Odd,
}

/// Column block of the grid with its own boundary at the left (inner) edge.
struct Sector<'g> {
    grid: &'g IndexGrid,
    /// first parent column of the sector
    col0: usize,
    cols: usize,
    inner: InnerEdge,
    k0_sq: f64,
    /// cell ordering: true → index = j * cols + i (stride `cols`), else i * ny + j
    row_major: bool,
}

impl Sector<'_> {
    fn len(&self) -> usize {
        self.cols * self.grid.ny
    }

    fn stride(&self) -> usize {
        if self.row_major {
            self.cols
        } else {
            self.grid.ny
        }
    }

    fn cell(&self, k: usize) -> (usize, usize) {
        if self.row_major {
            (k % self.cols, k / self.cols)
        } else {
            (k / self.grid.ny, k % self.grid.ny)
        }
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        if self.row_major {
            j * self.cols + i
        } else {
            i * self.grid.ny + j
        }
    }

    fn potential(&self, i: usize, j: usize) -> f64 {
        let n = self.grid.at(self.col0 + i, j);
        self.k0_sq * n * n
    }

    fn cx(&self) -> f64 {
        1.0 / (self.grid.dx * self.grid.dx)
    }

    fn cy(&self) -> f64 {
        1.0 / (self.grid.dy * self.grid.dy)
    }

    /// Diagonal of M = σI − A.
    fn shifted_diag(&self, shift: f64, i: usize, j: usize) -> f64 {
        let inner = if i == 0 {
            match self.inner {
                InnerEdge::Dirichlet => 2.0,
                InnerEdge::Even => 1.0,
                InnerEdge::Odd => 3.0,
            }
        } else {
            2.0
        };
        shift - self.potential(i, j) + inner * self.cx() + 2.0 * self.cy()
    }

    /// Lower-band entry (k, l), k ≥ l, of M.
    fn shifted_entry(&self, shift: f64, k: usize, l: usize) -> f64 {
        let (i, j) = self.cell(k);
        if k == l {
            return self.shifted_diag(shift, i, j);
        }
        let (il, jl) = self.cell(l);
        if jl == j && il + 1 == i || il == i && jl + 1 == j {
            if jl == j {
                -self.cx()
            } else {
                -self.cy()
            }
        } else {
            0.0
        }
    }

    fn apply_shifted(&self, shift: f64, x: &[f64], y: &mut [f64]) {
        let (cx, cy) = (self.cx(), self.cy());
        let ny = self.grid.ny;
        for j in 0..ny {
            for i in 0..self.cols {
                let k = self.idx(i, j);
                let mut acc = self.shifted_diag(shift, i, j) * x[k];
                if i > 0 {
                    acc -= cx * x[self.idx(i - 1, j)];
                }
                if i + 1 < self.cols {
                    acc -= cx * x[self.idx(i + 1, j)];
                }
                if j > 0 {
                    acc -= cy * x[self.idx(i, j - 1)];
                }
                if j + 1 < ny {
                    acc -= cy * x[self.idx(i, j + 1)];
                }
                y[k] = acc;
            }
        }
    }

    fn start_vector(&self) -> Vec<f64> {
        let floor = self.grid.guidance_floor();
        let mut state: u64 = 0x9E37_79B9_7F4A_7C15 ^ (self.len() as u64);
        (0..self.len())
            .map(|k| {
                let (i, j) = self.cell(k);
                let n = self.grid.at(self.col0 + i, j);
                // splitmix64 → [0, 1)
                state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
                let mut z = state;
                z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
                z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
                z ^= z >> 31;
                let jitter = (z >> 11) as f64 / (1u64 << 53) as f64;
                (n * n - floor * floor).max(0.0) + 1e-2 * jitter
            })
            .collect()
    }

    /// Scatters a sector vector into a full-grid field.
    fn scatter(&self, v: &[f64], out: &mut [f64]) {
        let nx = self.grid.nx;
        for (k, &x) in v.iter().enumerate().take(self.len()) {
            let (i, j) = self.cell(k);
            let col = self.col0 + i;
            out[j * nx + col] = x;
            match self.inner {
                InnerEdge::Dirichlet => {}
                InnerEdge::Even => out[j * nx + (nx - 1 - col)] = x,
                InnerEdge::Odd => out[j * nx + (nx - 1 - col)] = -x,
            }
        }
    }
}

struct SectorMode {
    beta_sq: f64,
    field: Vec<f64>,
    residual: f64,
}

fn solve_sector(
    sector: &Sector<'_>,
    shift: f64,
    want: usize,
    options: &SolverOptions,
) -> Result<Vec<SectorMode>> {
    let n = sector.len();
    let bw = sector.stride();
    let factor =
        BandCholesky::factor(n, bw, |k, l| sector.shifted_entry(shift, k, l)).map_err(|e| {
            Error::Numerical {
                message: format!(
                    "shifted operator not positive definite at row {} (pivot {:.3e})",
                    e.row, e.pivot
                ),
                residual: f64::NAN,
                iterations: 0,
            }
        })?;
    let max_potential = sector
        .grid
        .index
        .iter()
        .fold(0.0f64, |m, &x| m.max(sector.k0_sq * x * x));
    let apply = |x: &[f64], y: &mut [f64]| sector.apply_shifted(shift, x, y);
    let problem = ShiftInvertProblem {
        shift,
        factor: &factor,
        apply_shifted: &apply,
        operator_scale: 4.0 * sector.cx() + 4.0 * sector.cy() + max_potential,
    };
    let outcome = problem.top_eigenpairs(
        &sector.start_vector(),
        want,
        &LanczosSettings {
            max_iterations: options.max_iterations,
            tolerance: options.tolerance,
            check_every: 10,
        },
    );
    if !outcome.converged {
        let worst = outcome
            .pairs
            .iter()
            .map(|p| p.relative_residual)
            .fold(0.0f64, f64::max);
        return Err(Error::Numerical {
            message: format!(
                "mode solver did not converge ({:?} sector, {} of {} pairs available)",
                sector.inner,
                outcome.pairs.len(),
                want
            ),
            residual: worst,
            iterations: outcome.iterations,
        });
    }

    let full_len = sector.grid.nx * sector.grid.ny;
    let cell_area = sector.grid.dx * sector.grid.dy;
    Ok(outcome
        .pairs
        .into_iter()
        .map(|p| {
            let mut field = vec![0.0; full_len];
            sector.scatter(&p.vector, &mut field);
            let norm = (field.iter().map(|x| x * x).sum::<f64>() * cell_area).sqrt();
            let peak = field
                .iter()
                .copied()
                .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            let scale = peak.signum() / norm;
            field.iter_mut().for_each(|x| *x *= scale);
            SectorMode {
                beta_sq: p.value,
                field,
                residual: p.relative_residual,
            }
        })
        .collect())
}

/// Guided modes of the scalar Helmholtz problem
/// `(∂ₓ² + ∂ᵧ² + k₀²n²) ψ = β² ψ` with ψ = 0 on the window edge,
/// sorted by descending effective index.
///
/// Eigenpairs that fail `n_eff > max(n_substrate, n_cladding)` are dropped,
/// so fewer than `n_modes` may come back. Mirror-symmetric grids are solved as
/// independent even and odd half-width problems.
pub fn solve_modes(
    grid: &IndexGrid,
    wavelength_um: f64,
    n_modes: usize,
    options: &SolverOptions,
) -> Result<Vec<ModeSolution>> {
    if n_modes == 0 {
        return Err(Error::Precondition("n_modes must be >= 1".into()));
    }
    grid.validate()?;
    if (wavelength_um - grid.wavelength_um).abs() > 1e-12 * grid.wavelength_um {
        return Err(Error::Precondition(format!(
            "grid was built at {} um but solve requested at {} um",
            grid.wavelength_um, wavelength_um
        )));
    }

    let k0 = 2.0 * PI / wavelength_um;
    let k0_sq = k0 * k0;
    let n_max = grid.index.iter().fold(0.0f64, |m, &x| m.max(x));
    let shift = k0_sq * n_max * n_max;

    let make = |col0: usize, cols: usize, inner: InnerEdge| Sector {
        grid,
        col0,
        cols,
        inner,
        k0_sq,
        row_major: cols <= grid.ny,
    };

    let mut found: Vec<SectorMode> = Vec::new();
    if grid.is_mirror_symmetric() {
        let half = grid.nx / 2;
        found.extend(solve_sector(
            &make(half, half, InnerEdge::Even),
            shift,
            n_modes,
            options,
        )?);
        // The fundamental of a symmetric structure is even, so the odd sector
        // can contribute at most n_modes − 1.
        if n_modes > 1 {
            found.extend(solve_sector(
                &make(half, half, InnerEdge::Odd),
                shift,
                n_modes - 1,
                options,
            )?);
        }
    } else {
        found.extend(solve_sector(
            &make(0, grid.nx, InnerEdge::Dirichlet),
            shift,
            n_modes,
            options,
        )?);
    }

    found.sort_by(|a, b| b.beta_sq.total_cmp(&a.beta_sq));
    let floor = grid.guidance_floor();
    let modes = found
        .into_iter()
        .filter_map(|m| {
            let n_eff = m.beta_sq.max(0.0).sqrt() / k0;
            (n_eff > floor && n_eff < grid.core_index).then_some((n_eff, m))
        })
        .take(n_modes)
        .enumerate()
        .map(|(k, (n_eff, m))| ModeSolution {
            effective_index: n_eff,
            propagation_constant_sq: m.beta_sq,
            field: m.field,
            nx: grid.nx,
            ny: grid.ny,
            dx: grid.dx,
            dy: grid.dy,
            order_label: k + 1,
            wavelength_um,
            polarization: grid.polarization,
            relative_residual: m.residual,
        })
        .collect();
    Ok(modes)
}
