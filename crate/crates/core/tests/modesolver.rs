use std::f64::consts::PI;

use wgsqueeze::modesolver::*;
use wgsqueeze::Error;

fn coarse(resolution: f64) -> SweepOptions {
    SweepOptions {
        grid: GridOptions {
            resolution,
            padding_um: 2.5,
            window_um: None,
        },
        ..SweepOptions::default()
    }
}

/// Fundamental TE index of an asymmetric three-layer slab from the
/// transcendental equation κd = atan(γs/κ) + atan(γc/κ), by bisection.
fn slab_index(n_core: f64, n_sub: f64, n_clad: f64, thickness_um: f64, wavelength_um: f64) -> f64 {
    let k0 = 2.0 * PI / wavelength_um;
    let f = |n: f64| {
        let kappa = k0 * (n_core * n_core - n * n).sqrt();
        let gs = k0 * (n * n - n_sub * n_sub).sqrt();
        let gc = k0 * (n * n - n_clad * n_clad).sqrt();
        kappa * thickness_um - (gs / kappa).atan() - (gc / kappa).atan()
    };
    let (mut lo, mut hi) = (n_sub + 1e-12, n_core - 1e-12);
    // f decreases with n on the fundamental branch
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Laterally uniform three-layer stack filling the window, so the lateral
/// walls contribute exactly (π/W)² with W the Dirichlet wall spacing.
fn slab_grid(width_um: f64, resolution: f64) -> (IndexGrid, f64) {
    let g = WaveguideGeometry::reference(10.0);
    let lambda = 1.55;
    let h = 1.0 / resolution;
    let nx = (width_um / h).round() as usize;
    let below = (3.0 / h).round() as usize;
    let core_rows = (g.core_thickness_um / h).round() as usize;
    let ny = 2 * below + core_rows;
    let (nc, ns) = (
        g.core.refractive_index(lambda).unwrap(),
        g.substrate.refractive_index(lambda).unwrap(),
    );
    let mut index = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let n = if j < below {
            ns
        } else if j < below + core_rows {
            nc
        } else {
            1.0
        };
        index.extend(std::iter::repeat_n(n, nx));
    }
    let grid = IndexGrid {
        nx,
        ny,
        dx: h,
        dy: h,
        x0: -0.5 * nx as f64 * h,
        y0: -(below as f64) * h,
        index,
        wavelength_um: lambda,
        core_index: nc,
        substrate_index: ns,
        cladding_index: 1.0,
        polarization: Polarization::Vertical,
    };
    // Zero ghost cells one step outside the outermost cell centres.
    let wall_spacing = (nx + 1) as f64 * h;
    (grid, wall_spacing)
}

#[test]
fn slab_limit_matches_transcendental_oracle() {
    let (grid, w) = slab_grid(10.0, 20.0);
    let modes = solve_modes(&grid, 1.55, 1, &SolverOptions::default()).unwrap();
    let k0 = 2.0 * PI / 1.55;
    let n_slab_fd = ((modes[0].propagation_constant_sq + (PI / w).powi(2)) / (k0 * k0)).sqrt();
    let oracle = slab_index(grid.core_index, grid.substrate_index, 1.0, 5.0, 1.55);
    assert!(
        (n_slab_fd - oracle).abs() <= 5e-4,
        "{n_slab_fd} vs {oracle}"
    );
}

#[test]
fn modes_are_orthonormal_symmetric_and_converged() {
    let modes = modes_at(&WaveguideGeometry::reference(11.0), 1.55, 3, &coarse(10.0)).unwrap();
    assert!(modes.len() >= 2);
    for (a, m) in modes.iter().enumerate() {
        assert!((m.l2_norm() - 1.0).abs() < 1e-10);
        assert!(m.relative_residual <= 1e-8, "{}", m.relative_residual);
        assert!(m.effective_index > 2.11 && m.effective_index < 2.13);
        assert_eq!(m.order_label, a + 1);
        for b in modes.iter().skip(a + 1) {
            assert!(m.overlap(b).abs() < 1e-8);
        }
        // even or odd under x → −x
        let parity: Vec<f64> = (0..m.ny)
            .flat_map(|j| (0..m.nx).map(move |i| (i, j)))
            .map(|(i, j)| m.field[j * m.nx + (m.nx - 1 - i)] * m.field[j * m.nx + i])
            .collect();
        let sign = parity.iter().sum::<f64>().signum();
        for (i, j) in (0..m.ny).flat_map(|j| (0..m.nx).map(move |i| (i, j))) {
            let mirrored = m.field[j * m.nx + (m.nx - 1 - i)];
            assert!((mirrored - sign * m.field[j * m.nx + i]).abs() < 1e-8);
        }
    }
    assert!(modes
        .windows(2)
        .all(|w| w[0].effective_index > w[1].effective_index));
}

#[test]
fn mode_count_is_monotone_in_width() {
    let g = WaveguideGeometry::reference(4.0);
    let widths = [3.0, 5.0, 7.0, 9.0, 12.0];
    let points = width_sweep(&g, 1.55, &widths, 4, &coarse(10.0)).unwrap();
    let counts: Vec<usize> = points.iter().map(|p| p.effective_indices.len()).collect();
    assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
    assert_eq!(counts[0], 1);
    assert!(counts[4] >= 2);
}

#[test]
fn refinement_converges() {
    let g = WaveguideGeometry::reference(5.0);
    let n = |r: f64| modes_at(&g, 1.55, 1, &coarse(r)).unwrap()[0].effective_index;
    let (a, b, c) = (n(10.0), n(20.0), n(40.0));
    assert!((c - b).abs() < (b - a).abs(), "{a} {b} {c}");
    assert!((c - b).abs() < 2e-4);
}

#[test]
fn sweep_points_equal_standalone_solves() {
    let g = WaveguideGeometry::reference(5.0);
    let o = coarse(8.0);
    let lambdas = [1.50, 1.55, 1.60];
    let sweep = dispersion_sweep(&g, &lambdas, &o).unwrap();
    for (p, &l) in sweep.iter().zip(&lambdas) {
        let single = modes_at(&g, l, 1, &o).unwrap()[0].effective_index;
        assert_eq!(p.effective_index, single);
        assert_eq!(p.wavelength_um, l);
    }
    assert!(sweep
        .windows(2)
        .all(|w| w[0].effective_index > w[1].effective_index));
}

#[test]
fn boundary_moves_down_for_thicker_cores() {
    let o = coarse(8.0);
    let boundary = |t: f64| {
        let mut g = WaveguideGeometry::reference(5.0);
        g.core_thickness_um = t;
        single_mode_boundary(&g, 1.55, (2.5, 14.0), 0.25, &o).unwrap()
    };
    let (thin, thick) = (boundary(4.5), boundary(5.5));
    assert!(thick < thin, "{thick} vs {thin}");
}

#[test]
fn non_bracketing_range_is_bracket_error() {
    let r = single_mode_boundary(
        &WaveguideGeometry::reference(5.0),
        1.55,
        (3.0, 4.0),
        0.1,
        &coarse(8.0),
    );
    assert!(matches!(r, Err(Error::Bracket(_))), "{r:?}");
}

#[test]
fn cutoff_wavelength_outside_material_range() {
    let r = modes_at(&WaveguideGeometry::reference(5.0), 4.5, 1, &coarse(8.0));
    assert!(
        matches!(r.map_err(|e| e.root().to_string()), Err(s) if s.contains("outside valid range"))
    );
}
