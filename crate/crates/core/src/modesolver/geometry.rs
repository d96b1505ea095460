use crate::error::{Error, Result};
use crate::materials::{MaterialModel, PolarizationAxis};

pub const MIN_RESOLUTION: f64 = 4.0;
pub const MIN_PADDING_UM: f64 = 2.0;
pub const DEFAULT_RESOLUTION: f64 = 20.0;
pub const DEFAULT_PADDING_UM: f64 = 3.0;

/// Field polarization for the semi-vectorial solve. On a z-cut crystal the
/// vertical field samples the extraordinary index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    Vertical,
    Horizontal,
}

impl Polarization {
    pub fn axis(self) -> PolarizationAxis {
        match self {
            Polarization::Vertical => PolarizationAxis::Extraordinary,
            Polarization::Horizontal => PolarizationAxis::Ordinary,
        }
    }
}

/// Trapezoidal ridge on a substrate, clad above and beside by a uniform medium.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveguideGeometry {
    pub core_thickness_um: f64,
    pub top_width_um: f64,
    /// Measured from the horizontal; 90° gives a rectangular core.
    pub sidewall_angle_deg: f64,
    pub core: MaterialModel,
    pub substrate: MaterialModel,
    pub cladding_index: f64,
    pub polarization: Polarization,
}

impl WaveguideGeometry {
    /// 5.0 μm doped-LN core, 73.5° walls, LiTaO₃ substrate, air cladding.
    pub fn reference(top_width_um: f64) -> Self {
        WaveguideGeometry {
            core_thickness_um: 5.0,
            top_width_um,
            sidewall_angle_deg: 73.5,
            core: crate::materials::doped_lithium_niobate_e(),
            substrate: crate::materials::lithium_tantalate_e(),
            cladding_index: 1.0,
            polarization: Polarization::Vertical,
        }
    }

    pub fn with_top_width(&self, top_width_um: f64) -> Self {
        WaveguideGeometry {
            top_width_um,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.core_thickness_um > 0.0) {
            return Err(Error::Geometry(format!(
                "core_thickness must be > 0, got {}",
                self.core_thickness_um
            )));
        }
        if !(self.top_width_um > 0.0) {
            return Err(Error::Geometry(format!(
                "top_width must be > 0, got {}",
                self.top_width_um
            )));
        }
        if !(self.sidewall_angle_deg > 0.0 && self.sidewall_angle_deg <= 90.0) {
            return Err(Error::Geometry(format!(
                "sidewall_angle must lie in (0, 90] degrees, got {}",
                self.sidewall_angle_deg
            )));
        }
        if !(self.cladding_index >= 1.0 && self.cladding_index.is_finite()) {
            return Err(Error::Geometry(format!(
                "cladding_index must be >= 1, got {}",
                self.cladding_index
            )));
        }
        let axis = self.polarization.axis();
        for m in [&self.core, &self.substrate] {
            if m.axis() != axis {
                return Err(Error::Geometry(format!(
                    "{:?} polarization needs {} material data, '{}' is {}",
                    self.polarization,
                    axis,
                    m.name(),
                    m.axis()
                )));
            }
        }
        Ok(())
    }

    /// Horizontal run of one sidewall, μm.
    fn wall_run(&self) -> f64 {
        if self.sidewall_angle_deg >= 90.0 {
            0.0
        } else {
            self.core_thickness_um / self.sidewall_angle_deg.to_radians().tan()
        }
    }

    pub fn bottom_width_um(&self) -> f64 {
        self.top_width_um + 2.0 * self.wall_run()
    }

    pub fn cross_section_area_um2(&self) -> f64 {
        0.5 * (self.top_width_um + self.bottom_width_um()) * self.core_thickness_um
    }

    /// Core half width at height `y` above the substrate (0 ≤ y ≤ thickness).
    fn half_width_at(&self, y: f64) -> f64 {
        0.5 * self.top_width_um
            + self.wall_run() * (self.core_thickness_um - y) / self.core_thickness_um
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    /// Cells per μm, used for both axes.
    pub resolution: f64,
    /// Clearance between the core and each window edge, μm.
    pub padding_um: f64,
    /// Explicit window (width, height) in μm; overrides `padding_um`.
    pub window_um: Option<(f64, f64)>,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            resolution: DEFAULT_RESOLUTION,
            padding_um: DEFAULT_PADDING_UM,
            window_um: None,
        }
    }
}

/// Rasterised refractive-index map on a uniform cell-centred grid.
///
/// `index` is row-major with row 0 at the bottom of the window:
/// `index[j * nx + i]` is the cell centred at
/// `(x0 + (i + ½) dx, y0 + (j + ½) dy)`. The substrate surface is y = 0 and the
/// core is centred on x = 0 for grids produced by [`build_grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct IndexGrid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub x0: f64,
    pub y0: f64,
    pub index: Vec<f64>,
    pub wavelength_um: f64,
    pub core_index: f64,
    pub substrate_index: f64,
    pub cladding_index: f64,
    pub polarization: Polarization,
}

impl IndexGrid {
    pub fn window_um(&self) -> (f64, f64) {
        (self.nx as f64 * self.dx, self.ny as f64 * self.dy)
    }

    /// Index below which a mode is not guided.
    pub fn guidance_floor(&self) -> f64 {
        self.substrate_index.max(self.cladding_index)
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.index[j * self.nx + i]
    }

    pub fn core_cell_count(&self) -> usize {
        self.index.iter().filter(|&&n| n == self.core_index).count()
    }

    /// Left-right mirror symmetry about the window centre.
    pub fn is_mirror_symmetric(&self) -> bool {
        self.nx.is_multiple_of(2)
            && (0..self.ny).all(|j| {
                let row = &self.index[j * self.nx..(j + 1) * self.nx];
                row.iter().eq(row.iter().rev())
            })
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 3 || self.ny < 3 {
            return Err(Error::Geometry(format!(
                "grid needs at least 3x3 cells, got {}x{}",
                self.nx, self.ny
            )));
        }
        if self.index.len() != self.nx * self.ny {
            return Err(Error::Geometry(format!(
                "index map has {} cells, expected {}",
                self.index.len(),
                self.nx * self.ny
            )));
        }
        if !(self.dx > 0.0 && self.dy > 0.0) {
            return Err(Error::Geometry("cell sizes must be positive".into()));
        }
        if !(self.wavelength_um > 0.0) {
            return Err(Error::Geometry("wavelength must be positive".into()));
        }
        if let Some(&n) = self.index.iter().find(|&&n| {
            n != self.core_index && n != self.substrate_index && n != self.cladding_index
        }) {
            return Err(Error::Geometry(format!(
                "cell index {n} is none of core/substrate/cladding"
            )));
        }
        Ok(())
    }
}

/// Staircase rasterisation of the trapezoid (cell-centre sampling).
pub fn build_grid(
    geometry: &WaveguideGeometry,
    wavelength_um: f64,
    options: &GridOptions,
) -> Result<IndexGrid> {
    geometry.validate()?;
    if !(options.resolution >= MIN_RESOLUTION) {
        return Err(Error::Geometry(format!(
            "resolution must be >= {MIN_RESOLUTION} cells/um, got {}",
            options.resolution
        )));
    }
    let h = 1.0 / options.resolution;
    let thickness = geometry.core_thickness_um;
    let bottom = geometry.bottom_width_um();

    let (pad_x, pad_y) = match options.window_um {
        Some((w, ht)) => ((w - bottom) / 2.0, (ht - thickness) / 2.0),
        None => (options.padding_um, options.padding_um),
    };
    if !(pad_x >= MIN_PADDING_UM - 1e-12 && pad_y >= MIN_PADDING_UM - 1e-12) {
        return Err(Error::Geometry(format!(
            "window too small: core {bottom:.3} x {thickness:.3} um needs at least \
             {MIN_PADDING_UM} um clearance on every side (have {pad_x:.3} x {pad_y:.3})"
        )));
    }

    let core_index = geometry.core.refractive_index(wavelength_um)?;
    let substrate_index = geometry.substrate.refractive_index(wavelength_um)?;
    let cladding_index = geometry.cladding_index;

    let half_cols = ((0.5 * bottom + pad_x) / h - 1e-9).ceil() as usize;
    let nx = 2 * half_cols;
    let below = (pad_y / h).round() as usize;
    let core_rows = (thickness / h).round().max(1.0) as usize;
    let ny = 2 * below + core_rows;
    let x0 = -(half_cols as f64) * h;
    let y0 = -(below as f64) * h;

    let mut index = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let y = y0 + (j as f64 + 0.5) * h;
        let half = if y > 0.0 && y < thickness {
            Some(geometry.half_width_at(y))
        } else {
            None
        };
        for i in 0..nx {
            let x = x0 + (i as f64 + 0.5) * h;
            let n = if y < 0.0 {
                substrate_index
            } else {
                match half {
                    Some(w) if x.abs() <= w => core_index,
                    _ => cladding_index,
                }
            };
            index.push(n);
        }
    }

    Ok(IndexGrid {
        nx,
        ny,
        dx: h,
        dy: h,
        x0,
        y0,
        index,
        wavelength_um,
        core_index,
        substrate_index,
        cladding_index,
        polarization: geometry.polarization,
    })
}
