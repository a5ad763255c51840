//! Geometry and discrete operators on the periodic strip `(ℝ/Lxℤ) × [0,1]`.
//!
//! Bulk nodes sit at `(i·hx, j·hy)` for `i < nx`, `j < ny`, with `hy =
//! 1/(ny−1)` so rows `0` and `ny−1` lie on the two boundary circles. The
//! interval mode is the degenerate strip with `nx = 1` and `lx = 1`: every
//! x-difference vanishes and each boundary component is a single point.
//!
//! Quadrature is rectangle-in-x, trapezoid-in-y. The discrete Dirichlet
//! energy uses forward differences with the same row weights, so the
//! Laplacian with ghost closure is exactly its mass-weighted gradient.

use ndarray::{Array1, Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Strip,
    Interval,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StripGrid {
    nx: usize,
    ny: usize,
    lx: f64,
    geometry: Geometry,
}

impl StripGrid {
    pub fn strip(nx: usize, ny: usize, lx: f64) -> Result<Self> {
        if nx == 0 {
            return Err(Error::input("nx must be positive"));
        }
        if ny < 3 {
            return Err(Error::input(format!("ny must be at least 3, got {ny}")));
        }
        if !(lx > 0.0 && lx.is_finite()) {
            return Err(Error::input(format!("lx must be positive, got {lx}")));
        }
        Ok(Self {
            nx,
            ny,
            lx,
            geometry: Geometry::Strip,
        })
    }

    /// `[0,1]` with `Γ = {0, 1}`.
    pub fn interval(ny: usize) -> Result<Self> {
        let mut g = Self::strip(1, ny, 1.0)?;
        g.geometry = Geometry::Interval;
        Ok(g)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn hx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        1.0 / (self.ny - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.hx()
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.hy()
    }

    /// Trapezoid weight of row `j` in y.
    pub fn row_weight(&self, j: usize) -> f64 {
        if j == 0 || j + 1 == self.ny {
            0.5 * self.hy()
        } else {
            self.hy()
        }
    }

    /// `|Ω|`.
    pub fn bulk_measure(&self) -> f64 {
        self.lx
    }

    /// `|Γ|` (two boundary components).
    pub fn surface_measure(&self) -> f64 {
        2.0 * self.lx
    }

    /// `(4/hx²)·sin²(πk/nx)`: eigenvalues of the negative periodic second difference.
    pub fn x_symbol(&self, k: usize) -> f64 {
        if self.nx == 1 {
            return 0.0;
        }
        let s = (std::f64::consts::PI * k as f64 / self.nx as f64).sin();
        4.0 * s * s / (self.hx() * self.hx())
    }

    pub fn zeros_bulk(&self) -> BulkField {
        BulkField::zeros(self)
    }

    pub fn zeros_surface(&self) -> SurfaceField {
        SurfaceField::zeros(self)
    }

    pub fn bulk_from_fn(&self, f: impl Fn(f64, f64) -> f64) -> BulkField {
        BulkField {
            values: Array2::from_shape_fn((self.nx, self.ny), |(i, j)| f(self.x(i), self.y(j))),
        }
    }

    /// Surface field with `f(x, y)` evaluated at `y = 0` and `y = 1`.
    pub fn surface_from_fn(&self, f: impl Fn(f64, f64) -> f64) -> SurfaceField {
        SurfaceField {
            bottom: Array1::from_shape_fn(self.nx, |i| f(self.x(i), 0.0)),
            top: Array1::from_shape_fn(self.nx, |i| f(self.x(i), 1.0)),
        }
    }

    pub(crate) fn check_bulk(&self, u: &BulkField) -> Result<()> {
        if u.values.dim() != (self.nx, self.ny) {
            return Err(Error::input(format!(
                "bulk field has shape {:?}, grid expects ({}, {})",
                u.values.dim(),
                self.nx,
                self.ny
            )));
        }
        Ok(())
    }

    pub(crate) fn check_surface(&self, s: &SurfaceField) -> Result<()> {
        if s.bottom.len() != self.nx || s.top.len() != self.nx {
            return Err(Error::input(format!(
                "surface field has lengths ({}, {}), grid expects {}",
                s.bottom.len(),
                s.top.len(),
                self.nx
            )));
        }
        Ok(())
    }
}

/// Order parameter on the bulk nodes, shape `(nx, ny)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BulkField {
    pub values: Array2<f64>,
}

impl BulkField {
    pub fn zeros(grid: &StripGrid) -> Self {
        Self {
            values: Array2::zeros((grid.nx, grid.ny)),
        }
    }

    pub fn constant(grid: &StripGrid, c: f64) -> Self {
        Self {
            values: Array2::from_elem((grid.nx, grid.ny), c),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.mapv(f),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        Zip::from(&self.values)
            .and(&other.values)
            .fold(0.0f64, |m, a, b| m.max((a - b).abs()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            values: &self.values - &other.values,
        }
    }

    /// Overwrites the two boundary rows.
    pub fn set_boundary(&mut self, s: &SurfaceField) {
        let last = self.values.ncols() - 1;
        self.values.column_mut(0).assign(&s.bottom);
        self.values.column_mut(last).assign(&s.top);
    }
}

/// Values on the two boundary components: `bottom` at `y = 0`, `top` at `y = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceField {
    pub bottom: Array1<f64>,
    pub top: Array1<f64>,
}

impl SurfaceField {
    pub fn zeros(grid: &StripGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &StripGrid, c: f64) -> Self {
        Self {
            bottom: Array1::from_elem(grid.nx, c),
            top: Array1::from_elem(grid.nx, c),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            bottom: self.bottom.mapv(&f),
            top: self.top.mapv(&f),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            bottom: Zip::from(&self.bottom)
                .and(&other.bottom)
                .map_collect(|&a, &b| f(a, b)),
            top: Zip::from(&self.top)
                .and(&other.top)
                .map_collect(|&a, &b| f(a, b)),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn is_finite(&self) -> bool {
        self.bottom.iter().chain(self.top.iter()).all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other)
            .bottom
            .iter()
            .chain(self.sub(other).top.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.bottom.iter().chain(self.top.iter())
    }

    /// Component `0` is the bottom row, `1` the top.
    pub fn component(&self, c: usize) -> &Array1<f64> {
        if c == 0 {
            &self.bottom
        } else {
            &self.top
        }
    }
}

fn periodic_second_difference(row: &Array1<f64>, hx: f64) -> Array1<f64> {
    let n = row.len();
    let inv = 1.0 / (hx * hx);
    Array1::from_shape_fn(n, |i| {
        let l = row[(i + n - 1) % n];
        let r = row[(i + 1) % n];
        (l - 2.0 * row[i] + r) * inv
    })
}

/// Five-point Laplacian on interior rows; the boundary rows of the result
/// are zero because they need a closure (see [`robin_ghost`]).
pub fn laplacian_bulk(grid: &StripGrid, u: &BulkField) -> Result<BulkField> {
    grid.check_bulk(u)?;
    let (nx, ny) = (grid.nx, grid.ny);
    let (ix2, iy2) = (1.0 / grid.hx().powi(2), 1.0 / grid.hy().powi(2));
    let v = &u.values;
    let mut out = Array2::zeros((nx, ny));
    for i in 0..nx {
        let (il, ir) = ((i + nx - 1) % nx, (i + 1) % nx);
        for j in 1..ny - 1 {
            out[[i, j]] = (v[[il, j]] - 2.0 * v[[i, j]] + v[[ir, j]]) * ix2
                + (v[[i, j - 1]] - 2.0 * v[[i, j]] + v[[i, j + 1]]) * iy2;
        }
    }
    Ok(BulkField { values: out })
}

/// Periodic second difference along each boundary row.
pub fn laplace_beltrami(grid: &StripGrid, phi: &SurfaceField) -> Result<SurfaceField> {
    grid.check_surface(phi)?;
    let hx = grid.hx();
    Ok(SurfaceField {
        bottom: periodic_second_difference(&phi.bottom, hx),
        top: periodic_second_difference(&phi.top, hx),
    })
}

pub fn trace(u: &BulkField) -> SurfaceField {
    let last = u.values.ncols() - 1;
    SurfaceField {
        bottom: u.values.column(0).to_owned(),
        top: u.values.column(last).to_owned(),
    }
}

/// Outward normal derivative by the second-order one-sided difference.
pub fn normal_derivative(grid: &StripGrid, u: &BulkField) -> Result<SurfaceField> {
    grid.check_bulk(u)?;
    let ny = grid.ny;
    let hy = grid.hy();
    let v = &u.values;
    Ok(SurfaceField {
        bottom: Array1::from_shape_fn(grid.nx, |i| {
            (1.5 * v[[i, 0]] - 2.0 * v[[i, 1]] + 0.5 * v[[i, 2]]) / hy
        }),
        top: Array1::from_shape_fn(grid.nx, |i| {
            (1.5 * v[[i, ny - 1]] - 2.0 * v[[i, ny - 2]] + 0.5 * v[[i, ny - 3]]) / hy
        }),
    })
}

/// Ghost values beyond each boundary row such that the centered outward
/// derivative `(ghost − inner)/(2hy)` satisfies `K·∂νu + u = h(φ)`.
pub fn robin_ghost(
    grid: &StripGrid,
    u: &BulkField,
    phi: &SurfaceField,
    k: f64,
    h: impl Fn(f64) -> f64,
) -> Result<SurfaceField> {
    grid.check_bulk(u)?;
    grid.check_surface(phi)?;
    if !(k > 0.0) {
        return Err(Error::input(format!("K must be positive, got {k}")));
    }
    let ny = grid.ny;
    let hy = grid.hy();
    let v = &u.values;
    let ghost = |inner: f64, boundary: f64, p: f64| inner + 2.0 * hy * (h(p) - boundary) / k;
    Ok(SurfaceField {
        bottom: Array1::from_shape_fn(grid.nx, |i| ghost(v[[i, 1]], v[[i, 0]], phi.bottom[i])),
        top: Array1::from_shape_fn(grid.nx, |i| {
            ghost(v[[i, ny - 2]], v[[i, ny - 1]], phi.top[i])
        }),
    })
}

/// Centered outward derivative from ghost rows.
pub fn ghost_normal_derivative(grid: &StripGrid, u: &BulkField, ghost: &SurfaceField) -> SurfaceField {
    let ny = grid.ny;
    let hy = grid.hy();
    let v = &u.values;
    SurfaceField {
        bottom: Array1::from_shape_fn(grid.nx, |i| (ghost.bottom[i] - v[[i, 1]]) / (2.0 * hy)),
        top: Array1::from_shape_fn(grid.nx, |i| (ghost.top[i] - v[[i, ny - 2]]) / (2.0 * hy)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Norms {
    pub l2: f64,
    pub h1_seminorm: f64,
    pub linf: f64,
}

/// Discrete L², H¹-seminorm and sup norm of a field on the grid.
pub trait GridNorms {
    fn l2_squared(&self, grid: &StripGrid) -> f64;
    fn h1_seminorm_squared(&self, grid: &StripGrid) -> f64;
    fn linf(&self) -> f64;

    fn norms(&self, grid: &StripGrid) -> Norms {
        Norms {
            l2: self.l2_squared(grid).sqrt(),
            h1_seminorm: self.h1_seminorm_squared(grid).sqrt(),
            linf: self.linf(),
        }
    }
}

impl GridNorms for BulkField {
    fn l2_squared(&self, grid: &StripGrid) -> f64 {
        let hx = grid.hx();
        self.values
            .indexed_iter()
            .map(|((_, j), v)| hx * grid.row_weight(j) * v * v)
            .sum()
    }

    fn h1_seminorm_squared(&self, grid: &StripGrid) -> f64 {
        let (nx, ny) = (grid.nx, grid.ny);
        let (hx, hy) = (grid.hx(), grid.hy());
        let v = &self.values;
        let mut s = 0.0;
        for i in 0..nx {
            let ir = (i + 1) % nx;
            for j in 0..ny {
                let dx = (v[[ir, j]] - v[[i, j]]) / hx;
                s += hx * grid.row_weight(j) * dx * dx;
                if j + 1 < ny {
                    let dy = (v[[i, j + 1]] - v[[i, j]]) / hy;
                    s += hx * hy * dy * dy;
                }
            }
        }
        s
    }

    fn linf(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

impl GridNorms for SurfaceField {
    fn l2_squared(&self, grid: &StripGrid) -> f64 {
        grid.hx() * self.iter().map(|v| v * v).sum::<f64>()
    }

    fn h1_seminorm_squared(&self, grid: &StripGrid) -> f64 {
        let hx = grid.hx();
        let n = grid.nx;
        let mut s = 0.0;
        for row in [&self.bottom, &self.top] {
            for i in 0..n {
                let d = (row[(i + 1) % n] - row[i]) / hx;
                s += hx * d * d;
            }
        }
        s
    }

    fn linf(&self) -> f64 {
        self.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

pub fn norms<F: GridNorms>(grid: &StripGrid, field: &F) -> Norms {
    field.norms(grid)
}

/// `∫_Ω u·v` with the grid quadrature.
pub fn bulk_inner(grid: &StripGrid, u: &BulkField, v: &BulkField) -> f64 {
    let hx = grid.hx();
    Zip::indexed(&u.values)
        .and(&v.values)
        .fold(0.0, |s, (_, j), a, b| s + hx * grid.row_weight(j) * a * b)
}

/// `∫_Γ φ·ψ`.
pub fn surface_inner(grid: &StripGrid, a: &SurfaceField, b: &SurfaceField) -> f64 {
    let hx = grid.hx();
    hx * a.iter().zip(b.iter()).map(|(x, y)| x * y).sum::<f64>()
}

/// L² norm over interior rows only, weighting each row by `hy`.
pub fn interior_l2(grid: &StripGrid, u: &BulkField) -> f64 {
    let (hx, hy) = (grid.hx(), grid.hy());
    let ny = grid.ny;
    u.values
        .indexed_iter()
        .filter(|((_, j), _)| *j > 0 && *j + 1 < ny)
        .map(|(_, v)| hx * hy * v * v)
        .sum::<f64>()
        .sqrt()
}
