//! Linear solves for the implicit diffusion substep.
//!
//! The unknowns are the bulk field `u` and the surface field `φ`, coupled
//! through the boundary rows. All equations are kept in mass form (divided
//! by `hx`), which makes the system symmetric positive definite.

use std::sync::Arc;

use ndarray::{Array1, Array2};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{BulkField, StripGrid, SurfaceField};

/// Multiplies each row of `u` by its quadrature weight `w_j`.
pub fn mass_weighted(grid: &StripGrid, u: &BulkField) -> BulkField {
    let mut out = u.clone();
    for (j, mut col) in out.values.columns_mut().into_iter().enumerate() {
        col *= grid.row_weight(j);
    }
    out
}

/// Exact solver for the coupled system when the coupling slope `a` is
/// uniform along each boundary component. Diagonalizes in `x` by FFT and
/// solves one tridiagonal system in `y` per mode.
///
/// `k = 0` is allowed and yields the Dirichlet-type limit `u_b = aφ + e`.
pub struct ModeSolver {
    grid: StripGrid,
    dt: f64,
    k: f64,
    a: [f64; 2],
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for ModeSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModeSolver")
            .field("grid", &self.grid)
            .field("dt", &self.dt)
            .field("k", &self.k)
            .field("a", &self.a)
            .finish()
    }
}

impl ModeSolver {
    pub fn new(grid: &StripGrid, dt: f64, k: f64, a: [f64; 2]) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::input(format!("dt must be positive, got {dt}")));
        }
        if !(k >= 0.0) || !k.is_finite() {
            return Err(Error::input(format!("K must be nonnegative, got {k}")));
        }
        if k == 0.0 && a.contains(&0.0) {
            return Err(Error::input("coupling slope must be nonzero when K = 0"));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            grid: *grid,
            dt,
            k,
            a,
            forward: planner.plan_fft_forward(grid.nx()),
            inverse: planner.plan_fft_inverse(grid.nx()),
        })
    }

    fn to_modes(&self, data: impl Iterator<Item = f64>) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = data.map(|v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    fn modes_to_row(&self, mut buf: Vec<Complex64>) -> Array1<f64> {
        self.inverse.process(&mut buf);
        let n = buf.len() as f64;
        buf.iter().map(|c| c.re / n).collect()
    }

    /// Solves
    ///
    /// ```text
    /// w(1 + dt·Aₓ)u + dt·A_y u + [Γ] (dt/K)(u − aφ − e) = rhs_u
    /// (1 + dt·Aₓ)φ + (dt/K)·a(aφ + e − u)             = s
    /// ```
    ///
    /// where `Aₓ = −∂ₓₓ`, `A_y` is the graph Laplacian in `y` and `rhs_u` is
    /// already mass weighted. With `k = 0` the second line degenerates to
    /// `u = aφ + e` on the boundary.
    pub fn solve(
        &self,
        rhs_u: &BulkField,
        s: &SurfaceField,
        e: Option<&SurfaceField>,
    ) -> Result<(BulkField, SurfaceField)> {
        let g = &self.grid;
        g.check_bulk(rhs_u)?;
        g.check_surface(s)?;
        if let Some(e) = e {
            g.check_surface(e)?;
        }
        let (nx, ny) = (g.nx(), g.ny());
        let hy = g.hy();
        let dt = self.dt;
        let off = -dt / hy;

        let mut rhs: Vec<Vec<Complex64>> = (0..ny)
            .map(|j| self.to_modes(rhs_u.values.column(j).iter().copied()))
            .collect();
        let s_hat = [
            self.to_modes(s.bottom.iter().copied()),
            self.to_modes(s.top.iter().copied()),
        ];
        let e_hat = e.map(|e| {
            [
                self.to_modes(e.bottom.iter().copied()),
                self.to_modes(e.top.iter().copied()),
            ]
        });

        let mut phi_hat = [vec![Complex64::default(); nx], vec![Complex64::default(); nx]];
        let mut diag = vec![0.0; ny];
        let mut col = vec![Complex64::default(); ny];
        let rows = [0, ny - 1];
        for m in 0..nx {
            let grow = 1.0 + dt * g.x_symbol(m);
            for (j, d) in diag.iter_mut().enumerate() {
                let edge = j == 0 || j == ny - 1;
                *d = g.row_weight(j) * grow + if edge { dt / hy } else { 2.0 * dt / hy };
                col[j] = rhs[j][m];
            }
            let mut denom = [0.0; 2];
            for side in 0..2 {
                let a = self.a[side];
                let dd = self.k * grow + dt * a * a;
                denom[side] = dd;
                let sv = s_hat[side][m];
                let ev = e_hat.as_ref().map_or(Complex64::default(), |e| e[side][m]);
                diag[rows[side]] += dt * grow / dd;
                col[rows[side]] += (sv * a + ev * grow) * (dt / dd);
            }
            thomas_symmetric(&diag, off, &mut col);
            for side in 0..2 {
                let a = self.a[side];
                let sv = s_hat[side][m];
                let ev = e_hat.as_ref().map_or(Complex64::default(), |e| e[side][m]);
                phi_hat[side][m] = (sv * self.k - ev * (dt * a) + col[rows[side]] * (dt * a)) / denom[side];
            }
            for (j, c) in col.iter().enumerate() {
                rhs[j][m] = *c;
            }
        }

        let mut u = Array2::zeros((nx, ny));
        for (j, modes) in rhs.into_iter().enumerate() {
            u.column_mut(j).assign(&self.modes_to_row(modes));
        }
        let [pb, pt] = phi_hat;
        let phi = SurfaceField {
            bottom: self.modes_to_row(pb),
            top: self.modes_to_row(pt),
        };
        let u = BulkField { values: u };
        if !u.is_finite() || !phi.is_finite() {
            return Err(Error::LinearSolve("non-finite solution".into()));
        }
        Ok((u, phi))
    }
}

/// Thomas algorithm for a symmetric tridiagonal matrix with constant
/// off-diagonal `off`. Overwrites `rhs` with the solution.
fn thomas_symmetric(diag: &[f64], off: f64, rhs: &mut [Complex64]) {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut beta = diag[0];
    c[0] = off / beta;
    rhs[0] /= beta;
    for j in 1..n {
        beta = diag[j] - off * c[j - 1];
        c[j] = off / beta;
        rhs[j] = (rhs[j] - rhs[j - 1] * off) / beta;
    }
    for j in (0..n - 1).rev() {
        let next = rhs[j + 1];
        rhs[j] -= next * c[j];
    }
}

/// Coupled system with a node-wise coupling slope `a` (and `K > 0`), solved
/// by conjugate gradients preconditioned with the uniform-slope solver.
pub struct VariableSystem<'a> {
    pub grid: &'a StripGrid,
    pub dt: f64,
    pub k: f64,
    pub a: &'a SurfaceField,
}

pub const PCG_TOL: f64 = 1e-13;
pub const PCG_MAX_ITER: usize = 500;

impl VariableSystem<'_> {
    fn apply(&self, u: &BulkField, phi: &SurfaceField) -> (BulkField, SurfaceField) {
        let g = self.grid;
        let (nx, ny) = (g.nx(), g.ny());
        let (hx, hy, dt, k) = (g.hx(), g.hy(), self.dt, self.k);
        let ax = |v: &dyn Fn(usize) -> f64, i: usize| {
            if nx == 1 {
                0.0
            } else {
                (2.0 * v(i) - v((i + nx - 1) % nx) - v((i + 1) % nx)) / (hx * hx)
            }
        };
        let uv = &u.values;
        let mut hu = Array2::zeros((nx, ny));
        for j in 0..ny {
            let w = g.row_weight(j);
            for i in 0..nx {
                let mut v = w * (uv[[i, j]] + dt * ax(&|ii| uv[[ii, j]], i));
                if j > 0 {
                    v += dt / hy * (uv[[i, j]] - uv[[i, j - 1]]);
                }
                if j + 1 < ny {
                    v += dt / hy * (uv[[i, j]] - uv[[i, j + 1]]);
                }
                hu[[i, j]] = v;
            }
        }
        let mut hphi = SurfaceField::zeros(g);
        for (side, row) in [(0usize, 0usize), (1, ny - 1)] {
            let p = phi.component(side);
            let a = self.a.component(side);
            let out = if side == 0 { &mut hphi.bottom } else { &mut hphi.top };
            for i in 0..nx {
                let gap = uv[[i, row]] - a[i] * p[i];
                hu[[i, row]] += dt / k * gap;
                out[i] = p[i] + dt * ax(&|ii| p[ii], i) - dt / k * a[i] * gap;
            }
        }
        (BulkField { values: hu }, hphi)
    }

    /// Solves the system with right-hand side `w·u* + [Γ](dt/K)e` and
    /// `s − (dt/K)a·e`, i.e. the linearization `h(φ) ≈ aφ + e`.
    pub fn solve(
        &self,
        rhs_u: &BulkField,
        s: &SurfaceField,
        e: &SurfaceField,
    ) -> Result<(BulkField, SurfaceField)> {
        let g = self.grid;
        if !(self.k > 0.0) {
            return Err(Error::input("variable coupling slope requires K > 0"));
        }
        let mean = |v: &Array1<f64>| v.sum() / v.len() as f64;
        let pre = ModeSolver::new(g, self.dt, self.k, [mean(&self.a.bottom), mean(&self.a.top)])?;
        let ny = g.ny();
        let c = self.dt / self.k;
        let mut bu = rhs_u.clone();
        for i in 0..g.nx() {
            bu.values[[i, 0]] += c * e.bottom[i];
            bu.values[[i, ny - 1]] += c * e.top[i];
        }
        let bphi = SurfaceField {
            bottom: s.bottom.clone() - c * &self.a.bottom * &e.bottom,
            top: s.top.clone() - c * &self.a.top * &e.top,
        };
        let b = Pair::new(bu, bphi);
        let b_norm = b.dot(&b).sqrt();
        if b_norm == 0.0 {
            return Ok((b.u.map(|_| 0.0), b.phi.map(|_| 0.0)));
        }

        let precondition = |r: &Pair| -> Result<Pair> {
            let (u, phi) = pre.solve(&r.u, &r.phi, None)?;
            Ok(Pair::new(u, phi))
        };
        let mut x = precondition(&b)?;
        let (hu, hp) = self.apply(&x.u, &x.phi);
        let mut r = b.axpy(-1.0, &Pair::new(hu, hp));
        let mut z = precondition(&r)?;
        let mut p = z.clone();
        let mut rz = r.dot(&z);
        for _ in 0..PCG_MAX_ITER {
            let res = r.dot(&r).sqrt();
            if res <= PCG_TOL * b_norm {
                return Ok((x.u, x.phi));
            }
            let (hu, hp) = self.apply(&p.u, &p.phi);
            let hpp = Pair::new(hu, hp);
            let alpha = rz / p.dot(&hpp);
            x = x.axpy(alpha, &p);
            r = r.axpy(-alpha, &hpp);
            z = precondition(&r)?;
            let rz_new = r.dot(&z);
            p = z.axpy(rz_new / rz, &p);
            rz = rz_new;
        }
        let res = r.dot(&r).sqrt() / b_norm;
        // Rounding floor: accept a tiny stagnated residual.
        if res <= 1e-10 {
            return Ok((x.u, x.phi));
        }
        Err(Error::LinearSolve(format!(
            "PCG did not converge in {PCG_MAX_ITER} iterations, relative residual {res:e}"
        )))
    }
}

#[derive(Clone)]
struct Pair {
    u: BulkField,
    phi: SurfaceField,
}

impl Pair {
    fn new(u: BulkField, phi: SurfaceField) -> Self {
        Self { u, phi }
    }

    fn dot(&self, o: &Pair) -> f64 {
        (&self.u.values * &o.u.values).sum()
            + self.phi.bottom.dot(&o.phi.bottom)
            + self.phi.top.dot(&o.phi.top)
    }

    /// `self + c·o`
    fn axpy(&self, c: f64, o: &Pair) -> Pair {
        Pair {
            u: BulkField {
                values: &self.u.values + &(c * &o.u.values),
            },
            phi: SurfaceField {
                bottom: &self.phi.bottom + &(c * &o.phi.bottom),
                top: &self.phi.top + &(c * &o.phi.top),
            },
        }
    }
}
