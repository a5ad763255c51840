//! Lie-split step shared by the Robin and limit solvers: a pointwise
//! implicit reaction substep followed by one implicit linear diffusion solve
//! for the bulk and surface unknowns together.

use crate::error::{Error, Result};
use crate::grid::{BulkField, SurfaceField};
use crate::linsolve::{mass_weighted, ModeSolver, VariableSystem};
use crate::model::{validate, Mode, ModelConfig, Validation};

/// Output of the reaction substep.
#[derive(Clone, Debug)]
pub struct Reaction {
    pub u_star: BulkField,
    pub phi_star: SurfaceField,
    /// `(input − output)/dt` of the bulk resolvent, an element of `β_eps(u_star)`.
    pub xi: BulkField,
    pub xi_gamma: SurfaceField,
}

pub(crate) struct Scheme {
    pub config: ModelConfig,
    pub validation: Validation,
    direct: Option<ModeSolver>,
    forcing: Option<(BulkField, SurfaceField)>,
}

impl Scheme {
    pub fn new(config: ModelConfig, mode: Mode) -> Result<Self> {
        if config.mode != mode {
            return Err(Error::config(format!(
                "solver expects {mode:?} mode, configuration has {:?}",
                config.mode
            )));
        }
        let validation = validate(&config)?;
        let k = match mode {
            Mode::Robin => config.k,
            Mode::Limit => 0.0,
        };
        let direct = match config.coupling.affine_params() {
            Some((alpha, _)) => Some(ModeSolver::new(&config.grid, config.dt, k, [alpha, alpha])?),
            None => None,
        };
        let forcing = if config.f.is_time_dependent() || config.f_gamma.is_time_dependent() {
            None
        } else {
            Some((
                config.f.bulk(&config.grid, 0.0)?,
                config.f_gamma.surface(&config.grid, 0.0)?,
            ))
        };
        Ok(Self {
            config,
            validation,
            direct,
            forcing,
        })
    }

    pub fn forcing(&self, t: f64) -> Result<(BulkField, SurfaceField)> {
        match &self.forcing {
            Some(f) => Ok(f.clone()),
            None => Ok((
                self.config.f.bulk(&self.config.grid, t)?,
                self.config.f_gamma.surface(&self.config.grid, t)?,
            )),
        }
    }

    pub fn reaction(
        &self,
        u: &BulkField,
        phi: &SurfaceField,
        f: &BulkField,
        f_gamma: &SurfaceField,
        clock: (usize, f64),
    ) -> Result<Reaction> {
        let diverged = || Error::Divergence {
            substep: "reaction",
            step: clock.0,
            t: clock.1,
        };
        let c = &self.config;
        let (dt, eps) = (c.dt, c.eps);
        let mut u_star = u.clone();
        let mut xi = u.clone();
        for ((us, x), (&v, &fv)) in u_star
            .values
            .iter_mut()
            .zip(xi.values.iter_mut())
            .zip(u.values.iter().zip(f.values.iter()))
        {
            let input = v - dt * (c.bulk.pi(v) - fv);
            if !input.is_finite() {
                return Err(diverged());
            }
            let out = c.bulk.graph.step_resolvent(eps, dt, input)?;
            *us = out;
            *x = (input - out) / dt;
        }
        let surface = |p: f64, fv: f64| -> Result<(f64, f64)> {
            let input = p - dt * (c.surface.pi(p) - fv);
            if !input.is_finite() {
                return Err(diverged());
            }
            let out = c.surface.graph.step_resolvent(eps, dt, input)?;
            Ok((out, (input - out) / dt))
        };
        let mut phi_star = phi.clone();
        let mut xi_gamma = phi.clone();
        for side in 0..2 {
            let (p_in, f_in) = (phi.component(side), f_gamma.component(side));
            let (ps, xg) = if side == 0 {
                (&mut phi_star.bottom, &mut xi_gamma.bottom)
            } else {
                (&mut phi_star.top, &mut xi_gamma.top)
            };
            for i in 0..p_in.len() {
                let (out, sel) = surface(p_in[i], f_in[i])?;
                ps[i] = out;
                xg[i] = sel;
            }
        }
        Ok(Reaction {
            u_star,
            phi_star,
            xi,
            xi_gamma,
        })
    }

    pub fn diffusion(&self, r: &Reaction) -> Result<(BulkField, SurfaceField)> {
        let c = &self.config;
        let rhs = mass_weighted(&c.grid, &r.u_star);
        match (&self.direct, c.coupling.affine_params()) {
            (Some(solver), Some((_, eta))) => {
                let e = SurfaceField::constant(&c.grid, eta);
                solver.solve(&rhs, &r.phi_star, Some(&e))
            }
            _ => {
                let a = r.phi_star.map(|p| c.coupling.dh(p));
                let e = r.phi_star.zip_map(&a, |p, ap| c.coupling.h(p) - ap * p);
                VariableSystem {
                    grid: &c.grid,
                    dt: c.dt,
                    k: c.k,
                    a: &a,
                }
                .solve(&rhs, &r.phi_star, &e)
            }
        }
    }

    pub fn check_finite_bulk(&self, u: &BulkField, substep: &'static str, step: usize, t: f64) -> Result<()> {
        if u.is_finite() {
            Ok(())
        } else {
            Err(Error::Divergence { substep, step, t })
        }
    }

    pub fn check_finite_surface(
        &self,
        phi: &SurfaceField,
        substep: &'static str,
        step: usize,
        t: f64,
    ) -> Result<()> {
        if phi.is_finite() {
            Ok(())
        } else {
            Err(Error::Divergence { substep, step, t })
        }
    }
}
