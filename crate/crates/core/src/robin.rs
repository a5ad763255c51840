//! Time stepping for the Robin-coupled system.

use crate::error::{Error, Result};
use crate::graph::MonotoneGraph;
use crate::grid::{
    interior_l2, laplace_beltrami, laplacian_bulk, normal_derivative, trace, BulkField, GridNorms,
    SurfaceField,
};
use crate::model::{energy, EnergyReport, Mode, ModelConfig};
use crate::scheme::{Reaction, Scheme};
use crate::trajectory::{drive, Evolve, Sample, Trajectory};

#[derive(Clone, Debug)]
pub struct SolverState {
    pub step: usize,
    pub t: f64,
    pub u: BulkField,
    pub phi: SurfaceField,
    /// Selection of `β_eps(u)` produced by the last reaction substep.
    pub xi: BulkField,
    pub xi_gamma: SurfaceField,
}

impl SolverState {
    pub fn new(u: BulkField, phi: SurfaceField) -> Self {
        Self {
            step: 0,
            t: 0.0,
            xi: u.map(|_| 0.0),
            xi_gamma: phi.map(|_| 0.0),
            u,
            phi,
        }
    }
}

pub struct RobinSolver {
    scheme: Scheme,
}

impl RobinSolver {
    /// Validates `config`, which must be in Robin mode.
    pub fn new(config: ModelConfig) -> Result<Self> {
        Ok(Self {
            scheme: Scheme::new(config, Mode::Robin)?,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.scheme.config
    }

    pub fn warnings(&self) -> &[String] {
        &self.scheme.validation.warnings
    }

    pub fn initial_state(&self) -> SolverState {
        let c = self.config();
        SolverState::new(c.u0.clone(), c.phi0.clone())
    }

    /// Pointwise implicit reaction with explicit `π` and forcing at `state.t`.
    pub fn reaction_substep(&self, state: &SolverState) -> Result<Reaction> {
        let (f, fg) = self.scheme.forcing(state.t)?;
        self.scheme.reaction(&state.u, &state.phi, &f, &fg, (state.step + 1, state.t))
    }

    /// Implicit diffusion and penalty coupling starting from the reaction output.
    pub fn diffusion_substep(&self, reaction: &Reaction) -> Result<(BulkField, SurfaceField)> {
        self.scheme.diffusion(reaction)
    }

    /// Advances `state` by one step and returns the reaction output of it.
    pub fn step(&self, state: &mut SolverState) -> Result<Reaction> {
        self.step_with_forcing(state).map(|(r, _)| r)
    }

    fn step_with_forcing(&self, state: &mut SolverState) -> Result<(Reaction, (BulkField, SurfaceField))> {
        let s = &self.scheme;
        let next = state.step + 1;
        let (f, fg) = s.forcing(state.t)?;
        let r = s.reaction(&state.u, &state.phi, &f, &fg, (next, state.t))?;
        s.check_finite_bulk(&r.u_star, "reaction", next, state.t)?;
        s.check_finite_surface(&r.phi_star, "reaction", next, state.t)?;
        let (u, phi) = s.diffusion(&r)?;
        let t = next as f64 * s.config.dt;
        s.check_finite_bulk(&u, "diffusion", next, t)?;
        s.check_finite_surface(&phi, "diffusion", next, t)?;
        *state = SolverState {
            step: next,
            t,
            u,
            phi,
            xi: r.xi.clone(),
            xi_gamma: r.xi_gamma.clone(),
        };
        Ok((r, (f, fg)))
    }

    pub fn energy(&self, u: &BulkField, phi: &SurfaceField) -> Result<f64> {
        energy(&self.config().grid, u, phi, self.config())
    }

    pub fn run(&self) -> Result<Trajectory> {
        self.run_with_observer(true, |_, _| {})
    }

    /// Runs to `T`, calling `observer` at every time level.
    pub fn run_with_observer(
        &self,
        with_energy: bool,
        observer: impl FnMut(&Sample, Option<&EnergyReport>),
    ) -> Result<Trajectory> {
        let mut state = self.initial_state();
        drive(self, &mut state, with_energy, observer)
    }
}

impl Evolve for RobinSolver {
    type State = SolverState;

    fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    fn clock(state: &SolverState) -> (usize, f64) {
        (state.step, state.t)
    }

    fn fields(&self, state: &SolverState) -> Result<(BulkField, SurfaceField)> {
        Ok((state.u.clone(), state.phi.clone()))
    }

    fn advance(&self, state: &mut SolverState) -> Result<(BulkField, SurfaceField)> {
        self.step_with_forcing(state).map(|(_, f)| f)
    }
}

/// One step of the Robin scheme from `state`.
pub fn step(state: &SolverState, config: &ModelConfig) -> Result<SolverState> {
    let solver = RobinSolver::new(config.clone())?;
    let mut next = state.clone();
    solver.step(&mut next)?;
    Ok(next)
}

pub fn run(config: &ModelConfig) -> Result<Trajectory> {
    match config.mode {
        Mode::Robin => RobinSolver::new(config.clone())?.run(),
        Mode::Limit => crate::limit::run_limit(config),
    }
}

#[derive(Clone, Debug)]
pub struct SteadyState {
    pub state: SolverState,
    /// Steps taken, counting the one whose increment met the tolerance.
    pub iterations: usize,
    /// `‖Δu‖/dt + ‖Δφ‖/dt` at the last step.
    pub residual: f64,
}

/// Steps until `‖u_{n+1} − u_n‖/dt + ‖φ_{n+1} − φ_n‖/dt < tol`. The final
/// time of the configuration is ignored; `max_iter` caps the step count.
/// In limit mode `phi` of the returned state is reconstructed from the trace.
pub fn steady_state(config: &ModelConfig, tol: f64, max_iter: usize) -> Result<SteadyState> {
    if config.f.is_time_dependent() || config.f_gamma.is_time_dependent() {
        return Err(Error::config("steady state requires time-independent forcing"));
    }
    let grid = config.grid;
    let dt = config.dt;
    let increment = |a: &SolverState, b: &SolverState| {
        (b.u.sub(&a.u).l2_squared(&grid).sqrt() + b.phi.sub(&a.phi).l2_squared(&grid).sqrt()) / dt
    };
    let mut residual = f64::INFINITY;
    match config.mode {
        Mode::Robin => {
            let solver = RobinSolver::new(config.clone())?;
            let mut state = solver.initial_state();
            for n in 1..=max_iter {
                let prev = state.clone();
                solver.step(&mut state)?;
                residual = increment(&prev, &state);
                if residual < tol {
                    return Ok(SteadyState {
                        state,
                        iterations: n,
                        residual,
                    });
                }
            }
        }
        Mode::Limit => {
            let solver = crate::limit::LimitSolver::new(config.clone())?;
            let mut state = solver.initial_state();
            let mut prev = solver.as_solver_state(&state);
            for n in 1..=max_iter {
                solver.step(&mut state)?;
                let cur = solver.as_solver_state(&state);
                residual = increment(&prev, &cur);
                if residual < tol {
                    return Ok(SteadyState {
                        state: cur,
                        iterations: n,
                        residual,
                    });
                }
                prev = cur;
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationaryResidual {
    pub bulk_res: f64,
    pub surface_res: f64,
    pub robin_res: f64,
}

impl StationaryResidual {
    pub fn max(&self) -> f64 {
        self.bulk_res.max(self.surface_res).max(self.robin_res)
    }
}

/// Distance from `r` to the admissible set of `graph` (or its Yosida
/// approximation) at `x`, so `r − ξ` with `ξ` the closest selection.
fn projected(graph: &MonotoneGraph, eps: f64, x: f64, r: f64) -> Result<f64> {
    Ok(match graph.regularized_value_set(eps, x)? {
        Some(set) => r - set.clamp(r),
        None => f64::INFINITY,
    })
}

/// L² norms of the residuals of the stationary system:
/// `Δu − ξ − π(u) + f` on interior rows, `Δ_Γφ − ξ_Γ − π_Γ(φ) − h′(φ)∂νu + f_Γ`
/// and `K∂νu + u − h(φ)` on Γ. The normal derivative is one-sided; `ξ` is
/// the selection closest to the rest of the equation, which makes the
/// residual zero exactly when some admissible selection balances it.
/// Forcing is evaluated at `state.t`. In limit mode the transmission
/// residual is `u|Γ − h(φ)`.
pub fn stationary_residual(state: &SolverState, config: &ModelConfig) -> Result<StationaryResidual> {
    let g = &config.grid;
    let f = config.f.bulk(g, state.t)?;
    let fg = config.f_gamma.surface(g, state.t)?;
    let lap = laplacian_bulk(g, &state.u)?;
    let ny = g.ny();
    let mut bulk = state.u.map(|_| 0.0);
    for ((i, j), v) in bulk.values.indexed_iter_mut() {
        if j == 0 || j == ny - 1 {
            continue;
        }
        let x = state.u.values[[i, j]];
        let r = lap.values[[i, j]] - config.bulk.pi(x) + f.values[[i, j]];
        *v = projected(&config.bulk.graph, config.eps, x, r)?;
    }
    let dn = normal_derivative(g, &state.u)?;
    let lb = laplace_beltrami(g, &state.phi)?;
    let h = &config.coupling;
    let mut surf = state.phi.clone();
    let mut robin = state.phi.clone();
    let tr = trace(&state.u);
    let k = match config.mode {
        Mode::Robin => config.k,
        Mode::Limit => 0.0,
    };
    for side in 0..2 {
        let (p, d, l, fs, t) = (
            state.phi.component(side),
            dn.component(side),
            lb.component(side),
            fg.component(side),
            tr.component(side),
        );
        for i in 0..p.len() {
            let r = l[i] - config.surface.pi(p[i]) - h.dh(p[i]) * d[i] + fs[i];
            let sv = projected(&config.surface.graph, config.eps, p[i], r)?;
            let rv = k * d[i] + t[i] - h.h(p[i]);
            if side == 0 {
                surf.bottom[i] = sv;
                robin.bottom[i] = rv;
            } else {
                surf.top[i] = sv;
                robin.top[i] = rv;
            }
        }
    }
    Ok(StationaryResidual {
        bulk_res: interior_l2(g, &bulk),
        surface_res: surf.l2_squared(g).sqrt(),
        robin_res: robin.l2_squared(g).sqrt(),
    })
}
