//! Time stepping for the limit problem with `u|Γ = αφ + η`.
//!
//! The boundary rows of `u` are the surface unknown; `φ` is always derived
//! as `(u|Γ − η)/α`. The diffusion substep is the `K = 0` case of the
//! coupled solve used by the Robin scheme, so the two agree as `K → 0`.

use crate::error::{Error, Result};
use crate::grid::{trace, BulkField, SurfaceField};
use crate::model::{energy, EnergyReport, Mode, ModelConfig};
use crate::robin::SolverState;
use crate::scheme::{Reaction, Scheme};
use crate::trajectory::{drive, Evolve, Sample, Trajectory};

#[derive(Clone, Debug)]
pub struct LimitState {
    pub step: usize,
    pub t: f64,
    /// Bulk field whose boundary rows hold `u_Γ`.
    pub u: BulkField,
    pub xi: BulkField,
    pub xi_gamma: SurfaceField,
}

/// `(u_Γ − η)/α` elementwise.
pub fn reconstruct_phi(u_gamma: &SurfaceField, alpha: f64, eta: f64) -> Result<SurfaceField> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::input(format!("alpha must be finite and nonzero, got {alpha}")));
    }
    Ok(u_gamma.map(|s| (s - eta) / alpha))
}

pub struct LimitSolver {
    scheme: Scheme,
    alpha: f64,
    eta: f64,
}

impl LimitSolver {
    /// Validates `config`, which must be in limit mode with affine coupling.
    pub fn new(config: ModelConfig) -> Result<Self> {
        let scheme = Scheme::new(config, Mode::Limit)?;
        let (alpha, eta) = scheme.config.limit_params()?;
        Ok(Self { scheme, alpha, eta })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.scheme.config
    }

    pub fn warnings(&self) -> &[String] {
        &self.scheme.validation.warnings
    }

    pub fn alpha_eta(&self) -> (f64, f64) {
        (self.alpha, self.eta)
    }

    /// Initial state from `u₀` with its boundary rows replaced by `αφ₀ + η`.
    pub fn initial_state(&self) -> LimitState {
        let c = self.config();
        let mut u = c.u0.clone();
        u.set_boundary(&c.phi0.map(|p| self.alpha * p + self.eta));
        LimitState {
            step: 0,
            t: 0.0,
            xi: u.map(|_| 0.0),
            xi_gamma: c.phi0.map(|_| 0.0),
            u,
        }
    }

    pub fn phi(&self, state: &LimitState) -> SurfaceField {
        trace(&state.u).map(|s| (s - self.eta) / self.alpha)
    }

    /// The state with `φ` reconstructed, in the Robin solver's layout.
    pub fn as_solver_state(&self, state: &LimitState) -> SolverState {
        SolverState {
            step: state.step,
            t: state.t,
            u: state.u.clone(),
            phi: self.phi(state),
            xi: state.xi.clone(),
            xi_gamma: state.xi_gamma.clone(),
        }
    }

    /// Post-reaction boundary values `αφ* + η`, i.e. the resolvent of
    /// `s ↦ α·β_Γ((s − η)/α)` applied to the boundary rows.
    pub fn boundary_star(&self, reaction: &Reaction) -> SurfaceField {
        reaction.phi_star.map(|p| self.alpha * p + self.eta)
    }

    pub fn reaction_substep(&self, state: &LimitState) -> Result<Reaction> {
        let (f, fg) = self.scheme.forcing(state.t)?;
        self.scheme.reaction(&state.u, &self.phi(state), &f, &fg, (state.step + 1, state.t))
    }

    /// Advances `state` by one step and returns the reaction output of it.
    pub fn step(&self, state: &mut LimitState) -> Result<Reaction> {
        self.step_with_forcing(state).map(|(r, _)| r)
    }

    fn step_with_forcing(&self, state: &mut LimitState) -> Result<(Reaction, (BulkField, SurfaceField))> {
        let s = &self.scheme;
        let next = state.step + 1;
        let (f, fg) = s.forcing(state.t)?;
        let r = s.reaction(&state.u, &self.phi(state), &f, &fg, (next, state.t))?;
        s.check_finite_bulk(&r.u_star, "reaction", next, state.t)?;
        s.check_finite_surface(&r.phi_star, "reaction", next, state.t)?;
        let (u, _) = s.diffusion(&r)?;
        let t = next as f64 * s.config.dt;
        s.check_finite_bulk(&u, "diffusion", next, t)?;
        *state = LimitState {
            step: next,
            t,
            u,
            xi: r.xi.clone(),
            xi_gamma: r.xi_gamma.clone(),
        };
        Ok((r, (f, fg)))
    }

    pub fn energy(&self, state: &LimitState) -> Result<f64> {
        energy(&self.config().grid, &state.u, &self.phi(state), self.config())
    }

    pub fn run(&self) -> Result<Trajectory> {
        self.run_with_observer(true, |_, _| {})
    }

    /// Runs to `T`; samples carry the reconstructed `φ`.
    pub fn run_with_observer(
        &self,
        with_energy: bool,
        observer: impl FnMut(&Sample, Option<&EnergyReport>),
    ) -> Result<Trajectory> {
        let mut state = self.initial_state();
        drive(self, &mut state, with_energy, observer)
    }
}

impl Evolve for LimitSolver {
    type State = LimitState;

    fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    fn clock(state: &LimitState) -> (usize, f64) {
        (state.step, state.t)
    }

    fn fields(&self, state: &LimitState) -> Result<(BulkField, SurfaceField)> {
        Ok((state.u.clone(), self.phi(state)))
    }

    fn advance(&self, state: &mut LimitState) -> Result<(BulkField, SurfaceField)> {
        self.step_with_forcing(state).map(|(_, f)| f)
    }
}

/// One step of the limit scheme from `state`.
pub fn step_limit(state: &LimitState, config: &ModelConfig) -> Result<LimitState> {
    let solver = LimitSolver::new(config.clone())?;
    let mut next = state.clone();
    solver.step(&mut next)?;
    Ok(next)
}

pub fn run_limit(config: &ModelConfig) -> Result<Trajectory> {
    LimitSolver::new(config.clone())?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::StripGrid;

    #[test]
    fn reconstruct_examples() {
        let g = StripGrid::strip(4, 5, 1.0).unwrap();
        let s = SurfaceField::constant(&g, 3.0);
        assert!(reconstruct_phi(&s, 2.0, 1.0).unwrap().iter().all(|&v| v == 1.0));
        let s = SurfaceField::constant(&g, 0.7);
        assert!(reconstruct_phi(&s, 5.0, 0.7).unwrap().iter().all(|&v| v == 0.0));
        let s = g.surface_from_fn(|x, y| x + y);
        assert_eq!(reconstruct_phi(&s, 1.0, 0.0).unwrap(), s);
        assert!(reconstruct_phi(&s, 0.0, 0.0).is_err());
    }
}
