//! Time loop shared by both solvers: sampling, energy reports, observers.

use crate::error::Result;
use crate::grid::{BulkField, SurfaceField};
use crate::model::{energy, step_report, EnergyReport, StepPair};
use crate::scheme::Scheme;

/// Snapshot of the fields at one time level. In limit mode `phi` is the
/// reconstructed surface variable.
#[derive(Clone, Debug)]
pub struct Sample {
    pub step: usize,
    pub t: f64,
    pub u: BulkField,
    pub phi: SurfaceField,
}

/// Result of a run: sampled states, the energy series (one report per time
/// level, starting at `t = 0`) and validation warnings.
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub energy: Vec<EnergyReport>,
    pub warnings: Vec<String>,
    pub compatibility_defect: f64,
}

impl Trajectory {
    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    /// `Σ |identity residual|·dt` over all steps.
    pub fn integrated_residual(&self, dt: f64) -> f64 {
        self.energy.iter().skip(1).map(|r| r.identity_residual.abs() * dt).sum()
    }
}

pub(crate) trait Evolve {
    type State;

    fn scheme(&self) -> &Scheme;
    fn clock(state: &Self::State) -> (usize, f64);
    /// `(u, φ)` as seen by diagnostics.
    fn fields(&self, state: &Self::State) -> Result<(BulkField, SurfaceField)>;
    /// Advances one step and returns the forcing used in it.
    fn advance(&self, state: &mut Self::State) -> Result<(BulkField, SurfaceField)>;
}

/// Drives `ev` to the final time. The observer sees every time level,
/// including the initial one.
pub(crate) fn drive<E: Evolve>(
    ev: &E,
    state: &mut E::State,
    with_energy: bool,
    mut observer: impl FnMut(&Sample, Option<&EnergyReport>),
) -> Result<Trajectory> {
    let scheme = ev.scheme();
    let cfg = &scheme.config;
    let grid = &cfg.grid;
    let steps = cfg.steps();
    let every = cfg.sample_every;

    let mut traj = Trajectory {
        warnings: scheme.validation.warnings.clone(),
        compatibility_defect: scheme.validation.compatibility_defect,
        ..Default::default()
    };
    let (step0, t0) = E::clock(state);
    let (u, phi) = ev.fields(state)?;
    let mut sample = Sample {
        step: step0,
        t: t0,
        u,
        phi,
    };
    let mut e_prev = 0.0;
    if with_energy {
        e_prev = energy(grid, &sample.u, &sample.phi, cfg)?;
        traj.energy.push(EnergyReport::initial(t0, e_prev));
    }
    observer(&sample, traj.energy.last());
    if every > 0 {
        traj.samples.push(sample.clone());
    }

    for n in 0..steps {
        let (f, f_gamma) = ev.advance(state)?;
        let (step, t) = E::clock(state);
        let (u, phi) = ev.fields(state)?;
        let next = Sample { step, t, u, phi };
        if with_energy {
            let e_next = energy(grid, &next.u, &next.phi, cfg)?;
            let pair = StepPair {
                u_prev: &sample.u,
                u_next: &next.u,
                phi_prev: &sample.phi,
                phi_next: &next.phi,
                f: &f,
                f_gamma: &f_gamma,
            };
            traj.energy.push(step_report(grid, cfg.dt, t, e_prev, e_next, &pair));
            e_prev = e_next;
        }
        observer(&next, traj.energy.last());
        sample = next;
        if every > 0 && (n + 1) % every == 0 && n + 1 < steps {
            traj.samples.push(sample.clone());
        }
    }
    traj.samples.push(sample);
    Ok(traj)
}
