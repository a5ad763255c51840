//! Discrete free energy and the per-step energy balance.

use crate::error::Result;
use crate::grid::{bulk_inner, surface_inner, BulkField, GridNorms, StripGrid, SurfaceField};
use crate::model::{Mode, ModelConfig};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyParts {
    pub bulk_gradient: f64,
    pub bulk_potential: f64,
    pub surface_gradient: f64,
    pub surface_potential: f64,
    pub penalty: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.bulk_gradient
            + self.bulk_potential
            + self.surface_gradient
            + self.surface_potential
            + self.penalty
    }
}

/// Terms of `E(u, φ)`. In limit mode the penalty is absent (the trace
/// equals `h(φ)` by construction). Potentials evaluate to `+∞` when an
/// obstacle constraint is violated with `eps = 0`.
pub fn energy_parts(
    grid: &StripGrid,
    u: &BulkField,
    phi: &SurfaceField,
    config: &ModelConfig,
) -> Result<EnergyParts> {
    grid.check_bulk(u)?;
    grid.check_surface(phi)?;
    let hx = grid.hx();
    let eps = config.eps;

    let mut bulk_potential = 0.0;
    for ((_, j), &v) in u.values.indexed_iter() {
        bulk_potential += hx * grid.row_weight(j) * config.bulk.potential(eps, v)?;
    }
    let mut surface_potential = 0.0;
    for &p in phi.iter() {
        surface_potential += hx * config.surface.potential(eps, p)?;
    }
    let penalty = match config.mode {
        Mode::Limit => 0.0,
        Mode::Robin => {
            let tr = crate::grid::trace(u);
            let gap = tr.zip_map(phi, |a, p| a - config.coupling.h(p));
            gap.l2_squared(grid) / (2.0 * config.k)
        }
    };
    Ok(EnergyParts {
        bulk_gradient: 0.5 * u.h1_seminorm_squared(grid),
        bulk_potential,
        surface_gradient: 0.5 * phi.h1_seminorm_squared(grid),
        surface_potential,
        penalty,
    })
}

pub fn energy(grid: &StripGrid, u: &BulkField, phi: &SurfaceField, config: &ModelConfig) -> Result<f64> {
    Ok(energy_parts(grid, u, phi, config)?.total())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyReport {
    pub time: f64,
    pub energy: f64,
    pub bulk_dissipation: f64,
    pub surface_dissipation: f64,
    pub forcing_power: f64,
    pub identity_residual: f64,
}

impl EnergyReport {
    /// Report at the initial time, before any step.
    pub fn initial(time: f64, energy: f64) -> Self {
        Self {
            time,
            energy,
            bulk_dissipation: 0.0,
            surface_dissipation: 0.0,
            forcing_power: 0.0,
            identity_residual: 0.0,
        }
    }
}

/// `(E_next − E_prev)/dt + dissipation − forcing_power`.
pub fn energy_identity_residual(
    energy_prev: f64,
    energy_next: f64,
    dt: f64,
    bulk_dissipation: f64,
    surface_dissipation: f64,
    forcing_power: f64,
) -> f64 {
    (energy_next - energy_prev) / dt + bulk_dissipation + surface_dissipation - forcing_power
}

/// Fields on either side of one step plus the forcing used in it.
pub struct StepPair<'a> {
    pub u_prev: &'a BulkField,
    pub u_next: &'a BulkField,
    pub phi_prev: &'a SurfaceField,
    pub phi_next: &'a SurfaceField,
    pub f: &'a BulkField,
    pub f_gamma: &'a SurfaceField,
}

/// Builds the report for the step ending at `time`, with time derivatives
/// by backward differences.
pub fn step_report(
    grid: &StripGrid,
    dt: f64,
    time: f64,
    energy_prev: f64,
    energy_next: f64,
    pair: &StepPair<'_>,
) -> EnergyReport {
    let mut du = pair.u_next.sub(pair.u_prev);
    du.values /= dt;
    let dphi = pair.phi_next.sub(pair.phi_prev).map(|v| v / dt);
    let bulk_dissipation = du.l2_squared(grid);
    let surface_dissipation = dphi.l2_squared(grid);
    let forcing_power = bulk_inner(grid, pair.f, &du) + surface_inner(grid, pair.f_gamma, &dphi);
    EnergyReport {
        time,
        energy: energy_next,
        bulk_dissipation,
        surface_dissipation,
        forcing_power,
        identity_residual: energy_identity_residual(
            energy_prev,
            energy_next,
            dt,
            bulk_dissipation,
            surface_dissipation,
            forcing_power,
        ),
    }
}
