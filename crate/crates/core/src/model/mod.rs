//! Model data: potentials, coupling, forcing, initial data and run controls.

mod coupling;
mod energy;
mod potential;
mod source;

pub use coupling::{Coupling, CouplingKind};
pub use energy::{
    energy, energy_identity_residual, energy_parts, step_report, EnergyParts, EnergyReport, StepPair,
};
pub use potential::{custom_perturbation, Perturbation, PotentialSplit, DEFAULT_CLIP};
pub use source::Profile;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{normal_derivative, trace, BulkField, GridNorms, StripGrid, SurfaceField};

/// Which transmission condition couples bulk and surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `K∂νu + u = h(φ)` with `K > 0`.
    Robin,
    /// `u|Γ = αφ + η`.
    Limit,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "robin" => Ok(Mode::Robin),
            "limit" => Ok(Mode::Limit),
            _ => Err(Error::config(format!("unknown mode '{s}'"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Robin => "robin",
            Mode::Limit => "limit",
        })
    }
}

/// Compatibility defects above this trigger a warning.
pub const COMPATIBILITY_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct ModelConfig {
    pub grid: StripGrid,
    pub mode: Mode,
    pub k: f64,
    /// Yosida parameter; `0` uses the graphs themselves.
    pub eps: f64,
    pub dt: f64,
    pub t_end: f64,
    pub bulk: PotentialSplit,
    pub surface: PotentialSplit,
    pub coupling: Coupling,
    pub f: Profile,
    pub f_gamma: Profile,
    pub u0: BulkField,
    pub phi0: SurfaceField,
    /// Record a snapshot every this many steps; `0` keeps only the final state.
    pub sample_every: usize,
}

impl ModelConfig {
    /// Minimal Robin configuration: double-well potentials, `h = id`, no
    /// forcing, zero initial data. Meant to be adjusted field by field.
    pub fn new(grid: StripGrid) -> Self {
        Self {
            grid,
            mode: Mode::Robin,
            k: 1.0,
            eps: 0.0,
            dt: 1e-4,
            t_end: 0.1,
            bulk: PotentialSplit::double_well(),
            surface: PotentialSplit::double_well(),
            coupling: Coupling::identity(),
            f: Profile::Zero,
            f_gamma: Profile::Zero,
            u0: BulkField::zeros(&grid),
            phi0: SurfaceField::zeros(&grid),
            sample_every: 0,
        }
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }

    /// Conservative step for the split scheme:
    /// `min(1e-3, 0.25/(L + ‖h′‖‖h″‖/K + 1))`.
    pub fn default_dt(&self) -> f64 {
        let lip = self.bulk.lipschitz().max(self.surface.lipschitz());
        let curvature = match self.mode {
            Mode::Robin if self.k > 0.0 => {
                self.coupling.sup_dh() * self.coupling.sup_d2h() / self.k
            }
            _ => 0.0,
        };
        let bound = 0.25 / (lip + curvature + 1.0);
        if bound.is_finite() {
            bound.min(1e-3)
        } else {
            1e-3
        }
    }

    /// Returns a copy with limit-mode boundary rows set to `αφ₀ + η`.
    pub fn with_compatible_trace(mut self) -> Result<Self> {
        if self.mode == Mode::Limit {
            let (alpha, eta) = self.limit_params()?;
            let tr = self.phi0.map(|p| alpha * p + eta);
            self.u0.set_boundary(&tr);
        }
        Ok(self)
    }

    /// `(α, η)` of the affine coupling, required in limit mode.
    pub fn limit_params(&self) -> Result<(f64, f64)> {
        match self.coupling.affine_params() {
            Some((alpha, eta)) if alpha != 0.0 => Ok((alpha, eta)),
            Some(_) => Err(Error::config("limit mode requires alpha != 0")),
            None => Err(Error::config("limit mode requires an affine coupling")),
        }
    }
}

/// Outcome of [`validate`] for a usable configuration.
#[derive(Clone, Debug, Default)]
pub struct Validation {
    pub warnings: Vec<String>,
    /// `‖K∂νu₀ + u₀ − h(φ₀)‖` on Γ (with `K = 0` in limit mode).
    pub compatibility_defect: f64,
}

/// `‖K∂νu₀ + u₀|Γ − h(φ₀)‖_{L²(Γ)}` using the one-sided normal derivative.
pub fn compatibility_defect(config: &ModelConfig) -> Result<f64> {
    let g = &config.grid;
    let tr = trace(&config.u0);
    let mut gap = tr.zip_map(&config.phi0, |u, p| u - config.coupling.h(p));
    if config.mode == Mode::Robin {
        let dn = normal_derivative(g, &config.u0)?;
        gap = gap.zip_map(&dn, |v, d| v + config.k * d);
    }
    Ok(gap.l2_squared(g).sqrt())
}

/// Checks a configuration. Hard problems are collected into a single
/// [`Error::Config`]; soft ones come back as warnings.
pub fn validate(config: &ModelConfig) -> Result<Validation> {
    let mut errors = Vec::new();
    let g = &config.grid;
    if config.u0.values.dim() != (g.nx(), g.ny()) {
        errors.push(format!(
            "u0 has shape {:?}, grid needs ({}, {})",
            config.u0.values.dim(),
            g.nx(),
            g.ny()
        ));
    }
    if config.phi0.bottom.len() != g.nx() || config.phi0.top.len() != g.nx() {
        errors.push(format!("phi0 must have {} nodes per boundary component", g.nx()));
    }
    if config.mode == Mode::Robin && !(config.k > 0.0 && config.k.is_finite()) {
        errors.push(format!("Robin mode requires K > 0, got {}", config.k));
    }
    if config.mode == Mode::Limit {
        if let Err(e) = config.limit_params() {
            errors.push(e.to_string());
        }
    }
    if !(config.dt > 0.0 && config.dt.is_finite()) {
        errors.push(format!("dt must be positive, got {}", config.dt));
    } else if !(config.dt < config.t_end) {
        errors.push(format!("dt = {} must be below T = {}", config.dt, config.t_end));
    }
    if !(config.eps >= 0.0 && config.eps.is_finite()) {
        errors.push(format!("eps must be nonnegative, got {}", config.eps));
    }
    if !config.u0.is_finite() || !config.phi0.is_finite() {
        errors.push("initial data must be finite".to_string());
    }
    if !errors.is_empty() {
        return Err(Error::Config(errors.join("; ")));
    }

    let mut warnings = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for (name, split) in [("bulk", &config.bulk), ("surface", &config.surface)] {
        warnings.extend(split.check(&mut rng, 200).into_iter().map(|w| format!("{name} potential: {w}")));
    }
    warnings.extend(config.coupling.check(&mut rng, 200).into_iter().map(|w| format!("coupling: {w}")));

    let defect = compatibility_defect(config)?;
    if defect > COMPATIBILITY_TOL {
        warnings.push(format!("initial data incompatible with transmission condition: defect {defect:e}"));
    }
    let dt_bound = config.default_dt();
    if config.dt > dt_bound * 4.0 {
        warnings.push(format!("dt = {} is well above the suggested {dt_bound:e}", config.dt));
    }
    Ok(Validation {
        warnings,
        compatibility_defect: defect,
    })
}
