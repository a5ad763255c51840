#![allow(dead_code)]

use bsac::grid::{trace, BulkField, StripGrid, SurfaceField};
use bsac::model::{Coupling, ModelConfig, PotentialSplit, Profile};

pub fn desk_grid() -> StripGrid {
    StripGrid::strip(64, 64, 1.0).unwrap()
}

/// Quartic double well in bulk and on Γ, `h = id`, zero forcing.
pub fn double_well(grid: StripGrid) -> ModelConfig {
    let mut c = ModelConfig::new(grid);
    c.bulk = PotentialSplit::quartic_double_well();
    c.surface = PotentialSplit::quartic_double_well();
    c
}

pub fn smooth(grid: &StripGrid, amplitude: f64, seed: u64) -> BulkField {
    Profile::RandomSmooth {
        value: 0.0,
        amplitude,
        modes: 4,
        seed,
    }
    .bulk(grid, 0.0)
    .unwrap()
}

/// `φ₀ = (u₀|Γ − η)/α`.
pub fn compatible_phi(u: &BulkField, coupling: &Coupling) -> SurfaceField {
    let (alpha, eta) = coupling.affine_params().unwrap();
    trace(u).map(|s| (s - eta) / alpha)
}

pub fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}
