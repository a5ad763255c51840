mod common;

use std::f64::consts::PI;

use bsac::graph::MonotoneGraph;
use bsac::grid::{BulkField, StripGrid, SurfaceField};
use bsac::model::{
    energy, energy_identity_residual, energy_parts, validate, Coupling, Mode, ModelConfig, Perturbation,
    PotentialSplit, DEFAULT_CLIP,
};
use bsac::robin::run;
use common::*;

#[test]
fn energy_of_zero_and_of_minima() {
    let g = StripGrid::strip(8, 9, 1.5).unwrap();
    let c = double_well(g);
    let e = energy(&g, &BulkField::zeros(&g), &SurfaceField::zeros(&g), &c).unwrap();
    // W(0) = 1/4 on Ω and Γ for the quartic well
    let expected = 0.25 * (g.bulk_measure() + g.surface_measure());
    assert!((e - expected).abs() < 1e-13);

    let mut z = ModelConfig::new(g);
    z.bulk = PotentialSplit::zero();
    z.surface = PotentialSplit::zero();
    assert_eq!(energy(&g, &BulkField::zeros(&g), &SurfaceField::zeros(&g), &z).unwrap(), 0.0);

    let e = energy(&g, &BulkField::constant(&g, 1.0), &SurfaceField::constant(&g, 1.0), &c).unwrap();
    assert!(e.abs() < 1e-14);
}

#[test]
fn penalty_of_constants() {
    let lx = 1.5;
    let g = StripGrid::strip(8, 9, lx).unwrap();
    let mut c = double_well(g);
    c.k = 0.5;
    let p = energy_parts(&g, &BulkField::constant(&g, 1.0), &SurfaceField::zeros(&g), &c).unwrap();
    // (1/(2·0.5))·1·2Lx, plus W_Γ(0)·2Lx, and W(1) = 0 in the bulk
    assert!((p.penalty - 2.0 * lx).abs() < 1e-13);
    assert!((p.surface_potential - 0.25 * 2.0 * lx).abs() < 1e-13);
    assert!(p.bulk_potential.abs() < 1e-14);
    c.mode = Mode::Limit;
    c.coupling = Coupling::affine(1.0, 0.0).unwrap();
    let p = energy_parts(&g, &BulkField::constant(&g, 1.0), &SurfaceField::zeros(&g), &c).unwrap();
    assert_eq!(p.penalty, 0.0);
}

#[test]
fn obstacle_violation_gives_infinite_energy() {
    let g = StripGrid::strip(4, 5, 1.0).unwrap();
    let mut c = ModelConfig::new(g);
    c.bulk = PotentialSplit::double_obstacle();
    let e = energy(&g, &BulkField::constant(&g, 1.5), &SurfaceField::zeros(&g), &c).unwrap();
    assert_eq!(e, f64::INFINITY);
    c.eps = 0.1;
    let e = energy(&g, &BulkField::constant(&g, 1.5), &SurfaceField::zeros(&g), &c).unwrap();
    assert!(e.is_finite());
}

#[test]
fn pi_hat_offset_shifts_energy_only() {
    let g = StripGrid::strip(8, 9, 1.0).unwrap();
    let mut a = double_well(g);
    a.u0 = smooth(&g, 0.7, 1);
    a.phi0 = bsac::grid::trace(&a.u0);
    a.t_end = 0.005;
    let mut b = a.clone();
    let offset = 3.0;
    let shifted = |base: f64| {
        PotentialSplit::new(
            MonotoneGraph::cubic(),
            Perturbation::linear_with_offset(1.0, DEFAULT_CLIP, Some(base + offset)).unwrap(),
        )
    };
    b.bulk = shifted(0.25);
    b.surface = shifted(0.25);
    let (ta, tb) = (run(&a).unwrap(), run(&b).unwrap());
    let shift = offset * (g.bulk_measure() + g.surface_measure());
    for (ra, rb) in ta.energy.iter().zip(&tb.energy) {
        assert!((rb.energy - ra.energy - shift).abs() < 1e-12);
    }
    assert_eq!(ta.last().unwrap().u, tb.last().unwrap().u);
}

#[test]
fn regularized_energy_is_below_exact() {
    let g = StripGrid::strip(8, 9, 1.0).unwrap();
    let mut c = double_well(g);
    let u = smooth(&g, 2.0, 2);
    let phi = bsac::grid::trace(&u);
    let exact = energy(&g, &u, &phi, &c).unwrap();
    c.eps = 0.1;
    assert!(energy(&g, &u, &phi, &c).unwrap() <= exact);
}

#[test]
fn identity_residual_formula() {
    assert_eq!(energy_identity_residual(1.0, 1.0, 0.1, 0.0, 0.0, 0.0), 0.0);
    let r = energy_identity_residual(2.0, 1.5, 0.5, 0.75, 0.25, 0.5);
    assert!((r - (-1.0 + 1.0 - 0.5)).abs() < 1e-15);
}

#[test]
fn validation_examples() {
    let g = StripGrid::strip(8, 9, 1.0).unwrap();
    let mut c = ModelConfig::new(g);
    c.u0 = BulkField::constant(&g, 1.0);
    c.phi0 = SurfaceField::constant(&g, 1.0);
    let v = validate(&c).unwrap();
    assert_eq!(v.compatibility_defect, 0.0);
    assert!(v.warnings.is_empty(), "{:?}", v.warnings);

    c.mode = Mode::Limit;
    c.coupling = Coupling::affine(0.0, 1.0).unwrap();
    assert!(validate(&c).is_err());
    c.coupling = Coupling::tanh(1.0, 0.0).unwrap();
    assert!(validate(&c).is_err());
}

/// Heat equation with linear damping and Neumann-like boundary (`K` huge):
/// `u = e^{−(π²+1)t}cos(πy)`. Energy and its dissipation follow in closed
/// form; the discrete identity residual must be small next to them.
#[test]
fn decoupled_quadratic_matches_heat_dissipation() {
    let g = StripGrid::interval(129).unwrap();
    let mut c = ModelConfig::new(g);
    let damped = PotentialSplit::new(MonotoneGraph::zero(), Perturbation::linear(-1.0, DEFAULT_CLIP).unwrap());
    c.bulk = damped;
    c.surface = PotentialSplit::zero();
    c.k = 1e8;
    c.dt = 1e-5;
    c.t_end = 0.05;
    c.u0 = g.bulk_from_fn(|_, y| (PI * y).cos());
    let tr = run(&c).unwrap();
    let rate = PI * PI + 1.0;
    let last = tr.last().unwrap();
    let exact = g.bulk_from_fn(|_, y| (-rate * last.t).exp() * (PI * y).cos());
    let interior_err = (1..g.ny() - 1)
        .map(|j| (last.u.values[[0, j]] - exact.values[[0, j]]).abs())
        .fold(0.0, f64::max);
    assert!(interior_err < 2e-3, "{interior_err}");
    let dissipation: f64 = tr.energy.iter().skip(1).map(|r| r.bulk_dissipation * c.dt).sum();
    // ∫₀ᵀ‖∂ₜu‖² = rate²·(1/2)·(1 − e^{−2 rate T})/(2 rate)
    let oracle = rate * rate * 0.5 * (1.0 - (-2.0 * rate * c.t_end).exp()) / (2.0 * rate);
    assert!((dissipation / oracle - 1.0).abs() < 1e-2, "{dissipation} vs {oracle}");
    assert!(tr.integrated_residual(c.dt) < 1e-2 * oracle);
}
