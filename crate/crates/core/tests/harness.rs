mod common;

use bsac::graph::MonotoneGraph;
use bsac::grid::StripGrid;
use bsac::harness::{ctsdep, fit_rate, make_compatible, sweep_eps, sweep_k, Datum};
use bsac::model::{Coupling, Mode, ModelConfig, Perturbation, PotentialSplit, Profile};

fn small(mode: Mode) -> ModelConfig {
    let g = StripGrid::strip(16, 17, 1.0).unwrap();
    let mut c = common::double_well(g);
    c.mode = mode;
    c.k = 0.1;
    c.dt = 1e-3;
    c.t_end = 0.02;
    c.coupling = Coupling::affine(2.0, 0.5).unwrap();
    c.u0 = common::smooth(&g, 0.4, 7);
    make_compatible(&c).unwrap()
}

fn linear(mode: Mode) -> ModelConfig {
    let mut c = small(mode);
    let lin = PotentialSplit::new(MonotoneGraph::polynomial(1, 1.0).unwrap(), Perturbation::zero());
    c.bulk = lin.clone();
    c.surface = lin;
    c
}

#[test]
fn k_sweep_mismatch_shrinks_with_k() {
    let ks = [1e-1, 3e-2, 1e-2, 3e-3];
    let t = sweep_k(&small(Mode::Robin), &ks).unwrap();
    assert_eq!(t.failures().count(), 0);
    let m: Vec<f64> = t.rows.iter().map(|r| r.norms.as_ref().unwrap().boundary_mismatch).collect();
    assert!(m.windows(2).all(|w| w[1] < w[0]), "{m:?}");
    let fit = t.fits.boundary_mismatch.as_ref().unwrap();
    assert!(fit.slope > 0.5, "slope {}", fit.slope);
}

#[test]
fn k_sweep_rejects_non_affine_and_nonpositive() {
    let mut c = small(Mode::Robin);
    assert!(sweep_k(&c, &[0.0, 1e-2]).is_err());
    c.coupling = Coupling::tanh(1.0, 0.0).unwrap();
    assert!(sweep_k(&c, &[1e-2]).is_err());
}

#[test]
fn eps_sweep_against_itself_is_zero() {
    for mode in [Mode::Robin, Mode::Limit] {
        let t = sweep_eps(&small(mode), &[0.0]).unwrap();
        let n = t.rows[0].norms.as_ref().unwrap();
        assert_eq!((n.x_omega, n.x_gamma, n.boundary_mismatch), (0.0, 0.0, 0.0));
    }
}

#[test]
fn eps_sweep_is_monotone_for_the_obstacle() {
    let mut c = small(Mode::Robin);
    c.bulk = PotentialSplit::double_obstacle();
    c.surface = PotentialSplit::double_obstacle();
    c.coupling = Coupling::identity();
    c.u0 = common::smooth(&c.grid, 0.9, 3);
    c.phi0 = bsac::grid::trace(&c.u0);
    c.f = Profile::Constant(200.0);
    c.f_gamma = Profile::Constant(200.0);
    let t = sweep_eps(&c, &[1e-1, 1e-2, 1e-3, 1e-4]).unwrap();
    let e: Vec<f64> = t.rows.iter().map(|r| r.norms.as_ref().unwrap().x_omega).collect();
    assert!(e.windows(2).all(|w| w[1] < w[0]), "{e:?}");
    assert!(e[0] > 0.0);
}

#[test]
fn zero_perturbation_gives_zero_difference() {
    for mode in [Mode::Robin, Mode::Limit] {
        for which in [Datum::U0, Datum::Phi0, Datum::F, Datum::FGamma] {
            let r = ctsdep(&small(mode), &[0.0], which).unwrap();
            assert_eq!(r.rows[0].diff, 0.0);
            assert_eq!(r.rows[0].ratio, None);
            assert!(r.spread.is_nan());
        }
    }
}

#[test]
fn linear_problem_scales_exactly() {
    for mode in [Mode::Robin, Mode::Limit] {
        for which in [Datum::U0, Datum::Phi0, Datum::F, Datum::FGamma] {
            let r = ctsdep(&linear(mode), &[1e-1, 1e-2, 1e-3], which).unwrap();
            assert!((r.spread - 1.0).abs() < 1e-6, "{mode:?} {which}: {}", r.spread);
        }
    }
}

#[test]
fn ctsdep_rejects_negative_delta() {
    assert!(ctsdep(&small(Mode::Robin), &[-1e-2], Datum::U0).is_err());
}

#[test]
fn fit_rejects_short_tables() {
    assert!(fit_rate(&[1e-1, 1e-2], &[1.0, 0.1]).is_err());
}
