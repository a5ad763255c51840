mod common;

use std::sync::Arc;

use bsac::graph::{Interval, MonotoneGraph};
use bsac::grid::{
    laplace_beltrami, laplacian_bulk, normal_derivative, trace, BulkField, StripGrid, SurfaceField,
};
use bsac::harness::fit_rate;
use bsac::model::{energy_parts, ModelConfig, PotentialSplit};
use proptest::prelude::*;

fn graphs() -> Vec<MonotoneGraph> {
    vec![
        MonotoneGraph::obstacle(-1.0, 1.0).unwrap(),
        MonotoneGraph::obstacle(-0.5, 2.0).unwrap(),
        MonotoneGraph::cubic(),
        MonotoneGraph::polynomial(5, 0.3).unwrap(),
        MonotoneGraph::polynomial(1, 2.0).unwrap(),
        MonotoneGraph::custom(Arc::new(f64::sinh), Arc::new(|r: f64| r.cosh() - 1.0), Interval::real_line())
            .unwrap(),
    ]
}

fn graph() -> impl Strategy<Value = MonotoneGraph> {
    (0..graphs().len()).prop_map(|i| graphs()[i].clone())
}

proptest! {
    #[test]
    fn resolvent_is_nonexpansive(g in graph(), eps in 1e-3f64..10.0, a in -20f64..20.0, b in -20f64..20.0) {
        let (ja, jb) = (g.resolvent(eps, a).unwrap(), g.resolvent(eps, b).unwrap());
        prop_assert!((ja - jb).abs() <= (a - b).abs() * (1.0 + 1e-12) + 1e-13);
    }

    #[test]
    fn yosida_is_monotone_and_lipschitz(g in graph(), eps in 1e-3f64..10.0, a in -20f64..20.0, b in -20f64..20.0) {
        let (ya, yb) = (g.yosida(eps, a).unwrap(), g.yosida(eps, b).unwrap());
        prop_assert!((ya - yb) * (a - b) >= -1e-9 * (1.0 + ya.abs() + yb.abs()));
        prop_assert!((ya - yb).abs() <= (a - b).abs() / eps * (1.0 + 1e-9) + 1e-9);
    }

    #[test]
    fn yosida_bounded_by_minimal_section(g in graph(), eps in 1e-3f64..10.0, x in -3f64..3.0) {
        prop_assume!(g.domain().contains(x));
        let y = g.yosida(eps, x).unwrap();
        prop_assert!(y.abs() <= g.minimal_section(x).unwrap().abs() * (1.0 + 1e-10) + 1e-10);
    }

    #[test]
    fn moreau_envelope_brackets(g in graph(), eps in 1e-2f64..5.0, x in -3f64..3.0) {
        let m = g.moreau_envelope(eps, x).unwrap();
        let m_small = g.moreau_envelope(eps / 2.0, x).unwrap();
        let full = g.beta_hat(x);
        prop_assert!(m >= -1e-14);
        prop_assert!(m <= full * (1.0 + 1e-10) + 1e-12);
        prop_assert!(m_small >= m - 1e-10 * (1.0 + m.abs()));
    }

    #[test]
    fn resolvent_of_yosida_identity(g in graph(), eps in 1e-3f64..5.0, lam in 1e-3f64..5.0, x in -20f64..20.0) {
        let y = g.resolvent_of_yosida(eps, lam, x).unwrap();
        let r = y + lam * g.yosida(eps, y).unwrap() - x;
        prop_assert!(r.abs() <= 1e-10 * (1.0 + x.abs()), "residual {}", r);
    }

    #[test]
    fn yosida_has_sign_of_argument(g in graph(), eps in 1e-3f64..10.0, x in -20f64..20.0) {
        let y = g.yosida(eps, x).unwrap();
        prop_assert!(y * x >= 0.0);
    }

    #[test]
    fn reaction_step_does_not_raise_composite(g in graph(), eps in 0f64..1.0, dt in 1e-4f64..1.0, x in -5f64..5.0) {
        // β̂_ε(y) + |y − x|²/(2dt) ≤ β̂_ε(x) for y the implicit reaction step
        let y = g.step_resolvent(eps, dt, x).unwrap();
        let lhs = g.regularized_beta_hat(eps, y).unwrap() + (y - x).powi(2) / (2.0 * dt);
        let rhs = g.regularized_beta_hat(eps, x).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-10) + 1e-10, "{} > {}", lhs, rhs);
    }
}

fn field(seed: u64, grid: &StripGrid) -> BulkField {
    common::smooth(grid, 1.0, seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn grid_operators_are_linear(s1 in 0u64..1000, s2 in 0u64..1000, a in -3f64..3.0, b in -3f64..3.0, nx in 1usize..12, ny in 3usize..12) {
        let g = StripGrid::strip(nx, ny, 1.3).unwrap();
        let (u, v) = (field(s1, &g), field(s2, &g));
        let comb = BulkField { values: a * &u.values + b * &v.values };
        let close = |x: f64, y: f64, scale: f64| (x - y).abs() <= 1e-13 * scale.max(1.0);
        let lu = laplacian_bulk(&g, &u).unwrap();
        let lv = laplacian_bulk(&g, &v).unwrap();
        let lc = laplacian_bulk(&g, &comb).unwrap();
        let scale = lu.values.iter().chain(lv.values.iter()).fold(0.0f64, |m, x| m.max(x.abs())) * (a.abs() + b.abs());
        for ((x, p), q) in lc.values.iter().zip(lu.values.iter()).zip(lv.values.iter()) {
            prop_assert!(close(*x, a * p + b * q, scale));
        }
        let nu = normal_derivative(&g, &u).unwrap();
        let nv = normal_derivative(&g, &v).unwrap();
        let nc = normal_derivative(&g, &comb).unwrap();
        let scale = nu.iter().chain(nv.iter()).fold(0.0f64, |m, x| m.max(x.abs())) * (a.abs() + b.abs());
        for ((x, p), q) in nc.iter().zip(nu.iter()).zip(nv.iter()) {
            prop_assert!(close(*x, a * p + b * q, scale));
        }
        let (tu, tv) = (trace(&u), trace(&v));
        let lb = |s: &SurfaceField| laplace_beltrami(&g, s).unwrap();
        let tc = trace(&comb);
        let expect = tu.zip_map(&tv, |p, q| a * p + b * q);
        prop_assert!(tc.max_abs_diff(&expect) <= 1e-14 * (a.abs() + b.abs()).max(1.0) * 10.0);
        let (bu, bv, bc) = (lb(&tu), lb(&tv), lb(&tc));
        let scale = bu.iter().chain(bv.iter()).fold(0.0f64, |m, x| m.max(x.abs())) * (a.abs() + b.abs());
        for ((x, p), q) in bc.iter().zip(bu.iter()).zip(bv.iter()) {
            prop_assert!(close(*x, a * p + b * q, scale));
        }
    }

    #[test]
    fn operators_annihilate_constants(c in -5f64..5.0, nx in 1usize..10, ny in 3usize..10) {
        let g = StripGrid::strip(nx, ny, 0.7).unwrap();
        let u = BulkField::constant(&g, c);
        prop_assert!(laplacian_bulk(&g, &u).unwrap().values.iter().all(|&v| v == 0.0));
        prop_assert!(laplace_beltrami(&g, &SurfaceField::constant(&g, c)).unwrap().iter().all(|&v| v == 0.0));
        let mut w = BulkField::zeros(&g);
        let s = SurfaceField::constant(&g, c);
        w.set_boundary(&s);
        prop_assert_eq!(trace(&w), s);
    }

    #[test]
    fn fit_is_scale_invariant(scale in 1e-6f64..1e6, p in 0.1f64..2.0, noise in proptest::collection::vec(-0.1f64..0.1, 7)) {
        let ks = bsac::harness::default_ks();
        let e: Vec<f64> = ks.iter().zip(&noise).map(|(k, n)| k.powf(p) * n.exp()).collect();
        let scaled: Vec<f64> = e.iter().map(|v| v * scale).collect();
        let (a, b) = (fit_rate(&ks, &e).unwrap(), fit_rate(&ks, &scaled).unwrap());
        prop_assert!((a.slope - b.slope).abs() < 1e-12);
        prop_assert!((a.r2 - b.r2).abs() < 1e-12);
    }

    #[test]
    fn penalty_is_nonnegative_and_vanishes_on_transmission(seed in 0u64..500, k in 1e-3f64..10.0) {
        let g = StripGrid::strip(6, 7, 1.0).unwrap();
        let mut c = ModelConfig::new(g);
        c.k = k;
        c.bulk = PotentialSplit::zero();
        c.surface = PotentialSplit::zero();
        let u = field(seed, &g);
        let phi = SurfaceField::constant(&g, 0.1);
        prop_assert!(energy_parts(&g, &u, &phi, &c).unwrap().penalty >= 0.0);
        let matched = trace(&u);
        prop_assert_eq!(energy_parts(&g, &u, &matched, &c).unwrap().penalty, 0.0);
    }
}
