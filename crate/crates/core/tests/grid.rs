use std::f64::consts::PI;

use bsac::grid::{
    bulk_inner, laplacian_bulk, normal_derivative, surface_inner, trace, GridNorms, StripGrid,
};

/// `∫_Ω Δu·v + ∫_Ω ∇u·∇v − ∫_Γ ∂νu·v` on a grid with `n` nodes per side.
fn green_defect(n: usize) -> f64 {
    let g = StripGrid::strip(n, n, 1.0).unwrap();
    let u = g.bulk_from_fn(|x, y| (2.0 * PI * x).cos() * (y * y + 0.3 * y) + y.exp());
    let v = g.bulk_from_fn(|x, y| (2.0 * PI * x).sin() + (2.0 * PI * x).cos() * (1.0 + y).ln());
    let lap = laplacian_bulk(&g, &u).unwrap();
    // Δu is filled on interior rows only; the trapezoid weights on the
    // boundary rows contribute O(hy).
    let volume = bulk_inner(&g, &lap, &v);
    let sum = bsac::grid::BulkField { values: &u.values + &v.values };
    let diff = u.sub(&v);
    let gradient = (sum.h1_seminorm_squared(&g) - diff.h1_seminorm_squared(&g)) / 4.0;
    let flux = surface_inner(&g, &normal_derivative(&g, &u).unwrap(), &trace(&v));
    volume + gradient - flux
}

#[test]
fn green_identity_holds_in_the_limit() {
    let coarse = green_defect(17).abs();
    let mid = green_defect(33).abs();
    let fine = green_defect(65).abs();
    // first order: the half-weight boundary rows carry no Laplacian
    for (a, b) in [(coarse, mid), (mid, fine)] {
        assert!((1.8..2.2).contains(&(a / b)), "{coarse} {mid} {fine}");
    }
    assert!(fine < 0.15, "defect {fine}");
}

#[test]
fn mass_weights_integrate_constants_exactly() {
    for (nx, ny, lx) in [(1, 5, 1.0), (8, 9, 2.5), (16, 33, 0.75)] {
        let g = StripGrid::strip(nx, ny, lx).unwrap();
        let one = g.bulk_from_fn(|_, _| 1.0);
        assert!((bulk_inner(&g, &one, &one) - g.bulk_measure()).abs() < 1e-12);
        let t = trace(&one);
        assert!((surface_inner(&g, &t, &t) - g.surface_measure()).abs() < 1e-12);
    }
}

#[test]
fn normal_derivative_is_second_order() {
    let err = |n: usize| {
        let g = StripGrid::strip(4, n, 1.0).unwrap();
        let u = g.bulk_from_fn(|_, y| (1.3 * y).sin());
        let d = normal_derivative(&g, &u).unwrap();
        let exact_bottom = -1.3;
        let exact_top = 1.3 * (1.3f64).cos();
        d.bottom.iter().map(|v| (v - exact_bottom).abs())
            .chain(d.top.iter().map(|v| (v - exact_top).abs()))
            .fold(0.0f64, f64::max)
    };
    let ratio = err(33) / err(65);
    assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
}
