use std::f64::consts::PI;

use num_complex::Complex;
use proptest::prelude::*;

use super::*;
use crate::geometry::{build_cartesian_grid, build_polar_grid, AnnulusDomain, RectangleDomain};
use crate::map_zoo::{PiecewiseLinearStretch, SlopeOrder};

fn polar(q: f64, n: usize, breaks: &[f64]) -> QuadratureGrid<f64> {
    build_polar_grid(&AnnulusDomain::new(q).unwrap(), n, n, breaks).unwrap()
}

fn square(n: usize, breaks: &[f64]) -> QuadratureGrid<f64> {
    build_cartesian_grid(&RectangleDomain::new(1.0).unwrap(), n, n, breaks).unwrap()
}

/// Midpoint rule with `n` points on `[a, b]`.
fn midpoint_1d(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / n as f64;
    (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

#[test]
fn spiral_has_constant_distortion() {
    let g = MapFamily::g_star(0.5f64, 2.0, 0.0).unwrap();
    for w in [Complex::new(0.6, 0.3), Complex::new(-0.1, -0.9)] {
        let s = pointwise_analysis(&g, w).unwrap();
        assert!((s.k - 2.0).abs() < 1e-13);
        assert!(!s.degenerate && s.jacobian > 0.0);
    }
}

#[test]
fn twisted_spiral_has_the_linear_stretch_distortion() {
    // A twist θ ≠ 0 shears the log-coordinate picture, so K is that of
    // kx + inx + iy rather than k.
    let (q, theta) = (0.5f64, 1.3);
    let g = MapFamily::g_star(q, 2.0, theta).unwrap();
    let n = crate::map_zoo::matching_twist(q, theta, 0);
    let m = crate::map_zoo::LinearStretch::new(2.0, n)
        .unwrap()
        .mu()
        .norm();
    let oracle = (1.0 + m) / (1.0 - m);
    assert!(oracle > 2.0);
    for w in [Complex::new(0.6, 0.3), Complex::new(-0.1, -0.9)] {
        let s = pointwise_analysis(&g, w).unwrap();
        assert!((s.k - oracle).abs() < 1e-12 * oracle);
    }
}

#[test]
fn piecewise_distortions() {
    let f = MapFamily::piecewise_linear(2.0f64, 0.01).unwrap();
    assert!((pointwise_analysis(&f, Complex::new(0.25, 0.5)).unwrap().k - 2.1).abs() < 1e-13);
    assert!((pointwise_analysis(&f, Complex::new(0.75, 0.5)).unwrap().k - 1.9).abs() < 1e-13);
    let g = MapFamily::piecewise_radial(0.5f64, 2.0, 0.04).unwrap();
    assert!((pointwise_analysis(&g, Complex::new(0.6, 0.0)).unwrap().k - 1.8).abs() < 1e-13);
    assert!((pointwise_analysis(&g, Complex::new(0.0, 0.8)).unwrap().k - 2.2).abs() < 1e-13);
}

#[test]
fn conjugation_is_degenerate_and_warned() {
    let m = MapFamily::<f64>::Conjugation;
    let s = pointwise_analysis(&m, Complex::new(0.3, 0.3)).unwrap();
    assert!(s.degenerate);
    assert_eq!(s.k, 1.0);
    let r = mean_distortion(
        &m,
        &ConvexGauge::square(),
        DensityKind::Uniform,
        &square(8, &[]),
    )
    .unwrap();
    assert_eq!(r.degenerate_cells, 64);
    assert!(r.warning.is_some());
    assert!((r.value - 1.0).abs() < 1e-14);
}

#[test]
fn mean_distortion_of_spiral() {
    let g = MapFamily::g_star(0.5, 2.0, 0.0).unwrap();
    let r = mean_distortion(
        &g,
        &ConvexGauge::linear(),
        DensityKind::InverseSquare,
        &polar(0.5, 512, &[]),
    )
    .unwrap();
    let want = 4.0 * PI * 2f64.ln();
    assert!((r.value - want).abs() < 1e-6 * want, "{}", r.value);
    assert_eq!(r.degenerate_cells, 0);
    assert!(r.warning.is_none());
}

#[test]
fn radial_stretch_regimes() {
    let (q, k, eps) = (0.5f64, 2.0, 0.01);
    let g = MapFamily::piecewise_radial(q, k, eps).unwrap();
    let grid = polar(q, 512, &[q.sqrt()]);
    let base = 2.0 * PI * 2f64.ln();
    let lin = mean_distortion(
        &g,
        &ConvexGauge::linear(),
        DensityKind::InverseSquare,
        &grid,
    )
    .unwrap();
    assert!((lin.value - base * k).abs() < 1e-6 * base * k);
    let sq = mean_distortion(
        &g,
        &ConvexGauge::square(),
        DensityKind::InverseSquare,
        &grid,
    )
    .unwrap();
    let want = base * (k * k + eps);
    assert!((sq.value - want).abs() < 1e-6 * want);
}

#[test]
fn density_and_break_requirements() {
    let f = MapFamily::piecewise_linear(2.0, 0.01).unwrap();
    let r = mean_distortion(
        &f,
        &ConvexGauge::linear(),
        DensityKind::InverseSquare,
        &square(8, &[0.5]),
    );
    assert!(matches!(r, Err(LabError::Unsupported(_))));
    let r = mean_distortion(
        &f,
        &ConvexGauge::linear(),
        DensityKind::Uniform,
        &square(9, &[]),
    );
    assert!(matches!(r, Err(LabError::BreakSet(_))));
    let g = MapFamily::piecewise_radial(0.5, 2.0, 0.01).unwrap();
    let r = mean_distortion(
        &g,
        &ConvexGauge::linear(),
        DensityKind::InverseSquare,
        &polar(0.5, 9, &[]),
    );
    assert!(matches!(r, Err(LabError::BreakSet(_))));
}

#[test]
fn linear_stretch_integral_equals_k() {
    let f = MapFamily::piecewise_linear(2.0, 0.01).unwrap();
    let fstar = MapFamily::linear_stretch(2.0, 0.0).unwrap();
    let grid = square(64, &[0.5]);
    for m in [&f, &fstar] {
        let v = mean_distortion(m, &ConvexGauge::linear(), DensityKind::Uniform, &grid).unwrap();
        assert!((v.value - 2.0).abs() < 1e-8);
    }
}

#[test]
fn deficit_examples() {
    let (q, k, eps) = (0.5f64, 2.0, 0.01);
    let gs = MapFamily::g_star(q, k, 0.0).unwrap();
    let ge = MapFamily::piecewise_radial(q, k, eps).unwrap();
    let grid = polar(q, 256, &[q.sqrt()]);
    for gauge in [
        ConvexGauge::linear(),
        ConvexGauge::square(),
        ConvexGauge::flat(),
    ] {
        assert!(deficit(&gs, &gs, &gauge, &grid).unwrap().value.abs() < 1e-10);
    }
    let d = deficit(&ge, &gs, &ConvexGauge::square(), &grid).unwrap();
    assert!((d.value - eps / (k * k)).abs() < 1e-6, "{}", d.value);
    assert!(!d.below_zero);
    let d = deficit(&ge, &gs, &ConvexGauge::linear(), &grid).unwrap();
    assert!(d.value.abs() < 1e-8);
}

#[test]
fn deficit_rejects_bad_reference() {
    let grid = polar(0.5, 16, &[]);
    let gs = MapFamily::g_star(0.5, 2.0, 0.0).unwrap();
    let g1 = MapFamily::spiral_stretch(0.5, 2.0, 0.0, 1).unwrap();
    assert!(deficit(&gs, &g1, &ConvexGauge::square(), &grid).is_err());
    let other_q = MapFamily::g_star(0.4, 2.0, 0.0).unwrap();
    assert!(deficit(&gs, &other_q, &ConvexGauge::square(), &grid).is_err());
    assert!(deficit(&gs, &gs, &ConvexGauge::square(), &square(4, &[])).is_err());
}

#[test]
fn deficits_nonnegative_for_strictly_convex_gauges() {
    let (q, k, theta) = (0.5f64, 2.0, 0.7);
    let gs = MapFamily::g_star(q, k, theta).unwrap();
    let grid = polar(q, 128, &[q.sqrt()]);
    let mut candidates = vec![
        MapFamily::spiral_stretch(q, k, theta, 1).unwrap(),
        MapFamily::spiral_stretch(q, k, theta, 2).unwrap(),
    ];
    for eps in [1e-4, 1e-3, 1e-2, 0.1] {
        candidates.push(MapFamily::PiecewiseRadialStretch(
            crate::map_zoo::PiecewiseRadialStretch::twisted(q, k, eps, theta).unwrap(),
        ));
    }
    for gauge in [ConvexGauge::square(), ConvexGauge::power(3.0).unwrap()] {
        for c in &candidates {
            let d = deficit(c, &gs, &gauge, &grid).unwrap();
            assert!(d.value >= -1e-8, "{} {}", gauge, d.value);
        }
    }
}

#[test]
fn l1_of_radial_stretch_matches_radial_oracle() {
    let (q, k, eps): (f64, f64, f64) = (0.25, 2.0, 0.01);
    let s = eps.sqrt();
    let rho = |r: f64| {
        if r < q.sqrt() {
            r.powf(k - s) * q.powf(s)
        } else {
            r.powf(k + s)
        }
    };
    let oracle = 2.0 * PI * midpoint_1d(q, 1.0, 1_000_000, |r| (r.powf(k) - rho(r)).abs() * r);
    let g = MapFamily::piecewise_radial(q, k, eps).unwrap();
    let gs = MapFamily::g_star(q, k, 0.0).unwrap();
    let grid = build_polar_grid(&AnnulusDomain::new(q).unwrap(), 1024, 16, &[q.sqrt()]).unwrap();
    let v = l1_distance(&g, &gs, &grid).unwrap();
    assert!((v - oracle).abs() < 1e-5 * oracle, "{v} vs {oracle}");
    assert_eq!(l1_distance(&gs, &gs, &grid).unwrap(), 0.0);
}

#[test]
fn l1_of_piecewise_linear_matches_oracle() {
    let f = MapFamily::piecewise_linear(2.0, 0.01).unwrap();
    let fstar = MapFamily::linear_stretch(2.0, 0.0).unwrap();
    let oracle = midpoint_1d(0.0, 1.0, 1_000_000, |x| {
        let g = if x <= 0.5 { 2.1 * x } else { 1.9 * x + 0.1 };
        (g - 2.0 * x).abs()
    });
    assert!((oracle - 0.025).abs() < 1e-9);
    let v = l1_distance(&f, &fstar, &square(256, &[0.5])).unwrap();
    assert!((v - oracle).abs() < 1e-6, "{v}");
}

fn transfer_grids(q: f64, n: usize, breaks: bool) -> (QuadratureGrid<f64>, QuadratureGrid<f64>) {
    let l = rectangle_width(q);
    let (rb, xb) = if breaks {
        (vec![q.sqrt()], vec![l / 2.0])
    } else {
        (vec![], vec![])
    };
    (
        build_polar_grid(&AnnulusDomain::new(q).unwrap(), n, n, &rb).unwrap(),
        build_cartesian_grid(&RectangleDomain::new(l).unwrap(), n, n, &xb).unwrap(),
    )
}

#[test]
fn transfer_of_extremal_pair() {
    let q = (-2.0 * PI).exp();
    let (ag, rg) = transfer_grids(q, 128, false);
    let g = MapFamily::g_star(q, 2.0, 0.0).unwrap();
    let f = MapFamily::linear_stretch(2.0, 0.0).unwrap();
    let t = conformal_transfer_check(&g, &f, &ConvexGauge::square(), &ag, &rg).unwrap();
    let want = 4.0 * PI * PI * 4.0;
    assert!((t.annulus_value - want).abs() < 1e-5 * want);
    assert!((t.rectangle_value - want).abs() < 1e-5 * want);
}

#[test]
fn transfer_of_radial_stretch() {
    let (q, k, eps) = (0.3f64, 2.0, 0.01);
    let (ag, rg) = transfer_grids(q, 128, true);
    let g = MapFamily::piecewise_radial(q, k, eps).unwrap();
    let f = MapFamily::PiecewiseLinearStretch(
        PiecewiseLinearStretch::with_layout(k, eps, rectangle_width(q), SlopeOrder::ShallowFirst)
            .unwrap(),
    );
    for gauge in [ConvexGauge::linear(), ConvexGauge::square()] {
        let t = conformal_transfer_check(&g, &f, &gauge, &ag, &rg).unwrap();
        assert!(t.relative_gap < 1e-5, "{:?}", t);
    }
    // The steep-first layout is the wrong partner.
    let wrong = MapFamily::PiecewiseLinearStretch(
        PiecewiseLinearStretch::with_layout(k, eps, rectangle_width(q), SlopeOrder::SteepFirst)
            .unwrap(),
    );
    assert!(conformal_transfer_check(&g, &wrong, &ConvexGauge::linear(), &ag, &rg).is_err());
}

#[test]
fn transfer_rejects_mismatched_q() {
    let (ag, rg) = transfer_grids(0.3, 16, false);
    let g = MapFamily::g_star(0.4, 2.0, 0.0).unwrap();
    let f = MapFamily::linear_stretch(2.0, 0.0).unwrap();
    assert!(matches!(
        conformal_transfer_check(&g, &f, &ConvexGauge::linear(), &ag, &rg),
        Err(LabError::InvalidParameter { .. })
    ));
    let (_, rg2) = transfer_grids(0.4, 16, false);
    let g = MapFamily::g_star(0.3, 2.0, 0.0).unwrap();
    assert!(conformal_transfer_check(&g, &f, &ConvexGauge::linear(), &ag, &rg2).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn k_matches_beltrami(r in 0.5..1.0f64, a in 0.0..(2.0 * PI), k in 1.1..4.0f64, theta in -PI..PI) {
        let g = MapFamily::g_star(0.5, k, theta).unwrap();
        let s = pointwise_analysis(&g, Complex::from_polar(r, a)).unwrap();
        let m = s.mu.norm();
        prop_assert!(!s.degenerate);
        prop_assert!((s.k - (1.0 + m) / (1.0 - m)).abs() <= 1e-12 * s.k);
    }
}
