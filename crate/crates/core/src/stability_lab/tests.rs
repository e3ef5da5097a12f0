use std::f64::consts::{PI, TAU};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::error::LabError;
use crate::gauge::ConvexGauge;
use crate::geometry::{build_cartesian_grid, build_polar_grid, AnnulusDomain, RectangleDomain};
use crate::map_zoo::{LinearStretch, MapFamily};
use crate::Grid;

fn square_grid(n: usize) -> Grid {
    build_cartesian_grid(&RectangleDomain::new(1.0).unwrap(), n, n, &[0.5]).unwrap()
}

fn polar(q: f64, n: usize) -> Grid {
    build_polar_grid(&AnnulusDomain::new(q).unwrap(), n, n, &[]).unwrap()
}

fn fstar(k: f64) -> LinearStretch<f64> {
    LinearStretch::new(k, 0.0).unwrap()
}

fn feps(k: f64, eps: f64) -> crate::Map {
    MapFamily::piecewise_linear(k, eps).unwrap()
}

#[test]
fn alpha_vanishes_on_the_real_families() {
    let grid = square_grid(32);
    let fs = fstar(2.0);
    let a = alpha_star(&MapFamily::linear_stretch(2.0, 0.0).unwrap(), &fs, &grid).unwrap();
    assert!(a.alpha.abs() < 1e-14 && (a.r - 2.0).abs() < 1e-12, "{a:?}");
    let a = alpha_star(&feps(2.0, 0.01), &fs, &grid).unwrap();
    assert!(a.alpha.abs() < 1e-14 && !a.degenerate);
}

#[test]
fn alpha_is_rotation_equivariant() {
    let grid = square_grid(16);
    let fs = fstar(2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let beta: f64 = rng.gen_range(-3.0..3.0);
        let f = MapFamily::compose(MapFamily::rotation(beta).unwrap(), feps(2.0, 0.01)).unwrap();
        let a = alpha_star(&f, &fs, &grid).unwrap().alpha;
        let d = Complex::from_polar(1.0, a) - Complex::from_polar(1.0, -beta);
        assert!(d.norm() < 1e-12, "beta {beta} alpha {a}");
        assert!(a > -PI && a <= PI);
    }
}

#[test]
fn alpha_rejects_a_conformal_reference() {
    let r = alpha_star(&feps(2.0, 0.01), &fstar(1.0), &square_grid(8));
    assert!(matches!(r, Err(LabError::Unsupported(_))));
}

#[test]
fn k_l2_audit_on_the_stretch_family() {
    let grid = square_grid(64);
    for eps in [1e-4, 1e-3, 1e-2] {
        let r = audit_k_l2(&feps(2.0, eps), &fstar(2.0), &ConvexGauge::square(), &grid).unwrap();
        // Square gauge: δ = ε/k² and ∫φ(K*) = k², so both sides equal ε.
        assert!((r.lhs - eps).abs() < 1e-12, "{r:?}");
        assert!((r.rhs - eps).abs() < 1e-12, "{r:?}");
        assert!(r.pass);
        assert!((r.get_constant("delta").unwrap() - eps / 4.0).abs() < 1e-14);
    }
    let at_star = audit_k_l2(
        &MapFamily::linear_stretch(2.0, 0.0).unwrap(),
        &fstar(2.0),
        &ConvexGauge::square(),
        &grid,
    )
    .unwrap();
    assert!(at_star.lhs == 0.0 && at_star.pass);
    let flat = audit_k_l2(&feps(2.0, 0.01), &fstar(2.0), &ConvexGauge::flat(), &grid);
    assert!(matches!(flat, Err(LabError::Unsupported(_))));
}

#[test]
fn k_mean_audit_constants() {
    let grid = square_grid(64);
    let r = audit_k_mean(&feps(2.0, 0.01), &fstar(2.0), &ConvexGauge::square(), &grid).unwrap();
    assert!((r.get_constant("C").unwrap() - 0.5).abs() < 1e-15);
    assert!((r.lhs - 2.0).abs() < 1e-12);
    assert!((r.rhs - 2.0 * (1.0 + 0.5 * 0.0025)).abs() < 1e-12);
    assert!(r.pass && r.notes.is_empty());

    let lin = audit_k_mean(&feps(2.0, 0.01), &fstar(2.0), &ConvexGauge::linear(), &grid).unwrap();
    assert!(lin.get_constant("delta").unwrap().abs() < 1e-14);
    assert!((lin.lhs - lin.rhs).abs() < 1e-12 && lin.pass);
    assert_eq!(lin.notes.len(), 1);
}

#[test]
fn alignment_integrals() {
    let grid = square_grid(64);
    let k: f64 = 2.0;
    let at_star = audit_alignment(
        &MapFamily::linear_stretch(k, 0.0).unwrap(),
        &fstar(k),
        &grid,
    )
    .unwrap();
    assert!(at_star.real_part_gap.abs() < 1e-10);
    assert!(at_star.imag_part_mass < 1e-10 && at_star.absdiff_mass < 1e-10);

    // Twisted reference: the integrands are complex but still aligned.
    let twisted = LinearStretch::new(k, 0.7).unwrap();
    let r = audit_alignment(&MapFamily::linear_stretch(k, 0.7).unwrap(), &twisted, &grid).unwrap();
    assert!(
        r.real_part_gap.abs() < 1e-10 && r.imag_part_mass < 1e-10,
        "{r:?}"
    );

    let eps: f64 = 0.01;
    let mu = (k - 1.0) / (k + 1.0);
    let oracle: f64 = [k + eps.sqrt(), k - eps.sqrt()]
        .iter()
        .map(|s| 0.5 * ((s - 1.0) / 2.0 - mu * (s + 1.0) / 2.0).abs())
        .sum();
    let r = audit_alignment(&feps(k, eps), &fstar(k), &grid).unwrap();
    assert!(
        (r.absdiff_mass - oracle).abs() < 1e-8,
        "{} vs {oracle}",
        r.absdiff_mass
    );
    assert!(r.report.pass);
}

#[test]
fn alignment_bound_on_a_rotated_candidate() {
    let grid = square_grid(32);
    let f = MapFamily::compose(
        MapFamily::linear_stretch(2.0, 0.3).unwrap(),
        MapFamily::piecewise_linear(1.5, 0.1).unwrap(),
    )
    .unwrap();
    let r = audit_alignment(&f, &fstar(2.0), &grid).unwrap();
    assert!(r.imag_part_mass > 1e-3);
    assert!(r.report.pass, "{r:?}");
}

#[test]
fn homotopy_gap() {
    let grid = polar(0.5, 64);
    let sq = ConvexGauge::square();
    let one = audit_gn_gap(0.5, 1.0, 0.0, 1, &ConvexGauge::linear(), &grid).unwrap();
    assert!(one.pass && one.rhs > 0.0);
    // k = 1, θ = 0: g* is the identity, so the reference is the inverse-square mass.
    assert!((one.rhs - TAU * 2f64.ln()).abs() < 1e-9);
    let g1 = audit_gn_gap(0.5, 2.0, 0.0, 1, &sq, &grid).unwrap();
    let g2 = audit_gn_gap(0.5, 2.0, 0.0, 2, &sq, &grid).unwrap();
    assert!(g1.pass && g2.pass);
    assert!(g2.lhs - g2.rhs > g1.lhs - g1.rhs);
    assert!(matches!(
        audit_gn_gap(0.5, 2.0, 0.0, 0, &sq, &grid),
        Err(LabError::InvalidParameter { .. })
    ));
    assert!(audit_gn_gap(0.4, 2.0, 0.0, 1, &sq, &grid).is_err());
}

#[test]
fn sweeps_are_seeded_and_report_true_behaviour() {
    let a = taylor_sweep(&ConvexGauge::square(), 2000, 5).unwrap();
    assert_eq!(a, taylor_sweep(&ConvexGauge::square(), 2000, 5).unwrap());
    assert!(a.pass);
    assert!(
        taylor_sweep(&ConvexGauge::power(3.0).unwrap(), 2000, 5)
            .unwrap()
            .pass
    );
    assert!(taylor_sweep(&ConvexGauge::linear(), 2000, 5).unwrap().pass);
    // The flat gauge is concave beyond its inflection point.
    let flat = taylor_sweep(&ConvexGauge::flat(), 2000, 5).unwrap();
    assert!(!flat.pass && flat.min_gap < -1e-3);
    assert!(a.report().pass && !flat.report().pass);

    let t = theta_sweep(2000, 9).unwrap();
    assert!(t.min_gap_imaginary_part >= -SWEEP_TOLERANCE);
    assert!(t.min_gap_real_part <= 0.0);
}

/// `2π ∫ |ρ(r) - r^k| r dr` by composite Simpson on each side of `sqrt q`.
fn radial_l1_oracle(q: f64, k: f64, eps: f64) -> f64 {
    let s = eps.sqrt();
    let b = q.sqrt();
    let profile = |r: f64| {
        if r < b {
            q.powf(s) * r.powf(k - s)
        } else {
            r.powf(k + s)
        }
    };
    let f = |r: f64| (profile(r) - r.powf(k)).abs() * r;
    let simpson = |lo: f64, hi: f64| {
        let n = 4000;
        let h = (hi - lo) / n as f64;
        let mut acc = f(lo) + f(hi);
        for i in 1..n {
            acc += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    };
    TAU * (simpson(q, b) + simpson(b, 1.0))
}

fn ladder(gauge: ConvexGauge<f64>, n: usize) -> Result<FitReport, LabError> {
    let eps = vec![1e-4, 3e-4, 1e-3, 3e-3, 1e-2];
    run_ladder(&LadderConfig::new(0.5, 2.0, 0.0, gauge, eps, n, n)?)
}

#[test]
fn square_ladder_recovers_the_half_exponent() {
    let r = ladder(ConvexGauge::square(), 96).unwrap();
    assert!(r.rows.iter().all(|row| row.used));
    assert!((r.slope - 0.5).abs() < 0.05, "{}", r.slope);
    assert!(r.band_ratio < 3.0);
    assert!(r.sqrt_eps_band.1 / r.sqrt_eps_band.0 < 1.05);
    for row in &r.rows {
        assert!((row.deficit - row.eps / 4.0).abs() < 1e-12);
        let oracle = radial_l1_oracle(0.5, 2.0, row.eps);
        assert!(
            (row.l1 - oracle).abs() < 1e-3 * oracle,
            "{} vs {oracle}",
            row.l1
        );
        assert!(row.dbar_mass > 0.0);
    }
    let fine = ladder(ConvexGauge::square(), 192).unwrap();
    assert!((fine.slope - r.slope).abs() < 0.01);
}

#[test]
fn linear_ladder_is_refused() {
    match ladder(ConvexGauge::linear(), 32) {
        Err(LabError::Degenerate(msg)) => assert!(msg.contains("zero deficit"), "{msg}"),
        other => panic!("expected a refusal, got {other:?}"),
    }
}

#[test]
fn ladder_config_validation() {
    let sq = ConvexGauge::square();
    assert!(LadderConfig::new(0.5, 2.0, 0.0, sq, vec![1e-3, 1e-4], 8, 8).is_err());
    assert!(LadderConfig::new(0.5, 2.0, 0.0, sq, vec![], 8, 8).is_err());
    assert!(LadderConfig::new(0.5, 2.0, 0.0, sq, vec![1e-3, 1.0], 8, 8).is_err());
    assert!(LadderConfig::new(0.5, 1.5, 0.0, sq, vec![0.3], 8, 8).is_err());
    assert!(LadderConfig::new(0.5, 2.0, 4.0, sq, vec![1e-3], 8, 8).is_err());
    assert!(LadderConfig::new(0.5, 2.0, 0.0, sq, vec![1e-3], 1, 8).is_err());
    assert_eq!(operational_eps0(2.0), 0.1);
    assert!((operational_eps0(1.2) - 0.02).abs() < 1e-15);
}

#[test]
fn twisted_ladder_matches_the_untwisted_one() {
    let eps = vec![1e-3, 1e-2];
    let sq = ConvexGauge::square();
    let a =
        run_ladder(&LadderConfig::new(0.5, 2.0, 0.0, sq, eps.clone(), 64, 64).unwrap()).unwrap();
    let b = run_ladder(&LadderConfig::new(0.5, 2.0, PI / 2.0, sq, eps, 64, 64).unwrap()).unwrap();
    for (x, y) in a.rows.iter().zip(&b.rows) {
        // The spiral factor is common to g and g*, so |g - g*| is unchanged.
        assert!((x.l1 - y.l1).abs() < 1e-12);
        assert!(y.deficit > 0.0 && y.used);
    }
    assert!((b.slope - 0.5).abs() < 0.05, "{}", b.slope);
}

#[test]
fn flat_ladder() {
    let eps = [1e-4, 1e-3, 1e-2];
    for alpha in [0.3, 0.4, 0.49] {
        let r = run_flat_gauge_ladder(0.5, 2.0, alpha, &eps, 64, 64).unwrap();
        assert!(r.all_hold);
        for row in &r.rows {
            assert!((row.eta_pow_alpha / row.eps - 1.0).abs() < 1e-12);
            assert!((row.deficit_square - row.eps / 4.0).abs() < 1e-12);
            // At K near 2 the exponential term is not flat: each row leaves the regime.
            assert!(row.outside_flat_regime);
            assert!(row.deficit_flat < 0.0);
        }
    }
    assert!(run_flat_gauge_ladder(0.5, 2.0, 0.5, &eps, 8, 8).is_err());
    assert!(run_flat_gauge_ladder(0.5, 2.0, 0.4, &[1e-2, 1e-3], 8, 8).is_err());
}
