use qclab::functionals::{mean_distortion, DensityKind};
use qclab::geometry::{
    build_cartesian_grid, build_polar_grid, AnnulusDomain, CoordinateKind, RectangleDomain,
};
use qclab::map_zoo::{LinearStretch, PiecewiseRadialStretch};
use qclab::pompeiu::Reconstructor;
use qclab::stability_lab::{
    audit_alignment, audit_gn_gap, audit_k_l2, audit_k_mean, run_ladder, taylor_sweep, theta_sweep,
    AuditReport, LadderConfig,
};
use qclab::{Gauge, Grid, Map};

use crate::output::{Cell, Report};
use crate::spec::{comma_list, geometric_list, GridSize, MapSpec};
use crate::{AuditArgs, Common, DistortionArgs, Failure, FitArgs, Outcome, ReconstructArgs};

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn parse_gauge(text: &str, floor: Option<f64>) -> Result<Gauge, Failure> {
    let g: Gauge = text.parse()?;
    Ok(match floor {
        Some(c) => g.with_curvature_floor(c)?,
        None => g,
    })
}

fn common_params(report: &mut Report, c: &Common) {
    report.param("q", c.q);
    report.param("k", c.k);
    report.param("theta", c.theta);
    report.param("seed", c.seed);
    report.param("format", format!("{:?}", c.format).to_lowercase());
}

fn finish(report: &Report, c: &Common, outcome: Outcome) -> Result<Outcome, Failure> {
    report.write(c.format, c.out.as_deref())?;
    Ok(outcome)
}

/// Polar grid on `inner <= |w| <= 1` with the map's breaks as ring edges.
fn annulus_grid(map: &Map, inner: f64, size: GridSize) -> Result<Grid, Failure> {
    let breaks: Vec<f64> = map
        .grid_breaks(CoordinateKind::Polar)?
        .into_iter()
        .filter(|b| *b > inner && *b < 1.0)
        .collect();
    Ok(build_polar_grid(
        &AnnulusDomain::new(inner)?,
        size.axis,
        size.transverse,
        &breaks,
    )?)
}

/// Cartesian grid on the unit square with the map's breaks as column edges.
fn square_grid(map: &Map, size: GridSize) -> Result<Grid, Failure> {
    let breaks: Vec<f64> = map
        .grid_breaks(CoordinateKind::Cartesian)?
        .into_iter()
        .filter(|b| *b > 0.0 && *b < 1.0)
        .collect();
    Ok(build_cartesian_grid(
        &RectangleDomain::new(1.0)?,
        size.axis,
        size.transverse,
        &breaks,
    )?)
}

enum Placement {
    Annulus,
    Square,
}

fn distortion_map(spec: MapSpec, c: &Common, n: f64) -> Result<(Map, Placement), Failure> {
    Ok(match spec {
        MapSpec::GStar => (Map::g_star(c.q, c.k, c.theta)?, Placement::Annulus),
        MapSpec::GN(turns) => (
            Map::spiral_stretch(c.q, c.k, c.theta, turns)?,
            Placement::Annulus,
        ),
        MapSpec::GEps(eps) => (
            Map::PiecewiseRadialStretch(PiecewiseRadialStretch::twisted(c.q, c.k, eps, c.theta)?),
            Placement::Annulus,
        ),
        MapSpec::FStar => (Map::linear_stretch(c.k, n)?, Placement::Square),
        MapSpec::FEps(eps) => (Map::piecewise_linear(c.k, eps)?, Placement::Square),
        other => {
            return Err(usage(format!(
                "map '{}' has no mean-distortion setting",
                other
            )))
        }
    })
}

pub fn distortion(a: &DistortionArgs) -> Result<Outcome, Failure> {
    let c = &a.common;
    let gauge = parse_gauge(&a.gauge, None)?;
    let (map, placement) = distortion_map(a.map, c, a.n)?;
    let density = match (a.density.as_deref(), &placement) {
        (Some("uniform"), _) | (None, Placement::Square) => DensityKind::Uniform,
        (Some("invsq"), _) | (None, Placement::Annulus) => DensityKind::InverseSquare,
        (Some(other), _) => {
            return Err(usage(format!(
                "density must be uniform or invsq, got '{}'",
                other
            )))
        }
    };
    let build = |size| match placement {
        Placement::Annulus => annulus_grid(&map, c.q, size),
        Placement::Square => square_grid(&map, size),
    };
    let full = mean_distortion(&map, &gauge, density, &build(a.grid)?)?;
    let half = mean_distortion(&map, &gauge, density, &build(a.grid.halved())?)?;

    let mut report = Report::new(
        "distortion",
        vec![
            "map",
            "gauge",
            "density",
            "grid",
            "value",
            "quadrature_error",
            "degenerate_cells",
        ],
    );
    common_params(&mut report, c);
    report.param("n", a.n);
    report.row(vec![
        a.map.to_string().into(),
        gauge.to_string().into(),
        match density {
            DensityKind::Uniform => "uniform",
            DensityKind::InverseSquare => "invsq",
        }
        .into(),
        a.grid.to_string().into(),
        full.value.into(),
        ((full.value - half.value).abs() / 3.0).into(),
        full.degenerate_cells.into(),
    ]);
    report.summary(
        "error_estimate",
        "richardson against the half-resolution grid",
    );
    if let Some(w) = &full.warning {
        report.summary("warning", w.clone());
    }
    finish(&report, c, Outcome::Pass)
}

pub fn fit(a: &FitArgs) -> Result<Outcome, Failure> {
    let c = &a.common;
    let eps = match &a.eps_list {
        Some(list) => comma_list(list).map_err(usage)?,
        None => geometric_list(&a.eps_geom).map_err(usage)?,
    };
    let gauge = parse_gauge(&a.gauge, None)?;
    let config = LadderConfig::new(
        c.q,
        c.k,
        c.theta,
        gauge,
        eps,
        a.grid.axis,
        a.grid.transverse,
    )?;
    let fit = run_ladder(&config)?;

    let mut report = Report::new("fit", vec!["eps", "deficit", "l1", "dbar_mass"]);
    common_params(&mut report, c);
    report.param("gauge", fit.gauge.clone());
    report.param("grid", a.grid.to_string());
    report.param("eps0", fit.eps0);
    for row in &fit.rows {
        report.row(vec![
            row.eps.into(),
            row.deficit.into(),
            row.l1.into(),
            row.dbar_mass.into(),
        ]);
    }
    report.summary("slope", fit.slope);
    report.summary("intercept", fit.intercept);
    report.summary("max_residual", fit.max_residual);
    report.summary("band_lo", fit.band.0);
    report.summary("band_hi", fit.band.1);
    report.summary("band_ratio", fit.band_ratio);
    report.summary("sqrt_eps_ratio", fit.sqrt_eps_band.1 / fit.sqrt_eps_band.0);
    report.summary("rows_used", fit.rows.iter().filter(|r| r.used).count());
    for row in fit.rows.iter().filter(|r| !r.used) {
        report.summary(
            &format!("excluded.{}", row.eps),
            row.flag.clone().unwrap_or_default(),
        );
    }
    for (i, note) in fit.notes.iter().enumerate() {
        report.summary(&format!("note.{}", i), note.clone());
    }
    finish(&report, c, Outcome::Pass)
}

fn square_candidate(spec: MapSpec, k: f64) -> Result<Map, Failure> {
    match spec {
        MapSpec::FStar => Ok(Map::linear_stretch(k, 0.0)?),
        MapSpec::FEps(eps) => Ok(Map::piecewise_linear(k, eps)?),
        other => Err(usage(format!(
            "lemma audits on the square take fstar or feps:eps, got '{}'",
            other
        ))),
    }
}

pub fn audit(a: &AuditArgs) -> Result<Outcome, Failure> {
    let c = &a.common;
    let gauge = parse_gauge(&a.gauge, a.c)?;
    let fstar = LinearStretch::new(c.k, 0.0)?;
    let on_square = || -> Result<(Map, Grid), Failure> {
        let f = square_candidate(a.map, c.k)?;
        let grid = square_grid(&f, a.grid)?;
        Ok((f, grid))
    };
    let mut extra: Vec<(String, Cell)> = Vec::new();
    let audit: AuditReport = match a.lemma.as_str() {
        "taylor" => taylor_sweep(&gauge, a.samples, c.seed)?.report(),
        "theta" => theta_sweep(a.samples, c.seed)?.report(),
        "k-l2" => {
            let (f, grid) = on_square()?;
            audit_k_l2(&f, &fstar, &gauge, &grid)?
        }
        "k-mean" => {
            let (f, grid) = on_square()?;
            audit_k_mean(&f, &fstar, &gauge, &grid)?
        }
        "alignment" => {
            let (f, grid) = on_square()?;
            let r = audit_alignment(&f, &fstar, &grid)?;
            extra.push(("imag_part_mass".into(), r.imag_part_mass.into()));
            extra.push(("alpha_degenerate".into(), r.alpha.degenerate.into()));
            r.report
        }
        "gn-gap" => {
            let g_star = Map::g_star(c.q, c.k, c.theta)?;
            let grid = annulus_grid(&g_star, c.q, a.grid)?;
            audit_gn_gap(c.q, c.k, c.theta, a.turns, &gauge, &grid)?
        }
        other => {
            return Err(usage(format!(
                "unknown lemma '{}' (taylor|k-l2|k-mean|alignment|gn-gap|theta)",
                other
            )))
        }
    };

    let mut report = Report::new("audit", vec!["lemma", "lhs", "rhs", "ratio", "pass"]);
    common_params(&mut report, c);
    report.param("map", a.map.to_string());
    report.param("gauge", gauge.to_string());
    report.param("curvature_floor", gauge.curvature_floor());
    report.param("N", a.turns);
    report.param("samples", a.samples);
    report.param("grid", a.grid.to_string());
    report.param("relation", format!("{:?}", audit.relation));
    report.row(vec![
        audit.lemma.clone().into(),
        audit.lhs.into(),
        audit.rhs.into(),
        audit.ratio.into(),
        audit.pass.into(),
    ]);
    for (name, value) in &audit.constants {
        report.summary(&format!("const.{}", name), *value);
    }
    for (name, value) in extra {
        report.summary(&name, value);
    }
    for (i, note) in audit.notes.iter().enumerate() {
        report.summary(&format!("note.{}", i), note.clone());
    }
    let outcome = if audit.pass {
        Outcome::Pass
    } else {
        Outcome::Violation
    };
    finish(&report, c, outcome)
}

fn median(sorted: &[f64]) -> f64 {
    sorted[sorted.len() / 2]
}

pub fn reconstruct(a: &ReconstructArgs) -> Result<Outcome, Failure> {
    let c = &a.common;
    let map = match a.map {
        MapSpec::Identity => Map::identity(),
        MapSpec::Conj => Map::Conjugation,
        MapSpec::PhiEps(eps) => Map::compose(
            Map::PiecewiseRadialStretch(PiecewiseRadialStretch::twisted(c.q, c.k, eps, c.theta)?),
            Map::inverse_spiral_stretch(c.q, c.k, c.theta)?,
        )?,
        other => {
            return Err(usage(format!(
                "reconstruct takes identity, conj or phi-eps:eps, got '{}'",
                other
            )))
        }
    };
    if a.points == 0 {
        return Err(usage("points must be >= 1"));
    }
    let inner = c.q.powf(c.k);
    let grid = annulus_grid(&map, inner, a.grid)?;
    let rec = Reconstructor::new(&map, &grid, a.nodes)?;
    let targets = rec.targets(a.points);
    if targets.is_empty() {
        return Err(Failure::Lab(qclab::LabError::Degenerate(
            "no grid cell is clear of the boundary and break sets".into(),
        )));
    }

    let mut report = Report::new(
        "reconstruct",
        vec!["re", "im", "residual", "reduced_accuracy"],
    );
    common_params(&mut report, c);
    report.param("map", a.map.to_string());
    report.param("inner_radius", inner);
    report.param("nodes", a.nodes);
    report.param("grid", a.grid.to_string());
    let mut residuals = Vec::with_capacity(targets.len());
    for w in targets {
        let r = rec.reconstruct(w)?;
        residuals.push(r.residual);
        report.row(vec![
            w.re.into(),
            w.im.into(),
            r.residual.into(),
            r.reduced_accuracy.into(),
        ]);
    }
    residuals.sort_by(f64::total_cmp);
    report.summary("points", residuals.len());
    report.summary("median_residual", median(&residuals));
    report.summary("max_residual", residuals[residuals.len() - 1]);
    finish(&report, c, Outcome::Pass)
}
