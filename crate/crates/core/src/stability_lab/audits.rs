use num_complex::Complex;
use serde::Serialize;

use super::{AuditReport, Relation, MIN_GAP};
use crate::error::{invalid, LabError, Result};
use crate::functionals::{
    distortion_field, mean_distortion, require_breaks_honoured, DensityKind, DistortionSample,
};
use crate::gauge::ConvexGauge;
use crate::geometry::{integrate, integrate_complex, sample_cells, Domain, QuadratureGrid};
use crate::map_zoo::{LinearStretch, MapFamily, WirtingerPair};
use crate::scalar::arg_positive;
use crate::C64;

/// `∫ (μ*/|μ*|) f_z + f_zbar = R exp(-iα)` over the rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaStar {
    /// In `(-π, π]`.
    pub alpha: f64,
    pub r: f64,
    /// `R = 0`; `alpha` is then 0 by convention.
    pub degenerate: bool,
}

fn require_rectangle(grid: &QuadratureGrid<f64>) -> Result<()> {
    match grid.domain() {
        Domain::Rectangle(_) => Ok(()),
        _ => Err(invalid("grid", "the audits run on a rectangle grid")),
    }
}

fn star_sample(fstar: &LinearStretch<f64>) -> DistortionSample<f64> {
    DistortionSample::from_pair(&WirtingerPair::new(fstar.d_z(), fstar.d_zbar()))
}

fn wirtinger_field(
    f: &MapFamily<f64>,
    grid: &QuadratureGrid<f64>,
) -> Result<Vec<WirtingerPair<f64>>> {
    require_breaks_honoured(f, grid)?;
    sample_cells(grid, |_, c| f.wirtinger(c.center))
}

/// Wraps an angle into `(-π, π]`.
fn wrap_angle(a: f64) -> f64 {
    let w = arg_positive(Complex::from_polar(1.0, a));
    if w > std::f64::consts::PI {
        w - std::f64::consts::TAU
    } else {
        w
    }
}

pub fn alpha_star(
    f: &MapFamily<f64>,
    fstar: &LinearStretch<f64>,
    grid: &QuadratureGrid<f64>,
) -> Result<AlphaStar> {
    require_rectangle(grid)?;
    let mu = fstar.mu();
    if mu.norm() == 0.0 {
        return Err(LabError::Unsupported(
            "the reference stretch is conformal (mu* = 0); alpha is undefined".into(),
        ));
    }
    let unit = mu / mu.norm();
    let field = wirtinger_field(f, grid)?;
    let samples: Vec<C64> = field.iter().map(|p| unit * p.d_z + p.d_zbar).collect();
    let total = integrate_complex(grid, &samples)?;
    let r = total.norm();
    if r == 0.0 {
        return Ok(AlphaStar {
            alpha: 0.0,
            r,
            degenerate: true,
        });
    }
    Ok(AlphaStar {
        alpha: wrap_angle(-total.arg()),
        r,
        degenerate: false,
    })
}

/// `(∫ φ(K_f), ∫ φ(K*), δ)` on the rectangle with uniform density.
fn rectangle_excess(
    f: &MapFamily<f64>,
    fstar: &LinearStretch<f64>,
    gauge: &ConvexGauge<f64>,
    grid: &QuadratureGrid<f64>,
) -> Result<(f64, f64, f64)> {
    let cand = mean_distortion(f, gauge, DensityKind::Uniform, grid)?.value;
    let star = gauge.evaluate(star_sample(fstar).k)? * grid.total_weight();
    Ok((cand, star, cand / star - 1.0))
}

/// `∫ (K_f - K*)² <= (2/c) δ ∫ φ(K*)`, with `δ` the measured excess.
pub fn audit_k_l2(
    f: &MapFamily<f64>,
    fstar: &LinearStretch<f64>,
    gauge: &ConvexGauge<f64>,
    grid: &QuadratureGrid<f64>,
) -> Result<AuditReport> {
    require_rectangle(grid)?;
    let c = gauge.curvature_floor();
    if c <= 0.0 {
        return Err(LabError::Unsupported(format!(
            "gauge {} has curvature floor 0; the L2 audit needs c > 0",
            gauge
        )));
    }
    let k_star = star_sample(fstar).k;
    let sq: Vec<f64> = distortion_field(f, grid)?
        .iter()
        .map(|s| (s.k - k_star) * (s.k - k_star))
        .collect();
    let lhs = integrate(grid, &sq)?;
    let (_, star, delta) = rectangle_excess(f, fstar, gauge, grid)?;
    let rhs = 2.0 / c * delta * star;
    Ok(AuditReport::new("k-l2", Relation::AtMost, lhs, rhs)
        .constant("c", c)
        .constant("k_star", k_star)
        .constant("delta", delta)
        .constant("phi_star_integral", star))
}

/// `∫ K_f <= (1 + C δ) ∫ K*` with `C = φ(K*) / (φ'₊(K*) K*)`.
pub fn audit_k_mean(
    f: &MapFamily<f64>,
    fstar: &LinearStretch<f64>,
    gauge: &ConvexGauge<f64>,
    grid: &QuadratureGrid<f64>,
) -> Result<AuditReport> {
    require_rectangle(grid)?;
    let k_star = star_sample(fstar).k;
    let c = gauge.evaluate(k_star)? / (gauge.right_derivative(k_star)? * k_star);
    let ks: Vec<f64> = distortion_field(f, grid)?.iter().map(|s| s.k).collect();
    let lhs = integrate(grid, &ks)?;
    let (_, _, delta) = rectangle_excess(f, fstar, gauge, grid)?;
    let rhs = (1.0 + c * delta) * k_star * grid.total_weight();
    let report = AuditReport::new("k-mean", Relation::AtMost, lhs, rhs)
        .constant("C", c)
        .constant("k_star", k_star)
        .constant("delta", delta);
    Ok(if gauge.is_strictly_convex() {
        report
    } else {
        report.note(format!("gauge {} is not strictly convex", gauge))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentReport {
    pub alpha: AlphaStar,
    /// `∫ |u₁| - Re u₁ + |u₂| - Re u₂` with `u₁ = e^{iα} μ* f_z`, `u₂ = e^{iα} f_zbar`.
    pub real_part_gap: f64,
    /// `∫ |Im u₁| + |Im u₂|`.
    pub imag_part_mass: f64,
    /// `∫ | |f_zbar| - |μ* f_z| |`.
    pub absdiff_mass: f64,
    /// `imag_part_mass <= Σ sqrt(2 ∫(|u| - Re u)) sqrt(∫|u|)`.
    pub report: AuditReport,
}

pub fn audit_alignment(
    f: &MapFamily<f64>,
    fstar: &LinearStretch<f64>,
    grid: &QuadratureGrid<f64>,
) -> Result<AlignmentReport> {
    let alpha = alpha_star(f, fstar, grid)?;
    let rot = Complex::from_polar(1.0, alpha.alpha);
    let mu = fstar.mu();
    let field = wirtinger_field(f, grid)?;
    let column = |g: &dyn Fn(&WirtingerPair<f64>) -> f64| -> Result<f64> {
        let s: Vec<f64> = field.iter().map(g).collect();
        integrate(grid, &s)
    };
    let u1 = |p: &WirtingerPair<f64>| rot * mu * p.d_z;
    let u2 = |p: &WirtingerPair<f64>| rot * p.d_zbar;
    let gap1 = column(&|p| u1(p).norm() - u1(p).re)?;
    let gap2 = column(&|p| u2(p).norm() - u2(p).re)?;
    let mass1 = column(&|p| u1(p).norm())?;
    let mass2 = column(&|p| u2(p).norm())?;
    let imag = column(&|p| u1(p).im.abs() + u2(p).im.abs())?;
    let absdiff = column(&|p| (p.d_zbar.norm() - (mu * p.d_z).norm()).abs())?;
    // Rounding can leave the gaps a hair below zero.
    let bound = (2.0 * gap1.max(0.0) * mass1).sqrt() + (2.0 * gap2.max(0.0) * mass2).sqrt();
    let report = AuditReport::new("alignment", Relation::AtMost, imag, bound)
        .constant("alpha", alpha.alpha)
        .constant("r", alpha.r)
        .constant("real_part_gap", gap1 + gap2)
        .constant("absdiff_mass", absdiff);
    Ok(AlignmentReport {
        alpha,
        real_part_gap: gap1 + gap2,
        imag_part_mass: imag,
        absdiff_mass: absdiff,
        report,
    })
}

/// Inverse-square mean distortion of `g_N` against that of `g*`; passes when
/// the gap exceeds `1e-6`.
pub fn audit_gn_gap(
    q: f64,
    k: f64,
    theta: f64,
    turns: i32,
    gauge: &ConvexGauge<f64>,
    grid: &QuadratureGrid<f64>,
) -> Result<AuditReport> {
    if turns < 1 {
        return Err(invalid(
            "N",
            format!("N must be >= 1 (no gap is claimed for N = {})", turns),
        ));
    }
    match grid.domain() {
        Domain::Annulus(a) if a.inner_radius() == q => {}
        _ => {
            return Err(invalid(
                "grid",
                format!("a polar grid on the annulus q = {} is required", q),
            ))
        }
    }
    let g_n = MapFamily::spiral_stretch(q, k, theta, turns)?;
    let g_star = MapFamily::g_star(q, k, theta)?;
    let lhs = mean_distortion(&g_n, gauge, DensityKind::InverseSquare, grid)?.value;
    let rhs = mean_distortion(&g_star, gauge, DensityKind::InverseSquare, grid)?.value;
    Ok(
        AuditReport::new("gn-gap", Relation::GapAbove(MIN_GAP), lhs, rhs)
            .constant("N", f64::from(turns))
            .constant("gap", lhs - rhs),
    )
}
