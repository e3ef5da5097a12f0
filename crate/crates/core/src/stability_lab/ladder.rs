use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, LabError, Result};
use crate::functionals::{deficit, l1_distance};
use crate::gauge::ConvexGauge;
use crate::geometry::{build_polar_grid, AnnulusDomain, QuadratureGrid};
use crate::map_zoo::{MapFamily, PiecewiseRadialStretch, SpiralStretch};
use crate::pompeiu::phi_dbar_mass;

/// Exponential-term excess above which a flat-gauge row leaves the linear regime.
pub const FLAT_REGIME_THRESHOLD: f64 = 1e-12;

/// Rows need a deficit above this multiple of their quadrature error to enter the fit.
const ERROR_MARGIN: f64 = 10.0;

/// Deficits within this of zero count as vanishing.
const ZERO_DEFICIT: f64 = 1e-12;

/// `min(0.1, (k - 1)² / 2)`, the largest eps the ladders are meant to use.
pub fn operational_eps0(k: f64) -> f64 {
    (0.5 * (k - 1.0) * (k - 1.0)).min(0.1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderConfig {
    pub q: f64,
    pub k: f64,
    pub theta: f64,
    pub gauge: ConvexGauge<f64>,
    pub eps: Vec<f64>,
    pub n_radial: usize,
    pub n_angular: usize,
}

impl LadderConfig {
    pub fn new(
        q: f64,
        k: f64,
        theta: f64,
        gauge: ConvexGauge<f64>,
        eps: Vec<f64>,
        n_radial: usize,
        n_angular: usize,
    ) -> Result<Self> {
        let cfg = Self {
            q,
            k,
            theta,
            gauge,
            eps,
            n_radial,
            n_angular,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        validate_eps_list(self.k, &self.eps)?;
        if self.n_radial < 2 || self.n_angular < 2 {
            return Err(invalid("resolution", "the ladder needs at least 2x2 cells"));
        }
        // Parameter ranges are checked by the family constructors.
        PiecewiseRadialStretch::twisted(self.q, self.k, self.eps[0], self.theta)?;
        Ok(())
    }
}

fn validate_eps_list(k: f64, eps: &[f64]) -> Result<()> {
    if eps.is_empty() {
        return Err(invalid("eps", "the eps list is empty"));
    }
    if eps.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("eps", "the eps list must be strictly increasing"));
    }
    let bound = (k - 1.0) * (k - 1.0);
    if let Some(e) = eps.iter().find(|e| !(**e > 0.0 && **e < bound)) {
        return Err(invalid(
            "eps",
            format!("eps must be < (k-1)^2 = {} and > 0, got {}", bound, e),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderRow {
    pub eps: f64,
    pub deficit: f64,
    /// `|deficit - deficit at half resolution| / 3`.
    pub quadrature_error: f64,
    pub l1: f64,
    pub dbar_mass: f64,
    pub used: bool,
    pub flag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub q: f64,
    pub k: f64,
    pub theta: f64,
    pub gauge: String,
    pub n_radial: usize,
    pub n_angular: usize,
    pub eps0: f64,
    pub rows: Vec<LadderRow>,
    /// Least-squares slope of `ln l1` against `ln deficit`.
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute log-space residual of the fit.
    pub max_residual: f64,
    /// Range of `l1 / sqrt(deficit)` over the fitted rows.
    pub band: (f64, f64),
    pub band_ratio: f64,
    /// Range of `l1 / sqrt(eps)` over all rows.
    pub sqrt_eps_band: (f64, f64),
    pub notes: Vec<String>,
}

fn annulus_grid(inner: f64, n_r: usize, n_a: usize, brk: f64) -> Result<QuadratureGrid<f64>> {
    build_polar_grid(&AnnulusDomain::new(inner)?, n_r, n_a, &[brk])
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

/// Ordinary least squares `y = a + b x`; returns `(b, a)`.
fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let b = sxy / sxx;
    (b, my - b * mx)
}

/// Builds `g^(ε)` for each eps, measures its deficit, L¹ distance to `g*`
/// and the ∂̄-mass of `g^(ε) ∘ (g*)⁻¹`, then fits `ln l1` against `ln deficit`.
///
/// Rows whose deficit is not positive, or not above ten times its Richardson
/// error estimate, are kept but excluded from the fit. Fewer than two usable
/// rows is a degenerate experiment.
pub fn run_ladder(config: &LadderConfig) -> Result<FitReport> {
    config.validate()?;
    let LadderConfig { q, k, theta, .. } = *config;
    let gauge = &config.gauge;
    let brk = q.sqrt();
    let grid = annulus_grid(q, config.n_radial, config.n_angular, brk)?;
    let half = annulus_grid(q, config.n_radial / 2, config.n_angular / 2, brk)?;
    let image = annulus_grid(
        q.powf(k),
        config.n_radial,
        config.n_angular,
        q.powf(k / 2.0),
    )?;
    let g_star = MapFamily::g_star(q, k, theta)?;
    let spiral = SpiralStretch::new(q, k, theta, 0)?;

    let mut rows = config
        .eps
        .par_iter()
        .map(|&eps| -> Result<LadderRow> {
            let g = MapFamily::PiecewiseRadialStretch(PiecewiseRadialStretch::twisted(
                q, k, eps, theta,
            )?);
            let d = deficit(&g, &g_star, gauge, &grid)?.value;
            let d_half = deficit(&g, &g_star, gauge, &half)?.value;
            Ok(LadderRow {
                eps,
                deficit: d,
                quadrature_error: (d - d_half).abs() / 3.0,
                l1: l1_distance(&g, &g_star, &grid)?,
                dbar_mass: phi_dbar_mass(&g, &spiral, &image)?,
                used: false,
                flag: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    if rows.iter().all(|r| r.deficit.abs() <= ZERO_DEFICIT) {
        return Err(LabError::Degenerate(format!(
            "gauge yields zero deficit; use a strictly convex gauge (got {})",
            gauge
        )));
    }
    for r in &mut rows {
        r.flag = if r.deficit <= 0.0 {
            Some("nonpositive deficit".into())
        } else if r.deficit <= ERROR_MARGIN * r.quadrature_error {
            Some(format!(
                "deficit within {}x its quadrature error",
                ERROR_MARGIN
            ))
        } else if r.l1 <= 0.0 {
            Some("zero l1 distance".into())
        } else {
            None
        };
        r.used = r.flag.is_none();
    }
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.used)
        .map(|r| (r.deficit.ln(), r.l1.ln()))
        .collect();
    if points.len() < 2 {
        return Err(LabError::Degenerate(format!(
            "fit refused: only {} of {} rows have a deficit resolved above quadrature error",
            points.len(),
            rows.len()
        )));
    }
    let (slope, intercept) = least_squares(&points);
    let max_residual = points
        .iter()
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    let band = min_max(
        rows.iter()
            .filter(|r| r.used)
            .map(|r| r.l1 / r.deficit.sqrt()),
    );
    let sqrt_eps_band = min_max(rows.iter().map(|r| r.l1 / r.eps.sqrt()));

    let eps0 = operational_eps0(k);
    let mut notes = Vec::new();
    if config.eps.iter().any(|&e| e > eps0) {
        notes.push(format!("eps list exceeds the operational eps0 = {}", eps0));
    }
    if !gauge.is_strictly_convex() {
        notes.push(format!("gauge {} is not strictly convex", gauge));
    }
    Ok(FitReport {
        q,
        k,
        theta,
        gauge: gauge.to_string(),
        n_radial: config.n_radial,
        n_angular: config.n_angular,
        eps0,
        rows,
        slope,
        intercept,
        max_residual,
        band,
        band_ratio: band.1 / band.0,
        sqrt_eps_band,
        notes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatLadderRow {
    pub eps: f64,
    pub deficit_flat: f64,
    pub deficit_square: f64,
    pub l1: f64,
    /// `eps^(1/alpha)`.
    pub eta: f64,
    /// `eta^alpha`, equal to `eps` up to rounding.
    pub eta_pow_alpha: f64,
    /// `l1 > eta^alpha`.
    pub holds: bool,
    /// Mean excess of the exponential term `exp(-1/(K-1)²)` of the flat gauge
    /// over its value at `g*`, per unit inverse-square mass.
    pub exp_excess: f64,
    /// `exp_excess` above the flat-regime threshold.
    pub outside_flat_regime: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatLadderReport {
    pub q: f64,
    pub k: f64,
    pub alpha: f64,
    pub n_radial: usize,
    pub n_angular: usize,
    pub threshold: f64,
    pub rows: Vec<FlatLadderRow>,
    /// Every row has `l1 > eta^alpha`.
    pub all_hold: bool,
}

/// For each eps: the flat- and square-gauge deficits of `g^(ε)`, its L¹
/// distance to `g*`, and the comparison `l1 > η^α` with `η = ε^(1/α)`.
pub fn run_flat_gauge_ladder(
    q: f64,
    k: f64,
    alpha: f64,
    eps: &[f64],
    n_radial: usize,
    n_angular: usize,
) -> Result<FlatLadderReport> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(invalid(
            "alpha",
            format!("alpha must lie in (0, 1/2), got {}", alpha),
        ));
    }
    validate_eps_list(k, eps)?;
    let grid = annulus_grid(q, n_radial, n_angular, q.sqrt())?;
    let g_star = MapFamily::g_star(q, k, 0.0)?;
    let (flat, square, linear) = (
        ConvexGauge::flat(),
        ConvexGauge::square(),
        ConvexGauge::linear(),
    );
    let log_mass = std::f64::consts::TAU * (1.0 / q).ln();
    let rows = eps
        .par_iter()
        .map(|&e| -> Result<FlatLadderRow> {
            let g = MapFamily::piecewise_radial(q, k, e)?;
            let df = deficit(&g, &g_star, &flat, &grid)?;
            let dl = deficit(&g, &g_star, &linear, &grid)?;
            let ds = deficit(&g, &g_star, &square, &grid)?;
            let excess = ((df.candidate.value - df.reference.value)
                - (dl.candidate.value - dl.reference.value))
                .abs()
                / log_mass;
            let l1 = l1_distance(&g, &g_star, &grid)?;
            let eta = e.powf(1.0 / alpha);
            let eta_pow_alpha = eta.powf(alpha);
            Ok(FlatLadderRow {
                eps: e,
                deficit_flat: df.value,
                deficit_square: ds.value,
                l1,
                eta,
                eta_pow_alpha,
                holds: l1 > eta_pow_alpha,
                exp_excess: excess,
                outside_flat_regime: excess > FLAT_REGIME_THRESHOLD,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FlatLadderReport {
        q,
        k,
        alpha,
        n_radial,
        n_angular,
        threshold: FLAT_REGIME_THRESHOLD,
        all_hold: rows.iter().all(|r| r.holds),
        rows,
    })
}
