//! Pointwise distortion and the integral functionals built on it: mean
//! distortion against a density, the spiral-stretch deficit, L¹ distances and
//! the log/exp transfer between annulus and rectangle.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{invalid, LabError, Result};
use crate::gauge::ConvexGauge;
use crate::geometry::{
    integrate, integrate_inverse_square, sample_cells, CoordinateKind, Domain, QuadratureGrid,
};
use crate::map_zoo::{rectangle_width, LogCoordinatesG, MapFamily, WirtingerPair};
use crate::scalar::Real;

/// Share of degenerate cells above which results carry a warning.
pub const DEGENERATE_WARN_FRACTION: f64 = 0.01;

/// Deficits below this are flagged as (quadrature-biased) negative.
pub const NEGATIVE_DEFICIT_FLAG: f64 = -1e-8;

/// Linear distortion, Beltrami coefficient and Jacobian at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionSample<T> {
    pub k: T,
    pub mu: Complex<T>,
    pub jacobian: T,
    /// `|f_zbar| >= |f_z|`; `k` is then 1 by definition.
    pub degenerate: bool,
}

impl<T: Real> DistortionSample<T> {
    pub fn from_pair(pair: &WirtingerPair<T>) -> Self {
        let a = pair.d_z.norm();
        let b = pair.d_zbar.norm();
        let mu = if a > T::zero() {
            pair.d_zbar / pair.d_z
        } else {
            Complex::new(T::zero(), T::zero())
        };
        let jacobian = a * a - b * b;
        if b < a {
            Self {
                k: (a + b) / (a - b),
                mu,
                jacobian,
                degenerate: false,
            }
        } else {
            Self {
                k: T::one(),
                mu,
                jacobian,
                degenerate: true,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    Uniform,
    /// `1 / |w|²`, annulus polar grids only.
    InverseSquare,
}

pub fn pointwise_analysis<T: Real>(
    map: &MapFamily<T>,
    z: Complex<T>,
) -> Result<DistortionSample<T>> {
    Ok(DistortionSample::from_pair(&map.wirtinger(z)?))
}

/// Fails unless every derivative break of `map` inside the grid is a cell edge.
pub fn require_breaks_honoured<T: Real>(
    map: &MapFamily<T>,
    grid: &QuadratureGrid<T>,
) -> Result<()> {
    let edges = grid.axis_edges();
    let (lo, hi) = (edges[0], edges[edges.len() - 1]);
    for b in map.grid_breaks(grid.kind())? {
        if b > lo && b < hi && !grid.has_edge_at(b) {
            return Err(LabError::BreakSet(format!(
                "grid has no cell edge at the {} break {}",
                map.variant_name(),
                b
            )));
        }
    }
    Ok(())
}

/// Distortion samples at all cell centres, in cell order.
pub fn distortion_field<T: Real>(
    map: &MapFamily<T>,
    grid: &QuadratureGrid<T>,
) -> Result<Vec<DistortionSample<T>>> {
    require_breaks_honoured(map, grid)?;
    sample_cells(grid, |_, cell| pointwise_analysis(map, cell.center))
}

/// `∫ samples · density` over the grid.
pub fn integrate_with_density<T: Real>(
    grid: &QuadratureGrid<T>,
    density: DensityKind,
    samples: &[T],
) -> Result<T> {
    match density {
        DensityKind::Uniform => integrate(grid, samples),
        DensityKind::InverseSquare => {
            if grid.kind() != CoordinateKind::Polar {
                return Err(LabError::Unsupported(
                    "inverse-square density requires a polar annulus grid".into(),
                ));
            }
            integrate_inverse_square(grid, samples)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanDistortion<T> {
    pub value: T,
    pub degenerate_cells: usize,
    pub total_cells: usize,
    pub warning: Option<String>,
}

/// `∫ φ(K(z, f)) ρ(z) dA` by the grid's midpoint rule.
///
/// With the inverse-square density each cell carries its exact
/// `∫_cell |w|^-2 dA`, so radially piecewise-constant distortions are
/// integrated exactly.
pub fn mean_distortion<T: Real>(
    map: &MapFamily<T>,
    gauge: &ConvexGauge<T>,
    density: DensityKind,
    grid: &QuadratureGrid<T>,
) -> Result<MeanDistortion<T>> {
    if density == DensityKind::InverseSquare && grid.kind() != CoordinateKind::Polar {
        return Err(LabError::Unsupported(
            "inverse-square density requires a polar annulus grid".into(),
        ));
    }
    let field = distortion_field(map, grid)?;
    let phi = field
        .iter()
        .map(|s| gauge.evaluate(s.k))
        .collect::<Result<Vec<_>>>()?;
    let value = integrate_with_density(grid, density, &phi)?;
    let degenerate_cells = field.iter().filter(|s| s.degenerate).count();
    let total_cells = field.len();
    let share = degenerate_cells as f64 / total_cells.max(1) as f64;
    let warning = (share > DEGENERATE_WARN_FRACTION).then(|| {
        format!(
            "{} of {} cells degenerate ({:.2}%), K = 1 used there",
            degenerate_cells,
            total_cells,
            100.0 * share
        )
    });
    Ok(MeanDistortion {
        value,
        degenerate_cells,
        total_cells,
        warning,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deficit<T> {
    /// Raw signed value, never clamped.
    pub value: T,
    pub candidate: MeanDistortion<T>,
    pub reference: MeanDistortion<T>,
    /// `value < -1e-8`.
    pub below_zero: bool,
}

fn annulus_radius<T: Real>(grid: &QuadratureGrid<T>) -> Result<T> {
    match grid.domain() {
        Domain::Annulus(a) => Ok(a.inner_radius()),
        _ => Err(invalid("grid", "an annulus grid is required")),
    }
}

/// Relative excess of the candidate's inverse-square mean distortion over
/// that of the reference spiral-stretch `g*`.
pub fn deficit<T: Real>(
    candidate: &MapFamily<T>,
    reference: &MapFamily<T>,
    gauge: &ConvexGauge<T>,
    grid: &QuadratureGrid<T>,
) -> Result<Deficit<T>> {
    let q = annulus_radius(grid)?;
    match reference {
        MapFamily::SpiralStretch(s) if s.turns() == 0 => {
            if s.q() != q {
                return Err(invalid(
                    "reference",
                    format!("reference q = {} differs from the grid's q = {}", s.q(), q),
                ));
            }
        }
        _ => {
            return Err(invalid(
                "reference",
                "the reference must be a spiral-stretch with N = 0",
            ))
        }
    }
    if let Some(p) = candidate.annulus_parameters() {
        if p.q != q {
            return Err(invalid(
                "candidate",
                format!("candidate q = {} differs from the grid's q = {}", p.q, q),
            ));
        }
    }
    let cand = mean_distortion(candidate, gauge, DensityKind::InverseSquare, grid)?;
    let refv = mean_distortion(reference, gauge, DensityKind::InverseSquare, grid)?;
    let value = cand.value / refv.value - T::one();
    Ok(Deficit {
        value,
        below_zero: value.as_f64() < NEGATIVE_DEFICIT_FLAG,
        candidate: cand,
        reference: refv,
    })
}

/// `∫ |a - b| dA` with uniform density.
pub fn l1_distance<T: Real>(
    a: &MapFamily<T>,
    b: &MapFamily<T>,
    grid: &QuadratureGrid<T>,
) -> Result<T> {
    require_breaks_honoured(a, grid)?;
    require_breaks_honoured(b, grid)?;
    let samples = sample_cells(grid, |_, cell| {
        Ok((a.eval(cell.center)? - b.eval(cell.center)?).norm())
    })?;
    integrate(grid, &samples)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferCheck<T> {
    /// `∫_{A₁} φ(K(w, g)) / |w|² dA`.
    pub annulus_value: T,
    /// `4π² ∫_{Q₁} φ(K(z, f)) dA`.
    pub rectangle_value: T,
    pub relative_gap: T,
}

/// Largest relative pointwise mismatch accepted between `f` and `G∘g∘exp`.
const CORRESPONDENCE_TOL: f64 = 1e-9;

/// Both sides of the change of variables `w = q exp(2πz)` between the
/// annulus functional of `g` and the rectangle functional of `f`.
///
/// `f` must agree with `G ∘ g ∘ (z -> q exp(2πz))` on the rectangle of width
/// `log(1/q) / 2π`, where `G` are the log coordinates matching `g`'s
/// parameters; a mismatch is rejected before anything is integrated.
pub fn conformal_transfer_check<T: Real>(
    g: &MapFamily<T>,
    f: &MapFamily<T>,
    gauge: &ConvexGauge<T>,
    annulus_grid: &QuadratureGrid<T>,
    rectangle_grid: &QuadratureGrid<T>,
) -> Result<TransferCheck<T>> {
    let params = g
        .annulus_parameters()
        .ok_or_else(|| invalid("g", format!("{} is not an annulus map", g.variant_name())))?;
    let q = annulus_radius(annulus_grid)?;
    if params.q != q {
        return Err(invalid(
            "g",
            format!("g has q = {} but the annulus grid has q = {}", params.q, q),
        ));
    }
    let width = rectangle_width(q);
    match rectangle_grid.domain() {
        Domain::Rectangle(r) if (r.width() - width).abs() <= T::lit(1e-12) * width => {}
        Domain::Rectangle(r) => {
            return Err(invalid(
                "rectangle_grid",
                format!(
                    "width {} does not equal log(1/q)/2pi = {}",
                    r.width(),
                    width
                ),
            ))
        }
        _ => return Err(invalid("rectangle_grid", "a rectangle grid is required")),
    }

    let log = MapFamily::LogCoordinatesG(LogCoordinatesG::matching(
        params.q,
        params.k,
        params.theta,
        params.turns,
    )?);
    let lifted = MapFamily::compose(
        log,
        MapFamily::compose(g.clone(), MapFamily::exp_coordinates(q)?)?,
    )?;
    let steps = 7;
    for i in 0..steps {
        for j in 0..steps {
            // Odd sevenths stay clear of the kinks at 1/2.
            let x = T::lit((2 * i + 1) as f64 / (2 * steps) as f64) * width;
            let y = T::lit((2 * j + 1) as f64 / (2 * steps) as f64);
            let z = Complex::new(x, y);
            let want = lifted.eval(z)?;
            let got = f.eval(z)?;
            if (want - got).norm() > T::lit(CORRESPONDENCE_TOL) * want.norm().max(T::one()) {
                return Err(invalid(
                    "f",
                    format!(
                        "f does not correspond to g under the log/exp coordinates (at z = {}: {} vs {})",
                        z, got, want
                    ),
                ));
            }
        }
    }

    let annulus_value = mean_distortion(g, gauge, DensityKind::InverseSquare, annulus_grid)?.value;
    let four_pi_sq = T::lit(4.0) * T::PI() * T::PI();
    let rectangle_value =
        four_pi_sq * mean_distortion(f, gauge, DensityKind::Uniform, rectangle_grid)?.value;
    Ok(TransferCheck {
        annulus_value,
        rectangle_value,
        relative_gap: (annulus_value - rectangle_value).abs() / annulus_value.abs(),
    })
}

#[cfg(test)]
mod tests;
