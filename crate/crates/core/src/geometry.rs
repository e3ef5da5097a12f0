//! Planar domains and deterministic midpoint quadrature grids.
//!
//! Grids are tensor products in `(r, angle)` for annuli and in
//! `(x, y - shear * x)` for rectangles and parallelograms. Every mandatory
//! break becomes a cell boundary, so piecewise-smooth integrands with known
//! discontinuity loci are integrated with the clean midpoint error.
//!
//! Cells are stored axis-major: index = `axis * transverse_count + j`, where
//! the axis is the radius (polar) or the abscissa (cartesian). All reductions
//! use this order.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{invalid, LabError, Result};
use crate::scalar::{arg_positive, Real};
use crate::summation::compensated_sum;

/// Closed annulus `{ q <= |w| <= 1 }`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusDomain<T> {
    inner_radius: T,
}

impl<T: Real> AnnulusDomain<T> {
    pub fn new(inner_radius: T) -> Result<Self> {
        if !(inner_radius > T::zero() && inner_radius < T::one()) {
            return Err(invalid(
                "inner_radius",
                format!("must lie in (0, 1), got {}", inner_radius),
            ));
        }
        Ok(Self { inner_radius })
    }

    pub fn inner_radius(&self) -> T {
        self.inner_radius
    }

    pub fn outer_radius(&self) -> T {
        T::one()
    }

    pub fn area(&self) -> T {
        T::PI() * (T::one() - self.inner_radius * self.inner_radius)
    }
}

/// Rectangle `[0, width] x [0, 1]` anchored at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectangleDomain<T> {
    width: T,
}

impl<T: Real> RectangleDomain<T> {
    pub fn new(width: T) -> Result<Self> {
        if !(width > T::zero() && width.is_finite()) {
            return Err(invalid("width", format!("must be positive, got {}", width)));
        }
        Ok(Self { width })
    }

    pub fn width(&self) -> T {
        self.width
    }

    pub fn height(&self) -> T {
        T::one()
    }

    pub fn area(&self) -> T {
        self.width
    }
}

/// Parallelogram with vertices `0, base, base + i, i`.
///
/// This is the image of `[0, l] x [0, 1]` under `x + iy -> kx + inx + iy`
/// when `base = kl + inl`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParallelogramDomain<T> {
    base: Complex<T>,
}

impl<T: Real> ParallelogramDomain<T> {
    pub fn new(base: Complex<T>) -> Result<Self> {
        if !(base.re > T::zero() && base.re.is_finite() && base.im.is_finite()) {
            return Err(invalid(
                "base",
                format!("base vector needs a positive real part, got {}", base),
            ));
        }
        Ok(Self { base })
    }

    /// Image of the width-`l` rectangle under the linear stretch `(k, n)`.
    pub fn from_stretch(k: T, n: T, width: T) -> Result<Self> {
        Self::new(Complex::new(k * width, n * width))
    }

    pub fn base(&self) -> Complex<T> {
        self.base
    }

    pub fn vertices(&self) -> [Complex<T>; 4] {
        let i = Complex::new(T::zero(), T::one());
        [
            Complex::new(T::zero(), T::zero()),
            self.base,
            self.base + i,
            i,
        ]
    }

    pub fn area(&self) -> T {
        self.base.re
    }

    fn shear(&self) -> T {
        self.base.im / self.base.re
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain<T> {
    Annulus(AnnulusDomain<T>),
    Rectangle(RectangleDomain<T>),
    Parallelogram(ParallelogramDomain<T>),
}

impl<T: Real> Domain<T> {
    pub fn area(&self) -> T {
        match self {
            Domain::Annulus(a) => a.area(),
            Domain::Rectangle(r) => r.area(),
            Domain::Parallelogram(p) => p.area(),
        }
    }

    /// Membership test with a small relative slack on the boundary.
    pub fn contains(&self, w: Complex<T>) -> bool {
        let slack = T::lit(1e-12);
        match self {
            Domain::Annulus(a) => {
                let r = w.norm();
                r >= a.inner_radius * (T::one() - slack) && r <= T::one() + slack
            }
            Domain::Rectangle(rect) => {
                w.re >= -slack
                    && w.re <= rect.width * (T::one() + slack)
                    && w.im >= -slack
                    && w.im <= T::one() + slack
            }
            Domain::Parallelogram(p) => {
                let v = w.im - p.shear() * w.re;
                w.re >= -slack
                    && w.re <= p.base.re * (T::one() + slack)
                    && v >= -slack
                    && v <= T::one() + slack
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordinateKind {
    Polar,
    Cartesian,
}

/// Placement of radial edges inside each break-free segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RadialSpacing {
    #[default]
    Uniform,
    /// Uniform in `log r`; cells then have equal inverse-square mass.
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell<T> {
    pub center: Complex<T>,
    pub weight: T,
}

#[derive(Debug, Clone)]
pub struct QuadratureGrid<T> {
    domain: Domain<T>,
    kind: CoordinateKind,
    cells: Vec<Cell<T>>,
    mandatory_breaks: Vec<T>,
    axis_edges: Vec<T>,
    transverse: usize,
    shear: T,
    /// Exact `∫_cell |w|^-2 dA = log(r_hi / r_lo) * Δangle`; polar only.
    inverse_square_weights: Option<Vec<T>>,
}

/// Split `[lo, hi]` at `breaks` and spread `n` cells over the pieces in
/// proportion to their length in the spacing metric (largest remainder,
/// at least one cell per piece).
fn axis_edges<T: Real>(lo: T, hi: T, breaks: &[T], n: usize, geometric: bool) -> Vec<T> {
    let mut knots = Vec::with_capacity(breaks.len() + 2);
    knots.push(lo);
    knots.extend_from_slice(breaks);
    knots.push(hi);
    let metric = |a: T, b: T| if geometric { (b / a).ln() } else { b - a };
    let lengths: Vec<f64> = knots
        .windows(2)
        .map(|p| metric(p[0], p[1]).as_f64())
        .collect();
    let total: f64 = lengths.iter().sum();
    let pieces = lengths.len();
    let n = n.max(pieces);
    let spare = n - pieces;
    let exact: Vec<f64> = lengths.iter().map(|l| spare as f64 * l / total).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| 1 + e.floor() as usize).collect();
    let mut leftover = n - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..pieces).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if leftover == 0 {
            break;
        }
        counts[i] += 1;
        leftover -= 1;
    }

    let mut edges = Vec::with_capacity(n + 1);
    edges.push(lo);
    for (p, &m) in counts.iter().enumerate() {
        let (a, b) = (knots[p], knots[p + 1]);
        for s in 1..=m {
            let t = T::lit(s as f64 / m as f64);
            let e = if s == m {
                b
            } else if geometric {
                a * (b / a).powf(t)
            } else {
                a + (b - a) * t
            };
            edges.push(e);
        }
    }
    edges
}

fn validate_breaks<T: Real>(breaks: &[T], lo: T, hi: T, what: &'static str) -> Result<Vec<T>> {
    let mut sorted = breaks.to_vec();
    for &b in &sorted {
        if !(b > lo && b < hi) {
            return Err(invalid(
                what,
                format!("break {} lies outside ({}, {})", b, lo, hi),
            ));
        }
    }
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted.dedup();
    Ok(sorted)
}

/// Midpoint polar grid on an annulus with uniform radial spacing.
pub fn build_polar_grid<T: Real>(
    annulus: &AnnulusDomain<T>,
    n_radial: usize,
    n_angular: usize,
    mandatory_breaks: &[T],
) -> Result<QuadratureGrid<T>> {
    build_polar_grid_with(
        annulus,
        n_radial,
        n_angular,
        mandatory_breaks,
        RadialSpacing::Uniform,
    )
}

pub fn build_polar_grid_with<T: Real>(
    annulus: &AnnulusDomain<T>,
    n_radial: usize,
    n_angular: usize,
    mandatory_breaks: &[T],
    spacing: RadialSpacing,
) -> Result<QuadratureGrid<T>> {
    if n_radial == 0 || n_angular == 0 {
        return Err(invalid("resolution", "n_radial and n_angular must be >= 1"));
    }
    let q = annulus.inner_radius();
    let breaks = validate_breaks(mandatory_breaks, q, T::one(), "mandatory_breaks")?;
    let edges = axis_edges(
        q,
        T::one(),
        &breaks,
        n_radial,
        spacing == RadialSpacing::Geometric,
    );
    let d_angle = T::TAU() / T::lit(n_angular as f64);
    let rays: Vec<Complex<T>> = (0..n_angular)
        .map(|j| Complex::from_polar(T::one(), (T::lit(j as f64) + T::half()) * d_angle))
        .collect();

    let mut cells = Vec::with_capacity((edges.len() - 1) * n_angular);
    let mut inv_sq = Vec::with_capacity(cells.capacity());
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let r_mid = (a + b) * T::half();
        // r_mid * Δr is the exact ring area element (b² - a²) / 2.
        let weight = r_mid * (b - a) * d_angle;
        let log_mass = (b / a).ln() * d_angle;
        for ray in &rays {
            cells.push(Cell {
                center: ray * r_mid,
                weight,
            });
            inv_sq.push(log_mass);
        }
    }
    Ok(QuadratureGrid {
        domain: Domain::Annulus(*annulus),
        kind: CoordinateKind::Polar,
        cells,
        mandatory_breaks: breaks,
        axis_edges: edges,
        transverse: n_angular,
        shear: T::zero(),
        inverse_square_weights: Some(inv_sq),
    })
}

fn sheared_grid<T: Real>(
    domain: Domain<T>,
    width: T,
    shear: T,
    n_x: usize,
    n_y: usize,
    mandatory_breaks: &[T],
) -> Result<QuadratureGrid<T>> {
    if n_x == 0 || n_y == 0 {
        return Err(invalid("resolution", "n_x and n_y must be >= 1"));
    }
    let breaks = validate_breaks(mandatory_breaks, T::zero(), width, "mandatory_breaks")?;
    let edges = axis_edges(T::zero(), width, &breaks, n_x, false);
    let dy = T::one() / T::lit(n_y as f64);
    let mut cells = Vec::with_capacity((edges.len() - 1) * n_y);
    for pair in edges.windows(2) {
        let x = (pair[0] + pair[1]) * T::half();
        let dx = pair[1] - pair[0];
        for j in 0..n_y {
            let v = (T::lit(j as f64) + T::half()) * dy;
            cells.push(Cell {
                center: Complex::new(x, shear * x + v),
                weight: dx * dy,
            });
        }
    }
    Ok(QuadratureGrid {
        domain,
        kind: CoordinateKind::Cartesian,
        cells,
        mandatory_breaks: breaks,
        axis_edges: edges,
        transverse: n_y,
        shear,
        inverse_square_weights: None,
    })
}

/// Midpoint grid on `[0, l] x [0, 1]`; breaks are abscissae in `(0, l)`.
pub fn build_cartesian_grid<T: Real>(
    rect: &RectangleDomain<T>,
    n_x: usize,
    n_y: usize,
    mandatory_breaks: &[T],
) -> Result<QuadratureGrid<T>> {
    sheared_grid(
        Domain::Rectangle(*rect),
        rect.width(),
        T::zero(),
        n_x,
        n_y,
        mandatory_breaks,
    )
}

/// Midpoint grid on a parallelogram; breaks are abscissae (`Re w`) in `(0, Re base)`.
pub fn build_parallelogram_grid<T: Real>(
    par: &ParallelogramDomain<T>,
    n_x: usize,
    n_y: usize,
    mandatory_breaks: &[T],
) -> Result<QuadratureGrid<T>> {
    sheared_grid(
        Domain::Parallelogram(*par),
        par.base().re,
        par.shear(),
        n_x,
        n_y,
        mandatory_breaks,
    )
}

impl<T: Real> QuadratureGrid<T> {
    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    pub fn kind(&self) -> CoordinateKind {
        self.kind
    }

    pub fn cells(&self) -> &[Cell<T>] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn mandatory_breaks(&self) -> &[T] {
        &self.mandatory_breaks
    }

    /// Radial edges (polar) or abscissa edges (cartesian).
    pub fn axis_edges(&self) -> &[T] {
        &self.axis_edges
    }

    /// Angular cell count (polar) or vertical cell count (cartesian).
    pub fn transverse_count(&self) -> usize {
        self.transverse
    }

    pub fn axis_count(&self) -> usize {
        self.axis_edges.len() - 1
    }

    pub fn inverse_square_weights(&self) -> Option<&[T]> {
        self.inverse_square_weights.as_deref()
    }

    pub fn total_weight(&self) -> T {
        let w: Vec<T> = self.cells.iter().map(|c| c.weight).collect();
        compensated_sum(&w)
    }

    /// `true` when `value` (radius or abscissa) is one of the axis edges.
    pub fn has_edge_at(&self, value: T) -> bool {
        let tol = T::lit(1e-12) * value.abs().max(T::one());
        self.axis_edges.iter().any(|&e| (e - value).abs() <= tol)
    }

    /// Axis coordinate of a point: radius (polar) or abscissa (cartesian).
    pub fn axis_coordinate(&self, w: Complex<T>) -> T {
        match self.kind {
            CoordinateKind::Polar => w.norm(),
            CoordinateKind::Cartesian => w.re,
        }
    }

    /// `(axis index, transverse index)` of the cell containing `w`.
    pub fn locate(&self, w: Complex<T>) -> Option<(usize, usize)> {
        if !self.domain.contains(w) {
            return None;
        }
        let s = self.axis_coordinate(w);
        let i = match self
            .axis_edges
            .binary_search_by(|e| e.partial_cmp(&s).unwrap())
        {
            Ok(i) => i.min(self.axis_count() - 1),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.axis_count() - 1),
        };
        let t = match self.kind {
            CoordinateKind::Polar => arg_positive(w) / T::TAU(),
            CoordinateKind::Cartesian => w.im - self.shear * w.re,
        };
        let n = self.transverse;
        let j = (t * T::lit(n as f64))
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(n - 1);
        Some((i, j))
    }

    pub fn cell_index(&self, axis: usize, transverse: usize) -> usize {
        axis * self.transverse + transverse
    }

    /// Cells within index distance `reach` of `(axis, transverse)`; the
    /// angular index wraps on polar grids, everything else is clamped.
    pub fn neighborhood(&self, axis: usize, transverse: usize, reach: usize) -> Vec<usize> {
        let n_axis = self.axis_count() as isize;
        let n_tr = self.transverse as isize;
        let reach = reach as isize;
        let mut out = Vec::new();
        for di in -reach..=reach {
            let i = axis as isize + di;
            if i < 0 || i >= n_axis {
                continue;
            }
            let mut seen = Vec::new();
            for dj in -reach..=reach {
                let j = transverse as isize + dj;
                let j = match self.kind {
                    CoordinateKind::Polar => j.rem_euclid(n_tr),
                    CoordinateKind::Cartesian if j < 0 || j >= n_tr => continue,
                    CoordinateKind::Cartesian => j,
                };
                if !seen.contains(&j) {
                    seen.push(j);
                    out.push(self.cell_index(i as usize, j as usize));
                }
            }
        }
        out
    }

    /// Local axis spacing at the cell containing axis coordinate `s`.
    pub fn axis_spacing_at(&self, s: T) -> T {
        let i = match self
            .axis_edges
            .binary_search_by(|e| e.partial_cmp(&s).unwrap())
        {
            Ok(i) | Err(i) => i.clamp(1, self.axis_count()) - 1,
        };
        self.axis_edges[i + 1] - self.axis_edges[i]
    }
}

/// Weighted compensated sum `Σ weight_i * sample_i` in cell order.
pub fn integrate<T: Real>(grid: &QuadratureGrid<T>, samples: &[T]) -> Result<T> {
    weighted_sum(grid.cells.iter().map(|c| c.weight), grid.len(), samples)
}

/// Like [`integrate`] against the exact inverse-square cell masses of a polar grid.
pub fn integrate_inverse_square<T: Real>(grid: &QuadratureGrid<T>, samples: &[T]) -> Result<T> {
    let masses = grid.inverse_square_weights().ok_or_else(|| {
        LabError::Unsupported("inverse-square density requires a polar grid".into())
    })?;
    weighted_sum(masses.iter().copied(), grid.len(), samples)
}

fn weighted_sum<T: Real>(weights: impl Iterator<Item = T>, n: usize, samples: &[T]) -> Result<T> {
    if samples.len() != n {
        return Err(LabError::LengthMismatch {
            expected: n,
            got: samples.len(),
        });
    }
    let mut terms = Vec::with_capacity(n);
    for (cell, (w, &s)) in weights.zip(samples).enumerate() {
        if !s.is_finite() {
            return Err(LabError::NonFinite {
                cell,
                value: s.as_f64(),
            });
        }
        terms.push(w * s);
    }
    Ok(compensated_sum(&terms))
}

/// Evaluate `f` on every cell (in parallel) and return samples in cell order.
pub fn sample_cells<T, S, F>(grid: &QuadratureGrid<T>, f: F) -> Result<Vec<S>>
where
    T: Real,
    S: Send,
    F: Fn(usize, &Cell<T>) -> Result<S> + Sync,
{
    grid.cells
        .par_iter()
        .enumerate()
        .map(|(i, c)| f(i, c))
        .collect()
}

/// Complex counterpart of [`integrate`]; real and imaginary parts are reduced separately.
pub fn integrate_complex<T: Real>(
    grid: &QuadratureGrid<T>,
    samples: &[Complex<T>],
) -> Result<Complex<T>> {
    let re: Vec<T> = samples.iter().map(|z| z.re).collect();
    let im: Vec<T> = samples.iter().map(|z| z.im).collect();
    Ok(Complex::new(integrate(grid, &re)?, integrate(grid, &im)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn annulus(q: f64) -> AnnulusDomain<f64> {
        AnnulusDomain::new(q).unwrap()
    }

    #[test]
    fn polar_area_identity() {
        let g = build_polar_grid(&annulus(0.5), 64, 64, &[]).unwrap();
        let area = PI * (1.0 - 0.25);
        assert!((g.total_weight() - area).abs() <= 1e-12 * area);
        assert!(g.cells().iter().all(|c| c.weight > 0.0));
    }

    #[test]
    fn polar_break_is_an_edge() {
        let b = 0.5f64.sqrt();
        let g = build_polar_grid(&annulus(0.5), 64, 16, &[b]).unwrap();
        assert!(g.axis_edges().contains(&b));
        // no cell straddles the break
        for pair in g.axis_edges().windows(2) {
            assert!(!(pair[0] < b && pair[1] > b));
        }
        assert_eq!(g.axis_count(), 64);
    }

    #[test]
    fn polar_break_outside_rejected() {
        let err = build_polar_grid(&annulus(0.5), 8, 8, &[0.4]).unwrap_err();
        assert!(matches!(err, LabError::InvalidParameter { .. }));
        assert!(build_polar_grid(&annulus(0.5), 0, 8, &[]).is_err());
    }

    #[test]
    fn cartesian_basics() {
        let rect = RectangleDomain::new(1.0f64).unwrap();
        let g = build_cartesian_grid(&rect, 32, 32, &[0.5]).unwrap();
        assert!((g.total_weight() - 1.0).abs() <= 1e-12);
        assert!(g.has_edge_at(0.5));

        let one = build_cartesian_grid(&rect, 1, 1, &[]).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one.cells()[0].center, Complex::new(0.5, 0.5));
        assert_eq!(one.cells()[0].weight, 1.0);

        assert!(build_cartesian_grid(&rect, 4, 4, &[1.5]).is_err());
    }

    #[test]
    fn parallelogram_area_and_containment() {
        let par = ParallelogramDomain::from_stretch(2.0f64, 0.7, 1.3).unwrap();
        let g = build_parallelogram_grid(&par, 40, 30, &[1.3]).unwrap();
        assert!((g.total_weight() - 2.6).abs() < 1e-12);
        assert!(g.cells().iter().all(|c| par_contains(&par, c.center)));
    }

    fn par_contains(p: &ParallelogramDomain<f64>, w: Complex<f64>) -> bool {
        Domain::Parallelogram(*p).contains(w)
    }

    #[test]
    fn integrate_constant_and_inverse_square() {
        let g = build_polar_grid(&annulus(0.5), 512, 512, &[]).unwrap();
        let ones = vec![1.0; g.len()];
        let area = integrate(&g, &ones).unwrap();
        assert!((area - PI * 0.75).abs() < 1e-12);

        let inv: Vec<f64> = g
            .cells()
            .iter()
            .map(|c| 1.0 / c.center.norm_sqr())
            .collect();
        let v = integrate(&g, &inv).unwrap();
        let exact = 2.0 * PI * 2f64.ln();
        assert!(((v - exact) / exact).abs() < 1e-6, "{v} vs {exact}");

        let exact_mass = integrate_inverse_square(&g, &ones).unwrap();
        assert!(((exact_mass - exact) / exact).abs() < 1e-13);
    }

    #[test]
    fn integrate_rejects_bad_samples() {
        let g = build_polar_grid(&annulus(0.5), 4, 4, &[]).unwrap();
        let short = vec![1.0; g.len() - 1];
        assert!(matches!(
            integrate(&g, &short),
            Err(LabError::LengthMismatch { .. })
        ));
        let mut bad = vec![1.0; g.len()];
        bad[7] = f64::NAN;
        assert!(matches!(
            integrate(&g, &bad),
            Err(LabError::NonFinite { cell: 7, .. })
        ));
    }

    #[test]
    fn richardson_ratio_on_inverse_square() {
        let exact = 2.0 * PI * 2f64.ln();
        let err = |n: usize| {
            let g = build_polar_grid(&annulus(0.5), n, 8, &[]).unwrap();
            let s: Vec<f64> = g
                .cells()
                .iter()
                .map(|c| 1.0 / c.center.norm_sqr())
                .collect();
            integrate(&g, &s).unwrap() - exact
        };
        let (e1, e2, e3) = (err(16), err(32), err(64));
        for ratio in [e1 / e2, e2 / e3] {
            assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn locate_and_neighborhood() {
        let g = build_polar_grid(&annulus(0.5), 10, 12, &[]).unwrap();
        let c = g.cells()[g.cell_index(3, 0)].center;
        assert_eq!(g.locate(c), Some((3, 0)));
        let nb = g.neighborhood(3, 0, 1);
        assert_eq!(nb.len(), 9);
        assert!(nb.contains(&g.cell_index(2, 11)));
        assert_eq!(g.neighborhood(0, 5, 1).len(), 6);
        assert_eq!(g.locate(Complex::new(0.1, 0.0)), None);
    }

    #[test]
    fn geometric_spacing_keeps_area() {
        let g = build_polar_grid_with(&annulus(0.01), 50, 16, &[0.1], RadialSpacing::Geometric)
            .unwrap();
        let area = PI * (1.0 - 1e-4);
        assert!((g.total_weight() - area).abs() < 1e-12);
        let masses = g.inverse_square_weights().unwrap();
        let total: f64 = masses.iter().sum();
        assert!((total - 2.0 * PI * 100f64.ln()).abs() < 1e-11);
    }
}
