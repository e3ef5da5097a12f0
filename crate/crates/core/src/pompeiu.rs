//! Cauchy boundary transform, Cauchy–Pompeiu area transform and ∂̄-masses.
//!
//! For `Φ ∈ C¹` on a bounded domain `D`,
//! `Φ(w) = (1/2πi) ∮_{∂D} Φ(ξ)/(ξ - w) dξ + (1/π) ∫_D Φ_ξbar(ξ)/(w - ξ) dA(ξ)`.
//! The area term is discretised on a quadrature grid with the cell holding `w`
//! and its eight neighbours left out; for a patch symmetric about `w` the
//! left-out integral of `1/(w - ξ)` vanishes, so no correction is added.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, LabError, Result};
use crate::functionals::require_breaks_honoured;
use crate::geometry::{integrate, sample_cells, CoordinateKind, Domain, QuadratureGrid};
use crate::map_zoo::{BreakLocus, LinearStretch, MapFamily, SpiralStretch};
use crate::scalar::{is_finite_c, Real};
use crate::summation::compensated_sum;

/// Boundary nodes closer to the target than this many node spacings make the
/// trapezoid rule unreliable.
const BOUNDARY_CLEARANCE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape<T> {
    Circle { radius: T },
    Polygon,
}

/// One closed, oriented boundary curve with trapezoid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryComponent<T> {
    shape: Shape<T>,
    nodes: Vec<Complex<T>>,
    /// `Δξ` carried by each node, orientation included.
    weights: Vec<Complex<T>>,
    values: Vec<Complex<T>>,
    /// Segments for the distance test (polygons only).
    segments: Vec<(Complex<T>, Complex<T>)>,
    spacing: T,
}

impl<T: Real> BoundaryComponent<T> {
    /// Circle `|ξ| = radius`, counterclockwise unless `clockwise`, `n` equally spaced nodes.
    pub fn circle<F>(radius: T, n: usize, clockwise: bool, values: F) -> Result<Self>
    where
        F: Fn(Complex<T>) -> Result<Complex<T>>,
    {
        if !(radius > T::zero()) {
            return Err(invalid("radius", "circle radius must be positive"));
        }
        if n < 3 {
            return Err(invalid("nodes", "a circle needs at least 3 nodes"));
        }
        let dt = T::TAU() / T::lit(n as f64);
        let sign = if clockwise { -T::one() } else { T::one() };
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for j in 0..n {
            let xi = Complex::from_polar(radius, dt * T::lit(j as f64));
            nodes.push(xi);
            weights.push(Complex::new(T::zero(), sign * dt) * xi);
        }
        let values = nodes
            .iter()
            .map(|&x| values(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            shape: Shape::Circle { radius },
            nodes,
            weights,
            values,
            segments: Vec::new(),
            spacing: radius * dt,
        })
    }

    /// Closed polygon through `vertices` in the given order, `per_side`
    /// trapezoid intervals on each side.
    pub fn polygon<F>(vertices: &[Complex<T>], per_side: usize, values: F) -> Result<Self>
    where
        F: Fn(Complex<T>) -> Result<Complex<T>>,
    {
        if vertices.len() < 3 || per_side == 0 {
            return Err(invalid(
                "vertices",
                "a polygon needs 3 vertices and 1 node per side",
            ));
        }
        let m = T::lit(per_side as f64);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut segments = Vec::new();
        let mut spacing = T::zero();
        for (i, &a) in vertices.iter().enumerate() {
            let b = vertices[(i + 1) % vertices.len()];
            let step = (b - a) / m;
            spacing = spacing.max(step.norm());
            segments.push((a, b));
            for j in 0..=per_side {
                let end = j == 0 || j == per_side;
                nodes.push(a + step * T::lit(j as f64));
                weights.push(if end { step * T::half() } else { step });
            }
        }
        let values = nodes
            .iter()
            .map(|&x| values(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            shape: Shape::Polygon,
            nodes,
            weights,
            values,
            segments,
            spacing,
        })
    }

    pub fn nodes(&self) -> &[Complex<T>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[Complex<T>] {
        &self.weights
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    fn distance(&self, w: Complex<T>) -> T {
        match self.shape {
            Shape::Circle { radius } => (w.norm() - radius).abs(),
            Shape::Polygon => self
                .segments
                .iter()
                .map(|&(a, b)| segment_distance(a, b, w))
                .fold(T::infinity(), T::min),
        }
    }
}

fn segment_distance<T: Real>(a: Complex<T>, b: Complex<T>, w: Complex<T>) -> T {
    let d = b - a;
    let len2 = d.norm_sqr();
    let t = ((w - a) * d.conj()).re / len2;
    let t = t.max(T::zero()).min(T::one());
    (a + d * t - w).norm()
}

/// Boundary data: one or more closed components.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace<T> {
    components: Vec<BoundaryComponent<T>>,
}

impl<T: Real> BoundaryTrace<T> {
    pub fn new(components: Vec<BoundaryComponent<T>>) -> Result<Self> {
        if components.is_empty() {
            return Err(invalid("components", "a boundary trace needs a component"));
        }
        for c in &components {
            if let Some(i) = c.values.iter().position(|v| !is_finite_c(*v)) {
                return Err(LabError::NonFinite {
                    cell: i,
                    value: c.values[i].norm().as_f64(),
                });
            }
        }
        Ok(Self { components })
    }

    /// `∂{inner <= |ξ| <= 1}`: outer circle counterclockwise, inner clockwise,
    /// `n` nodes on each.
    pub fn annulus<F>(inner: T, n: usize, values: F) -> Result<Self>
    where
        F: Fn(Complex<T>) -> Result<Complex<T>>,
    {
        if !(inner > T::zero() && inner < T::one()) {
            return Err(invalid(
                "inner",
                format!("inner radius must lie in (0, 1), got {}", inner),
            ));
        }
        Self::new(vec![
            BoundaryComponent::circle(T::one(), n, false, &values)?,
            BoundaryComponent::circle(inner, n, true, &values)?,
        ])
    }

    /// Boundary of a grid's domain: annulus circles, or the rectangle /
    /// parallelogram traversed counterclockwise with `n / 4` intervals per side.
    pub fn for_domain<F>(domain: &Domain<T>, n: usize, values: F) -> Result<Self>
    where
        F: Fn(Complex<T>) -> Result<Complex<T>>,
    {
        match domain {
            Domain::Annulus(a) => Self::annulus(a.inner_radius(), n, values),
            Domain::Rectangle(r) => {
                let (w, h) = (r.width(), r.height());
                let v = [
                    Complex::new(T::zero(), T::zero()),
                    Complex::new(w, T::zero()),
                    Complex::new(w, h),
                    Complex::new(T::zero(), h),
                ];
                Self::new(vec![BoundaryComponent::polygon(
                    &v,
                    (n / 4).max(1),
                    values,
                )?])
            }
            Domain::Parallelogram(p) => Self::new(vec![BoundaryComponent::polygon(
                &p.vertices(),
                (n / 4).max(1),
                values,
            )?]),
        }
    }

    pub fn components(&self) -> &[BoundaryComponent<T>] {
        &self.components
    }
}

/// `(1/2πi) Σ values · Δξ / (ξ - w)` over all boundary nodes.
pub fn cauchy_boundary<T: Real>(trace: &BoundaryTrace<T>, w: Complex<T>) -> Result<Complex<T>> {
    for c in &trace.components {
        let d = c.distance(w);
        if !(d > T::lit(BOUNDARY_CLEARANCE) * c.spacing) {
            return Err(LabError::Accuracy(format!(
                "target {} is {} from the boundary, closer than {} node spacings ({})",
                w, d, BOUNDARY_CLEARANCE, c.spacing
            )));
        }
    }
    let mut re = Vec::new();
    let mut im = Vec::new();
    for c in &trace.components {
        for ((&xi, &dxi), &v) in c.nodes.iter().zip(&c.weights).zip(&c.values) {
            let t = v * dxi / (xi - w);
            re.push(t.re);
            im.push(t.im);
        }
    }
    let sum = Complex::new(compensated_sum(&re), compensated_sum(&im));
    Ok(sum / Complex::new(T::zero(), T::TAU()))
}

/// `∂̄`-derivative samples at the cell centres of a grid.
#[derive(Debug, Clone)]
pub struct DbarField<'g, T> {
    grid: &'g QuadratureGrid<T>,
    values: Vec<Complex<T>>,
}

impl<'g, T: Real> DbarField<'g, T> {
    pub fn new(grid: &'g QuadratureGrid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !is_finite_c(*v)) {
            return Err(LabError::NonFinite {
                cell: i,
                value: values[i].norm().as_f64(),
            });
        }
        Ok(Self { grid, values })
    }

    /// `map_wbar` at every cell centre; the grid must honour the map's breaks.
    pub fn from_map(map: &MapFamily<T>, grid: &'g QuadratureGrid<T>) -> Result<Self> {
        require_breaks_honoured(map, grid)?;
        let values = sample_cells(grid, |_, c| Ok(map.wirtinger(c.center)?.d_zbar))?;
        Self::new(grid, values)
    }

    pub fn from_fn<F>(grid: &'g QuadratureGrid<T>, f: F) -> Result<Self>
    where
        F: Fn(Complex<T>) -> Result<Complex<T>> + Sync,
    {
        let values = sample_cells(grid, |_, c| f(c.center))?;
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &QuadratureGrid<T> {
        self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    /// `∫ |field| dA`.
    pub fn l1_mass(&self) -> Result<T> {
        let m: Vec<T> = self.values.iter().map(|v| v.norm()).collect();
        integrate(self.grid, &m)
    }
}

fn excluded_cells<T: Real>(grid: &QuadratureGrid<T>, w: Complex<T>) -> Result<Vec<usize>> {
    let (i, j) = grid
        .locate(w)
        .ok_or_else(|| LabError::Domain(format!("target {} lies outside the grid's domain", w)))?;
    let mut cells = grid.neighborhood(i, j, 1);
    cells.sort_unstable();
    Ok(cells)
}

/// `(1/π) Σ value · weight / (w - centre)`, leaving out the cell holding `w`
/// and its eight neighbours.
pub fn pompeiu_area<T: Real>(field: &DbarField<'_, T>, w: Complex<T>) -> Result<Complex<T>> {
    let grid = field.grid;
    let skip = excluded_cells(grid, w)?;
    let terms: Vec<Complex<T>> = grid
        .cells()
        .par_iter()
        .zip(field.values.par_iter())
        .enumerate()
        .map(|(idx, (c, &v))| {
            if skip.binary_search(&idx).is_ok() {
                Complex::new(T::zero(), T::zero())
            } else {
                v * c.weight / (w - c.center)
            }
        })
        .collect();
    let re: Vec<T> = terms.iter().map(|t| t.re).collect();
    let im: Vec<T> = terms.iter().map(|t| t.im).collect();
    Ok(Complex::new(compensated_sum(&re), compensated_sum(&im)) / T::PI())
}

/// `Σ weight / |centre - ξ|` over the cells kept by [`pompeiu_area`].
pub fn kernel_mass<T: Real>(grid: &QuadratureGrid<T>, xi: Complex<T>) -> Result<T> {
    let skip = excluded_cells(grid, xi)?;
    let terms: Vec<T> = grid
        .cells()
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            if skip.binary_search(&idx).is_ok() {
                T::zero()
            } else {
                c.weight / (c.center - xi).norm()
            }
        })
        .collect();
    Ok(compensated_sum(&terms))
}

/// `2π sqrt(area/π)`: the integral of `1/|w - ξ|` over a disc of the
/// domain's area centred at `ξ`, which bounds the integral over the domain.
pub fn kernel_mass_bound<T: Real>(domain: &Domain<T>) -> T {
    T::TAU() * (domain.area() / T::PI()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reconstruction<T> {
    pub target: (T, T),
    pub value: (T, T),
    pub exact: (T, T),
    pub residual: T,
    /// The target lies within two cells of a derivative break.
    pub reduced_accuracy: bool,
}

/// Boundary trace and `∂̄`-field of a map on a grid, reusable across targets.
pub struct Reconstructor<'g, T> {
    map: MapFamily<T>,
    trace: BoundaryTrace<T>,
    field: DbarField<'g, T>,
}

impl<'g, T: Real> Reconstructor<'g, T> {
    pub fn new(
        map: &MapFamily<T>,
        grid: &'g QuadratureGrid<T>,
        boundary_nodes: usize,
    ) -> Result<Self> {
        let trace = BoundaryTrace::for_domain(grid.domain(), boundary_nodes, |xi| map.eval(xi))?;
        let field = DbarField::from_map(map, grid)?;
        Ok(Self {
            map: map.clone(),
            trace,
            field,
        })
    }

    pub fn trace(&self) -> &BoundaryTrace<T> {
        &self.trace
    }

    pub fn field(&self) -> &DbarField<'g, T> {
        &self.field
    }

    fn near_break(&self, w: Complex<T>) -> bool {
        let grid = self.field.grid;
        let two = T::two();
        self.map
            .derivative_breaks()
            .iter()
            .any(|b| match (*b, grid.kind()) {
                (BreakLocus::Circle { radius }, CoordinateKind::Polar) => {
                    (w.norm() - radius).abs() < two * grid.axis_spacing_at(radius)
                }
                (BreakLocus::VerticalLine { x }, CoordinateKind::Cartesian) => {
                    (w.re - x).abs() < two * grid.axis_spacing_at(x)
                }
                _ => false,
            })
    }

    /// `count` cell centres spread over the grid by a golden-ratio sequence,
    /// each clear of the boundary nodes. Centres sit half a cell from every
    /// cell edge, which keeps the excluded patch symmetric about the target.
    pub fn targets(&self, count: usize) -> Vec<Complex<T>> {
        let grid = self.field.grid;
        let (na, nt) = (grid.axis_count(), grid.transverse_count());
        let phi1 = 0.618_033_988_749_894_9_f64;
        let phi2 = 0.754_877_666_246_692_7_f64;
        let clear = |w: Complex<T>| {
            self.trace
                .components
                .iter()
                .all(|c| c.distance(w) > T::lit(2.0 * BOUNDARY_CLEARANCE) * c.spacing)
        };
        let mut out = Vec::with_capacity(count);
        let mut s = 0usize;
        while out.len() < count && s < 64 * count.max(1) + grid.len() {
            s += 1;
            let i = ((s as f64 * phi1).fract() * na as f64) as usize;
            let j = ((s as f64 * phi2).fract() * nt as f64) as usize;
            let w = grid.cells()[grid.cell_index(i.min(na - 1), j.min(nt - 1))].center;
            if clear(w) && !self.near_break(w) {
                out.push(w);
            }
        }
        out
    }

    pub fn reconstruct(&self, w: Complex<T>) -> Result<Reconstruction<T>> {
        let value = cauchy_boundary(&self.trace, w)? + pompeiu_area(&self.field, w)?;
        let exact = self.map.eval(w)?;
        Ok(Reconstruction {
            target: (w.re, w.im),
            value: (value.re, value.im),
            exact: (exact.re, exact.im),
            residual: (value - exact).norm(),
            reduced_accuracy: self.near_break(w),
        })
    }
}

/// One-shot reconstruction; prefer [`Reconstructor`] for many targets.
pub fn reconstruct<T: Real>(
    map: &MapFamily<T>,
    boundary_nodes: usize,
    grid: &QuadratureGrid<T>,
    w: Complex<T>,
) -> Result<Reconstruction<T>> {
    Reconstructor::new(map, grid, boundary_nodes)?.reconstruct(w)
}

/// `∫_{Q₂} |Ψ_wbar|` for `Ψ = f ∘ (f*)⁻¹`, with
/// `Ψ_wbar = f*_z / J* · (f_zbar - μ* f_z)` at `z = (f*)⁻¹(w)`.
pub fn psi_dbar_mass<T: Real>(
    f: &MapFamily<T>,
    fstar: &LinearStretch<T>,
    grid: &QuadratureGrid<T>,
) -> Result<T> {
    if !matches!(grid.domain(), Domain::Parallelogram(_)) {
        return Err(invalid("grid", "Ψ lives on the parallelogram f*(Q₁)"));
    }
    let inv = MapFamily::inverse_linear_stretch(fstar.k(), fstar.n())?;
    require_breaks_honoured(&MapFamily::compose(f.clone(), inv.clone())?, grid)?;
    let (dz, mu, jac) = (fstar.d_z(), fstar.mu(), fstar.jacobian());
    let samples = sample_cells(grid, |_, c| {
        let z = inv.eval(c.center)?;
        let p = f.wirtinger(z)?;
        Ok((dz / jac * (p.d_zbar - mu * p.d_z)).norm())
    })?;
    integrate(grid, &samples)
}

/// `∫_{A₂} |Φ_wbar|` for `Φ = g ∘ (g*)⁻¹`.
pub fn phi_dbar_mass<T: Real>(
    g: &MapFamily<T>,
    gstar: &SpiralStretch<T>,
    grid: &QuadratureGrid<T>,
) -> Result<T> {
    let target_inner = gstar.q().powf(gstar.k());
    match grid.domain() {
        Domain::Annulus(a)
            if (a.inner_radius() - target_inner).abs() <= T::lit(1e-12) * target_inner => {}
        _ => {
            return Err(invalid(
                "grid",
                format!("Φ lives on the annulus q^k = {} <= |w| <= 1", target_inner),
            ))
        }
    }
    let inv = MapFamily::inverse_spiral_stretch(gstar.q(), gstar.k(), gstar.theta())?;
    let phi = MapFamily::compose(g.clone(), inv)?;
    DbarField::from_map(&phi, grid)?.l1_mass()
}
