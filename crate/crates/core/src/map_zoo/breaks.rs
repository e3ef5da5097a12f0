//! Curves on which a map's derivative (or its value, for branch cuts) jumps.

use num_complex::Complex;

use super::MapFamily;
use crate::error::{LabError, Result};
use crate::geometry::CoordinateKind;

use crate::scalar::{arg_positive, rem_euclid, Real};

const ON_BREAK_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BreakLocus<T> {
    /// `|z| = radius`.
    Circle { radius: T },
    /// `Re z = x`.
    VerticalLine { x: T },
    /// `arg z = twist * log|z|` (mod 2π); the value jumps across it.
    BranchCut { twist: T },
}

impl<T: Real> BreakLocus<T> {
    /// Signed position of `z` relative to the locus, for circles and lines.
    fn side(&self, z: Complex<T>) -> T {
        match *self {
            Self::Circle { radius } => z.norm() - radius,
            Self::VerticalLine { x } => z.re - x,
            Self::BranchCut { .. } => T::zero(),
        }
    }

    fn scale(&self) -> T {
        match *self {
            Self::Circle { radius } => radius.max(T::one()),
            Self::VerticalLine { x } => x.abs().max(T::one()),
            Self::BranchCut { .. } => T::one(),
        }
    }

    /// Fraction of a turn between the cut and `z`, in `[0, 1)`.
    fn turn_fraction(twist: T, z: Complex<T>) -> T {
        let tau = T::TAU();
        let rel = rem_euclid(arg_positive(z) - twist * z.norm().ln(), tau);
        rel / tau
    }

    /// `true` when `z` lies on the locus up to a relative tolerance of `1e-12`.
    pub fn is_on(&self, z: Complex<T>) -> bool {
        match *self {
            Self::BranchCut { twist } => {
                let t = Self::turn_fraction(twist, z);
                let tol = T::lit(ON_BREAK_REL);
                t <= tol || t >= T::one() - tol
            }
            _ => self.side(z).abs() <= T::lit(ON_BREAK_REL) * self.scale(),
        }
    }

    /// `true` when the points do not all lie strictly on one side of the locus.
    pub fn separates(&self, points: &[Complex<T>]) -> bool {
        if points.iter().any(|&p| self.is_on(p)) {
            return true;
        }
        match *self {
            Self::BranchCut { twist } => {
                let mut lo = T::one();
                let mut hi = T::zero();
                for &p in points {
                    let t = Self::turn_fraction(twist, p);
                    lo = lo.min(t);
                    hi = hi.max(t);
                }
                hi - lo > T::half()
            }
            _ => {
                let mut pos = false;
                let mut neg = false;
                for &p in points {
                    if self.side(p) > T::zero() {
                        pos = true;
                    } else {
                        neg = true;
                    }
                }
                pos && neg
            }
        }
    }
}

impl<T: Real> MapFamily<T> {
    /// Loci where the analytic Wirtinger derivatives jump.
    pub fn derivative_breaks(&self) -> Vec<BreakLocus<T>> {
        match self {
            Self::PiecewiseLinearStretch(p) => vec![BreakLocus::VerticalLine { x: p.kink() }],
            Self::PiecewiseRadialStretch(p) => vec![BreakLocus::Circle {
                radius: p.break_radius(),
            }],
            Self::Composition(c) => c.breaks.clone(),
            _ => Vec::new(),
        }
    }

    /// Loci where the value itself jumps.
    pub fn value_breaks(&self) -> Vec<BreakLocus<T>> {
        match self {
            Self::LogCoordinatesG(p) => vec![BreakLocus::BranchCut { twist: p.n / p.k }],
            _ => Vec::new(),
        }
    }

    /// Express a locus of this map's codomain as a locus of its domain.
    pub fn pull_back(&self, locus: &BreakLocus<T>) -> Result<BreakLocus<T>> {
        use BreakLocus::*;
        let unsupported = || {
            Err(LabError::Unsupported(format!(
                "cannot pull {:?} back through {}",
                locus,
                self.variant_name()
            )))
        };
        Ok(match (self, *locus) {
            (Self::LinearStretch(p), VerticalLine { x }) => VerticalLine { x: x / p.k },
            (Self::InverseLinearStretch(p), VerticalLine { x }) => VerticalLine { x: x * p.k },
            (Self::SpiralStretch(p), Circle { radius }) => Circle {
                radius: radius.powf(T::one() / p.k),
            },
            (Self::InverseSpiralStretch(p), Circle { radius }) => Circle {
                radius: radius.powf(p.k),
            },
            (Self::PiecewiseRadialStretch(p), Circle { radius }) => Circle {
                radius: p.profile_inverse(radius),
            },
            (Self::PiecewiseLinearStretch(p), VerticalLine { x }) => VerticalLine {
                x: p.profile_inverse(x),
            },
            (Self::ExpCoordinates(p) | Self::ExpCoordinatesF(p), Circle { radius }) => {
                VerticalLine {
                    x: (radius / p.scale()).ln() / T::TAU(),
                }
            }
            (Self::LogCoordinatesG(p), VerticalLine { x }) => Circle {
                radius: (T::TAU() * (x - p.k * p.width)).exp(),
            },
            (Self::Conjugation, l @ (Circle { .. } | VerticalLine { .. })) => l,
            (Self::Rotation(_), l @ Circle { .. }) => l,
            (Self::Composition(c), l) => c.inner.pull_back(&c.outer.pull_back(&l)?)?,
            _ => return unsupported(),
        })
    }

    /// `true` when a finite-difference stencil straddles a derivative or value break.
    pub fn stencil_crosses(&self, points: &[Complex<T>]) -> Result<bool> {
        if let Self::Composition(c) = self {
            if c.inner.stencil_crosses(points)? {
                return Ok(true);
            }
            let images = points
                .iter()
                .map(|&p| c.inner.eval(p))
                .collect::<Result<Vec<_>>>()?;
            return c.outer.stencil_crosses(&images);
        }
        Ok(self
            .derivative_breaks()
            .iter()
            .chain(self.value_breaks().iter())
            .any(|b| b.separates(points)))
    }

    /// Break coordinates a quadrature grid of the given kind must honour:
    /// radii for polar grids, `Re z` positions for Cartesian ones.
    pub fn grid_breaks(&self, kind: CoordinateKind) -> Result<Vec<T>> {
        self.derivative_breaks()
            .iter()
            .map(|b| match (kind, *b) {
                (CoordinateKind::Polar, BreakLocus::Circle { radius }) => Ok(radius),
                (CoordinateKind::Cartesian, BreakLocus::VerticalLine { x }) => Ok(x),
                _ => Err(LabError::Unsupported(format!(
                    "{:?} cannot be an edge of a {:?} grid",
                    b, kind
                ))),
            })
            .collect()
    }
}
