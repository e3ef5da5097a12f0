//! Numerical lab for quasiconformal stretch maps: closed-form map families,
//! midpoint quadrature on annuli and rectangles, convex distortion gauges,
//! distortion functionals, Cauchy–Pompeiu reconstruction and stability audits.
//!
//! The core is generic over the scalar (`f32` or `f64`); the aliases at the
//! crate root fix it to `f64`, which is what the audits and the CLI use.

// `!(x > 0)` style range checks also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod functionals;
pub mod gauge;
pub mod geometry;
pub mod map_zoo;
pub mod pompeiu;
pub mod scalar;
pub mod stability_lab;
pub mod summation;

pub use error::{LabError, Result};
pub use scalar::Real;

/// Complex `f64`.
pub type C64 = num_complex::Complex<f64>;
pub type Map = map_zoo::MapFamily<f64>;
pub type Grid = geometry::QuadratureGrid<f64>;
pub type Gauge = gauge::ConvexGauge<f64>;
