//! Scalar abstraction shared by the geometric and analytic modules.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the core math is generic over: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Widening conversion used by error messages and reports.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::one() / Self::two()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `true` when both parts are finite.
#[inline]
pub fn is_finite_c<T: Real>(z: Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Angle of `z` reduced into `[0, 2π)`.
#[inline]
pub fn arg_positive<T: Real>(z: Complex<T>) -> T {
    let a = z.im.atan2(z.re);
    if a >= T::zero() {
        return a;
    }
    let b = a + T::TAU();
    // A tiny negative angle rounds up to exactly 2π.
    if b >= T::TAU() {
        T::zero()
    } else {
        b
    }
}

/// Euclidean remainder of `a` modulo a positive `m`, in `[0, m)`.
pub fn rem_euclid<T: Real>(a: T, m: T) -> T {
    let r = a % m;
    let r = if r < T::zero() { r + m } else { r };
    if r >= m {
        T::zero()
    } else {
        r
    }
}

/// Reduce an angle into `(-π, π]`.
pub fn wrap_pi<T: Real>(a: T) -> T {
    let tau = T::TAU();
    let mut r = a % tau;
    if r <= -T::PI() {
        r = r + tau;
    } else if r > T::PI() {
        r = r - tau;
    }
    r
}
