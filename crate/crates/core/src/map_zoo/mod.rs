//! Closed-form planar maps with exact values, analytic Wirtinger derivatives,
//! finite-difference checks and closed-form inverses.
//!
//! Wirtinger convention: `f_z = (f_x - i f_y) / 2`, `f_zbar = (f_x + i f_y) / 2`.
//! Compositions use the complex chain rule
//! `(g∘h)_z = g_w(h) h_z + g_wbar(h) conj(h_zbar)` and
//! `(g∘h)_zbar = g_w(h) h_zbar + g_wbar(h) conj(h_z)`.

mod breaks;
mod variants;

pub use breaks::BreakLocus;
pub use variants::{
    matching_twist, rectangle_width, ExpCoordinates, LinearStretch, LogCoordinatesG,
    PiecewiseLinearStretch, PiecewiseRadialStretch, SlopeOrder, SpiralStretch,
};

use num_complex::Complex;

use crate::error::{LabError, Result};
use crate::scalar::{arg_positive, is_finite_c, rem_euclid, Real};

/// Default finite-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Pair of Wirtinger derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WirtingerPair<T> {
    pub d_z: Complex<T>,
    pub d_zbar: Complex<T>,
}

impl<T: Real> WirtingerPair<T> {
    pub fn new(d_z: Complex<T>, d_zbar: Complex<T>) -> Self {
        Self { d_z, d_zbar }
    }

    /// From the partial derivatives `f_x`, `f_y`.
    pub fn from_partials(f_x: Complex<T>, f_y: Complex<T>) -> Self {
        let i = Complex::new(T::zero(), T::one());
        let h = T::half();
        Self {
            d_z: (f_x - i * f_y) * h,
            d_zbar: (f_x + i * f_y) * h,
        }
    }

    pub fn jacobian(&self) -> T {
        self.d_z.norm_sqr() - self.d_zbar.norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        is_finite_c(self.d_z) && is_finite_c(self.d_zbar)
    }

    /// Chain rule for `outer ∘ inner`, with `self` the outer pair at the image point.
    pub fn chain(&self, inner: &WirtingerPair<T>) -> WirtingerPair<T> {
        WirtingerPair {
            d_z: self.d_z * inner.d_z + self.d_zbar * inner.d_zbar.conj(),
            d_zbar: self.d_z * inner.d_zbar + self.d_zbar * inner.d_z.conj(),
        }
    }

    /// Pair of the inverse map at the image point: `conj(h_z) / J`, `-h_zbar / J`.
    pub fn inverse(&self) -> WirtingerPair<T> {
        let j = self.jacobian();
        WirtingerPair {
            d_z: self.d_z.conj() / j,
            d_zbar: -self.d_zbar / j,
        }
    }
}

/// `scale * w * |w|^a * exp(i beta log|w|)` and its Wirtinger pair.
///
/// Writing the map as `scale * w * (w wbar)^c` with `c = (a + i beta) / 2`
/// gives `f_w = (1 + c) P` and `f_wbar = c (w / wbar) P` where
/// `P = scale |w|^a exp(i beta log|w|)`.
fn radial_power<T: Real>(w: Complex<T>, scale: T, a: T, beta: T) -> (Complex<T>, WirtingerPair<T>) {
    let r2 = w.norm_sqr();
    let r = r2.sqrt();
    let p = Complex::from_polar(scale * r.powf(a), beta * r.ln());
    let c = Complex::new(a * T::half(), beta * T::half());
    let phase = w * w / r2;
    (
        w * p,
        WirtingerPair {
            d_z: (Complex::new(T::one(), T::zero()) + c) * p,
            d_zbar: c * phase * p,
        },
    )
}

/// Outer and inner map of a composition `outer ∘ inner`.
#[derive(Debug, Clone, PartialEq)]
pub struct Composition<T> {
    outer: MapFamily<T>,
    inner: MapFamily<T>,
    breaks: Vec<BreakLocus<T>>,
}

impl<T: Real> Composition<T> {
    pub fn outer(&self) -> &MapFamily<T> {
        &self.outer
    }

    pub fn inner(&self) -> &MapFamily<T> {
        &self.inner
    }
}

/// Closed-form planar map.
#[derive(Debug, Clone, PartialEq)]
pub enum MapFamily<T> {
    /// `f*(z) = kx + inx + iy`.
    LinearStretch(LinearStretch<T>),
    /// `x' + iy' -> x'/k + i(y' - n x'/k)`.
    InverseLinearStretch(LinearStretch<T>),
    /// `g_N`; `turns = 0` is the extremal `g*`.
    SpiralStretch(SpiralStretch<T>),
    /// Inverse of `g*` (`turns = 0` only).
    InverseSpiralStretch(SpiralStretch<T>),
    /// `f_eps` on the rectangle.
    PiecewiseLinearStretch(PiecewiseLinearStretch<T>),
    /// `g^(eps)` on the annulus.
    PiecewiseRadialStretch(PiecewiseRadialStretch<T>),
    /// `z -> q exp(2πz)`.
    ExpCoordinates(ExpCoordinates<T>),
    /// `G(w) = log(w)/2π + kl + inl`.
    LogCoordinatesG(LogCoordinatesG<T>),
    /// `F(z) = q^k exp(2πz)`.
    ExpCoordinatesF(ExpCoordinates<T>),
    /// `z -> conj(z)`; orientation reversing, used as a reconstruction test field.
    Conjugation,
    /// `z -> exp(i angle) z`.
    Rotation(T),
    Composition(Box<Composition<T>>),
}

impl<T: Real> MapFamily<T> {
    pub fn linear_stretch(k: T, n: T) -> Result<Self> {
        Ok(Self::LinearStretch(LinearStretch::new(k, n)?))
    }

    pub fn inverse_linear_stretch(k: T, n: T) -> Result<Self> {
        Ok(Self::InverseLinearStretch(LinearStretch::new(k, n)?))
    }

    pub fn identity() -> Self {
        Self::LinearStretch(LinearStretch {
            k: T::one(),
            n: T::zero(),
        })
    }

    pub fn spiral_stretch(q: T, k: T, theta: T, turns: i32) -> Result<Self> {
        Ok(Self::SpiralStretch(SpiralStretch::new(q, k, theta, turns)?))
    }

    /// The extremal map `g*` (`N = 0`).
    pub fn g_star(q: T, k: T, theta: T) -> Result<Self> {
        Self::spiral_stretch(q, k, theta, 0)
    }

    pub fn inverse_spiral_stretch(q: T, k: T, theta: T) -> Result<Self> {
        Ok(Self::InverseSpiralStretch(SpiralStretch::new(
            q, k, theta, 0,
        )?))
    }

    pub fn piecewise_linear(k: T, eps: T) -> Result<Self> {
        Ok(Self::PiecewiseLinearStretch(PiecewiseLinearStretch::new(
            k, eps,
        )?))
    }

    pub fn piecewise_radial(q: T, k: T, eps: T) -> Result<Self> {
        Ok(Self::PiecewiseRadialStretch(PiecewiseRadialStretch::new(
            q, k, eps,
        )?))
    }

    pub fn exp_coordinates(q: T) -> Result<Self> {
        Ok(Self::ExpCoordinates(ExpCoordinates::source(q)?))
    }

    pub fn exp_coordinates_f(q: T, k: T) -> Result<Self> {
        Ok(Self::ExpCoordinatesF(ExpCoordinates::target(q, k)?))
    }

    pub fn rotation(angle: T) -> Result<Self> {
        if !angle.is_finite() {
            return Err(crate::error::invalid(
                "angle",
                "rotation angle must be finite",
            ));
        }
        Ok(Self::Rotation(angle))
    }

    pub fn log_coordinates(q: T, k: T, n: T) -> Result<Self> {
        Ok(Self::LogCoordinatesG(LogCoordinatesG::new(q, k, n)?))
    }

    /// `outer ∘ inner`; fails when a derivative break of `outer` cannot be
    /// expressed in the coordinates of `inner`'s domain.
    pub fn compose(outer: MapFamily<T>, inner: MapFamily<T>) -> Result<Self> {
        let mut breaks = inner.derivative_breaks();
        for b in outer.derivative_breaks() {
            breaks.push(inner.pull_back(&b)?);
        }
        Ok(Self::Composition(Box::new(Composition {
            outer,
            inner,
            breaks,
        })))
    }

    /// `false` only for [`MapFamily::Conjugation`] (and compositions containing it an odd number of times).
    pub fn is_orientation_preserving(&self) -> bool {
        match self {
            Self::Conjugation => false,
            Self::Composition(c) => {
                c.outer.is_orientation_preserving() == c.inner.is_orientation_preserving()
            }
            _ => true,
        }
    }

    fn needs_nonzero(&self) -> bool {
        matches!(
            self,
            Self::SpiralStretch(_)
                | Self::InverseSpiralStretch(_)
                | Self::PiecewiseRadialStretch(_)
                | Self::LogCoordinatesG(_)
        )
    }

    fn check_point(&self, z: Complex<T>) -> Result<()> {
        if !is_finite_c(z) {
            return Err(LabError::Domain(format!("non-finite point {}", z)));
        }
        if self.needs_nonzero() && z.norm_sqr() == T::zero() {
            return Err(LabError::Domain(
                "z = 0 is outside the domain of log|z|".into(),
            ));
        }
        Ok(())
    }

    /// Exact value at `z`.
    pub fn eval(&self, z: Complex<T>) -> Result<Complex<T>> {
        self.check_point(z)?;
        let two_pi = T::TAU();
        Ok(match self {
            Self::LinearStretch(p) => Complex::new(p.k * z.re, p.n * z.re + z.im),
            Self::InverseLinearStretch(p) => {
                let x = z.re / p.k;
                Complex::new(x, z.im - p.n * x)
            }
            Self::SpiralStretch(p) => radial_power(z, T::one(), p.k - T::one(), p.twist_rate()).0,
            Self::InverseSpiralStretch(p) => {
                let (a, beta) = inverse_spiral_exponents(p);
                radial_power(z, T::one(), a, beta).0
            }
            Self::PiecewiseLinearStretch(p) => Complex::new(p.profile(z.re), z.im),
            Self::PiecewiseRadialStretch(p) => {
                let (scale, a) = p.piece(z.norm() >= p.break_radius());
                radial_power(z, scale, a, p.theta / p.q.ln()).0
            }
            Self::ExpCoordinates(p) | Self::ExpCoordinatesF(p) => (z * two_pi).exp() * p.scale(),
            Self::LogCoordinatesG(p) => {
                let r = z.norm();
                let cut = p.cut_angle(r);
                let rel = rem_euclid(arg_positive(z) - cut, two_pi);
                Complex::new(r.ln(), cut + rel) / two_pi + p.offset()
            }
            Self::Conjugation => z.conj(),
            Self::Rotation(a) => Complex::from_polar(T::one(), *a) * z,
            Self::Composition(c) => c.outer.eval(c.inner.eval(z)?)?,
        })
    }

    /// Analytic Wirtinger derivatives at `z`. Fails on a derivative break.
    pub fn wirtinger(&self, z: Complex<T>) -> Result<WirtingerPair<T>> {
        self.check_point(z)?;
        if !matches!(self, Self::Composition(_)) {
            for b in self.derivative_breaks() {
                if b.is_on(z) {
                    return Err(LabError::BreakSet(format!(
                        "derivative requested on {:?} at {}",
                        b, z
                    )));
                }
            }
        }
        let zero = Complex::new(T::zero(), T::zero());
        Ok(match self {
            Self::LinearStretch(p) => WirtingerPair::new(p.d_z(), p.d_zbar()),
            Self::InverseLinearStretch(p) => {
                let i = Complex::new(T::zero(), T::one());
                let f_x = Complex::new(T::one(), -p.n) / p.k;
                WirtingerPair::from_partials(f_x, i)
            }
            Self::SpiralStretch(p) => radial_power(z, T::one(), p.k - T::one(), p.twist_rate()).1,
            Self::InverseSpiralStretch(p) => {
                let (a, beta) = inverse_spiral_exponents(p);
                radial_power(z, T::one(), a, beta).1
            }
            Self::PiecewiseLinearStretch(p) => {
                let m = p.slope(z.re > p.kink());
                WirtingerPair::new(
                    Complex::new((m + T::one()) * T::half(), T::zero()),
                    Complex::new((m - T::one()) * T::half(), T::zero()),
                )
            }
            Self::PiecewiseRadialStretch(p) => {
                let (scale, a) = p.piece(z.norm() > p.break_radius());
                radial_power(z, scale, a, p.theta / p.q.ln()).1
            }
            Self::ExpCoordinates(p) | Self::ExpCoordinatesF(p) => {
                WirtingerPair::new((z * T::TAU()).exp() * (p.scale() * T::TAU()), zero)
            }
            Self::LogCoordinatesG(_) => {
                WirtingerPair::new(Complex::new(T::one(), T::zero()) / (z * T::TAU()), zero)
            }
            Self::Conjugation => WirtingerPair::new(zero, Complex::new(T::one(), T::zero())),
            Self::Rotation(a) => WirtingerPair::new(Complex::from_polar(T::one(), *a), zero),
            Self::Composition(c) => {
                let inner = c.inner.wirtinger(z)?;
                let outer = c.outer.wirtinger(c.inner.eval(z)?)?;
                outer.chain(&inner)
            }
        })
    }

    /// Central-difference Wirtinger pair with step `h`.
    pub fn wirtinger_fd(&self, z: Complex<T>, h: T) -> Result<WirtingerPair<T>> {
        if !(h > T::zero()) {
            return Err(crate::error::invalid("h", "step must be positive"));
        }
        let hx = Complex::new(h, T::zero());
        let hy = Complex::new(T::zero(), h);
        let stencil = [z, z + hx, z - hx, z + hy, z - hy];
        if self.stencil_crosses(&stencil)? {
            return Err(LabError::BreakSet(format!(
                "finite-difference stencil of width {} at {} crosses a break locus",
                h, z
            )));
        }
        let two_h = h + h;
        let f_x = (self.eval(stencil[1])? - self.eval(stencil[2])?) / two_h;
        let f_y = (self.eval(stencil[3])? - self.eval(stencil[4])?) / two_h;
        Ok(WirtingerPair::from_partials(f_x, f_y))
    }

    /// Closed-form inverse at `w`.
    pub fn invert(&self, w: Complex<T>) -> Result<Complex<T>> {
        match self {
            Self::LogCoordinatesG(p) => {
                self.check_point(Complex::new(T::one(), T::zero()))?;
                if !is_finite_c(w) {
                    return Err(LabError::Domain(format!("non-finite point {}", w)));
                }
                Ok(((w - p.offset()) * T::TAU()).exp())
            }
            Self::Composition(c) => c.inner.invert(c.outer.invert(w)?),
            _ => self.inverse_family()?.eval(w),
        }
    }

    /// The inverse as a map of its own, where it is one of the variants.
    pub fn inverse_family(&self) -> Result<MapFamily<T>> {
        match self {
            Self::LinearStretch(p) => Ok(Self::InverseLinearStretch(*p)),
            Self::InverseLinearStretch(p) => Ok(Self::LinearStretch(*p)),
            Self::SpiralStretch(p) if p.turns == 0 => Ok(Self::InverseSpiralStretch(*p)),
            Self::InverseSpiralStretch(p) => Ok(Self::SpiralStretch(*p)),
            // log(w / q) / 2π with arg in [0, 2π) is G with k = 1, n = 0.
            Self::ExpCoordinates(p) => Ok(Self::LogCoordinatesG(LogCoordinatesG::new(
                p.q,
                T::one(),
                T::zero(),
            )?)),
            Self::ExpCoordinatesF(p) => Ok(Self::LogCoordinatesG(LogCoordinatesG::new(
                p.q,
                p.k.unwrap_or(T::one()),
                T::zero(),
            )?)),
            Self::LogCoordinatesG(p) if p.n == T::zero() => {
                Ok(Self::ExpCoordinatesF(ExpCoordinates::target(p.q, p.k)?))
            }
            Self::Conjugation => Ok(Self::Conjugation),
            Self::Rotation(a) => Ok(Self::Rotation(-*a)),
            Self::Composition(c) => {
                Self::compose(c.inner.inverse_family()?, c.outer.inverse_family()?)
            }
            other => Err(LabError::Unsupported(format!(
                "no closed-form inverse for {}",
                other.variant_name()
            ))),
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            Self::LinearStretch(_) => "LinearStretch",
            Self::InverseLinearStretch(_) => "InverseLinearStretch",
            Self::SpiralStretch(_) => "SpiralStretch",
            Self::InverseSpiralStretch(_) => "InverseSpiralStretch",
            Self::PiecewiseLinearStretch(_) => "PiecewiseLinearStretch",
            Self::PiecewiseRadialStretch(_) => "PiecewiseRadialStretch",
            Self::ExpCoordinates(_) => "ExpCoordinates",
            Self::LogCoordinatesG(_) => "LogCoordinatesG",
            Self::ExpCoordinatesF(_) => "ExpCoordinatesF",
            Self::Conjugation => "Conjugation",
            Self::Rotation(_) => "Rotation",
            Self::Composition(_) => "Composition",
        }
    }

    /// `(q, k, θ, N)` for maps defined on the annulus `q <= |w| <= 1`.
    pub fn annulus_parameters(&self) -> Option<AnnulusParameters<T>> {
        match self {
            Self::SpiralStretch(p) => Some(AnnulusParameters {
                q: p.q,
                k: p.k,
                theta: p.theta,
                turns: p.turns,
            }),
            Self::PiecewiseRadialStretch(p) => Some(AnnulusParameters {
                q: p.q,
                k: p.k,
                theta: p.theta,
                turns: 0,
            }),
            _ => None,
        }
    }
}

/// Parameters shared by the annulus families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusParameters<T> {
    pub q: T,
    pub k: T,
    pub theta: T,
    pub turns: i32,
}

/// `(a, beta)` of the inverse spiral-stretch: `|h(w)| = |w|^(1/k)` and the
/// angle untwisted by `θ log|h| / log q`.
fn inverse_spiral_exponents<T: Real>(p: &SpiralStretch<T>) -> (T, T) {
    (T::one() / p.k - T::one(), -p.theta / (p.k * p.q.ln()))
}
