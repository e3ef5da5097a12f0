//! Validated parameter sets for each closed-form map.

use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::scalar::Real;

fn check_q<T: Real>(q: T) -> Result<()> {
    if q > T::zero() && q < T::one() {
        Ok(())
    } else {
        Err(invalid("q", format!("q must lie in (0, 1), got {}", q)))
    }
}

fn check_theta<T: Real>(theta: T) -> Result<()> {
    if theta.abs() <= T::PI() {
        Ok(())
    } else {
        Err(invalid(
            "theta",
            format!("theta must lie in [-pi, pi], got {}", theta),
        ))
    }
}

fn check_positive<T: Real>(name: &'static str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(
            name,
            format!("{} must be positive, got {}", name, v),
        ))
    }
}

fn check_eps<T: Real>(k: T, eps: T) -> Result<()> {
    if !(k > T::one()) {
        return Err(invalid(
            "k",
            format!("k must be > 1 for the eps families, got {}", k),
        ));
    }
    let bound = (k - T::one()) * (k - T::one());
    if !(eps > T::zero()) {
        return Err(invalid("eps", format!("eps must be > 0, got {}", eps)));
    }
    if !(eps < bound) {
        return Err(invalid(
            "eps",
            format!("eps must be < (k-1)^2 = {}, got {}", bound, eps),
        ));
    }
    Ok(())
}

/// `(log(1/q)) / 2π`, the width of the rectangle matching the annulus of radius `q`.
pub fn rectangle_width<T: Real>(q: T) -> T {
    -q.ln() / T::TAU()
}

/// Twist `n = -(θ + 2πN) / (2π l)` of the linear stretch matching `g_N`.
pub fn matching_twist<T: Real>(q: T, theta: T, turns: i32) -> T {
    -(theta + T::TAU() * T::lit(f64::from(turns))) / (T::TAU() * rectangle_width(q))
}

/// `x + iy -> kx + inx + iy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearStretch<T> {
    pub(crate) k: T,
    pub(crate) n: T,
}

impl<T: Real> LinearStretch<T> {
    pub fn new(k: T, n: T) -> Result<Self> {
        check_positive("k", k)?;
        if !n.is_finite() {
            return Err(invalid("n", "n must be finite"));
        }
        Ok(Self { k, n })
    }

    pub fn k(&self) -> T {
        self.k
    }

    pub fn n(&self) -> T {
        self.n
    }

    /// `f_z = (k + 1 + in) / 2`.
    pub fn d_z(&self) -> Complex<T> {
        Complex::new((self.k + T::one()) * T::half(), self.n * T::half())
    }

    /// `f_zbar = (k - 1 + in) / 2`.
    pub fn d_zbar(&self) -> Complex<T> {
        Complex::new((self.k - T::one()) * T::half(), self.n * T::half())
    }

    /// Constant Beltrami coefficient `(k - 1 + in) / (k + 1 + in)`.
    pub fn mu(&self) -> Complex<T> {
        self.d_zbar() / self.d_z()
    }

    /// Jacobian `|f_z|² - |f_zbar|² = k`.
    pub fn jacobian(&self) -> T {
        self.d_z().norm_sqr() - self.d_zbar().norm_sqr()
    }
}

/// Spiral-stretch `w |w|^(k-1) exp(i (θ + 2πN) log|w| / log q)`; `turns = N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpiralStretch<T> {
    pub(crate) q: T,
    pub(crate) k: T,
    pub(crate) theta: T,
    pub(crate) turns: i32,
}

impl<T: Real> SpiralStretch<T> {
    pub fn new(q: T, k: T, theta: T, turns: i32) -> Result<Self> {
        check_q(q)?;
        check_positive("k", k)?;
        check_theta(theta)?;
        Ok(Self { q, k, theta, turns })
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn k(&self) -> T {
        self.k
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn turns(&self) -> i32 {
        self.turns
    }

    /// Angular rate `(θ + 2πN) / log q` multiplying `log|w|`.
    pub fn twist_rate(&self) -> T {
        (self.theta + T::TAU() * T::lit(f64::from(self.turns))) / self.q.ln()
    }
}

/// Which half of the rectangle carries the steeper slope `k + sqrt(eps)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SlopeOrder {
    #[default]
    SteepFirst,
    ShallowFirst,
}

/// `x + iy -> g(x) + iy` with `g` piecewise linear, slopes `k ± sqrt(eps)`,
/// kink at `x = width / 2` and `g(width) = k * width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiecewiseLinearStretch<T> {
    pub(crate) k: T,
    pub(crate) eps: T,
    pub(crate) width: T,
    pub(crate) order: SlopeOrder,
}

impl<T: Real> PiecewiseLinearStretch<T> {
    pub fn new(k: T, eps: T) -> Result<Self> {
        Self::with_layout(k, eps, T::one(), SlopeOrder::SteepFirst)
    }

    pub fn with_layout(k: T, eps: T, width: T, order: SlopeOrder) -> Result<Self> {
        check_eps(k, eps)?;
        check_positive("width", width)?;
        Ok(Self {
            k,
            eps,
            width,
            order,
        })
    }

    pub fn k(&self) -> T {
        self.k
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn width(&self) -> T {
        self.width
    }

    pub fn order(&self) -> SlopeOrder {
        self.order
    }

    pub fn kink(&self) -> T {
        self.width * T::half()
    }

    fn signed_root(&self) -> T {
        match self.order {
            SlopeOrder::SteepFirst => self.eps.sqrt(),
            SlopeOrder::ShallowFirst => -self.eps.sqrt(),
        }
    }

    /// Slope of the profile left or right of the kink.
    pub(crate) fn slope(&self, right: bool) -> T {
        let s = self.signed_root();
        if right {
            self.k - s
        } else {
            self.k + s
        }
    }

    pub(crate) fn profile(&self, x: T) -> T {
        if x <= self.kink() {
            self.slope(false) * x
        } else {
            self.slope(true) * x + self.signed_root() * self.width
        }
    }

    pub(crate) fn profile_inverse(&self, v: T) -> T {
        let at_kink = self.profile(self.kink());
        if v <= at_kink {
            v / self.slope(false)
        } else {
            (v - self.signed_root() * self.width) / self.slope(true)
        }
    }
}

/// Radial map `g^(eps)`: exponent `k - sqrt(eps)` on `[q, sqrt q]` (scaled by
/// `q^sqrt(eps)`), exponent `k + sqrt(eps)` on `[sqrt q, 1]`, optionally
/// twisted by the spiral factor `exp(iθ log|w| / log q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiecewiseRadialStretch<T> {
    pub(crate) q: T,
    pub(crate) k: T,
    pub(crate) eps: T,
    pub(crate) theta: T,
}

impl<T: Real> PiecewiseRadialStretch<T> {
    pub fn new(q: T, k: T, eps: T) -> Result<Self> {
        Self::twisted(q, k, eps, T::zero())
    }

    pub fn twisted(q: T, k: T, eps: T, theta: T) -> Result<Self> {
        check_q(q)?;
        check_eps(k, eps)?;
        check_theta(theta)?;
        Ok(Self { q, k, eps, theta })
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn k(&self) -> T {
        self.k
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn break_radius(&self) -> T {
        self.q.sqrt()
    }

    /// `(scale, exponent of |w| beyond the leading w)` on the chosen piece.
    pub(crate) fn piece(&self, outer: bool) -> (T, T) {
        let s = self.eps.sqrt();
        if outer {
            (T::one(), self.k - T::one() + s)
        } else {
            (self.q.powf(s), self.k - T::one() - s)
        }
    }

    /// Radial profile `r -> |g(r)|`.
    pub fn profile(&self, r: T) -> T {
        let (scale, a) = self.piece(r >= self.break_radius());
        scale * r.powf(a + T::one())
    }

    pub(crate) fn profile_inverse(&self, rho: T) -> T {
        let at_break = self.profile(self.break_radius());
        let outer = rho >= at_break;
        let (scale, a) = self.piece(outer);
        (rho / scale).powf(T::one() / (a + T::one()))
    }
}

/// `G(w) = log(w) / 2π + kl + inl` with `arg w` measured from the cut curve
/// `arg = (n / k) log|w|` (the image of `[q, 1]` under the matching
/// spiral-stretch), so `log 1 = 0` and `arg` lies in `[cut, cut + 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogCoordinatesG<T> {
    pub(crate) q: T,
    pub(crate) k: T,
    pub(crate) width: T,
    pub(crate) n: T,
}

impl<T: Real> LogCoordinatesG<T> {
    pub fn new(q: T, k: T, n: T) -> Result<Self> {
        check_q(q)?;
        Self::from_parts(q, k, rectangle_width(q), n)
    }

    /// Full parameter set; `width` must equal `log(1/q) / 2π`.
    pub fn from_parts(q: T, k: T, width: T, n: T) -> Result<Self> {
        check_q(q)?;
        check_positive("k", k)?;
        let expected = rectangle_width(q);
        if !((width - expected).abs() <= T::lit(1e-12) * expected) {
            return Err(invalid(
                "width",
                format!(
                    "width must equal log(1/q)/2pi = {}, got {}",
                    expected, width
                ),
            ));
        }
        if !n.is_finite() {
            return Err(invalid("n", "n must be finite"));
        }
        Ok(Self { q, k, width, n })
    }

    /// Coordinates matching `g_N` with parameters `(q, k, θ, N)`.
    pub fn matching(q: T, k: T, theta: T, turns: i32) -> Result<Self> {
        check_q(q)?;
        Self::new(q, k, matching_twist(q, theta, turns))
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn k(&self) -> T {
        self.k
    }

    pub fn width(&self) -> T {
        self.width
    }

    pub fn n(&self) -> T {
        self.n
    }

    /// Angular position of the cut at radius `r`.
    pub fn cut_angle(&self, r: T) -> T {
        self.n / self.k * r.ln()
    }

    pub(crate) fn offset(&self) -> Complex<T> {
        Complex::new(self.k * self.width, self.n * self.width)
    }
}

/// `z -> scale * exp(2πz)`: `scale = q` for the source annulus, `q^k` for the target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpCoordinates<T> {
    pub(crate) q: T,
    pub(crate) k: Option<T>,
}

impl<T: Real> ExpCoordinates<T> {
    pub fn source(q: T) -> Result<Self> {
        check_q(q)?;
        Ok(Self { q, k: None })
    }

    pub fn target(q: T, k: T) -> Result<Self> {
        check_q(q)?;
        check_positive("k", k)?;
        Ok(Self { q, k: Some(k) })
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn scale(&self) -> T {
        match self.k {
            Some(k) => self.q.powf(k),
            None => self.q,
        }
    }
}
