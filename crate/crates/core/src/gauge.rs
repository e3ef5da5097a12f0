//! Convex gauges `φ: [1, ∞) -> [1, ∞)` with `φ(1) = 1`, their right
//! derivatives and a declared curvature floor `c` (`φ'' >= c`).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{invalid, LabError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GaugeKind<T> {
    /// `φ(t) = t`.
    Linear,
    /// `φ(t) = t²`.
    Square,
    /// `φ(t) = t^p`, `p >= 1`.
    Power(T),
    /// `φ(t) = t + exp(-1/(t-1)²)`, all derivatives of the exponential term vanish at 1.
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexGauge<T> {
    kind: GaugeKind<T>,
    curvature_floor: T,
}

impl<T: Real> ConvexGauge<T> {
    pub fn linear() -> Self {
        Self::with_natural_floor(GaugeKind::Linear)
    }

    pub fn square() -> Self {
        Self::with_natural_floor(GaugeKind::Square)
    }

    pub fn power(p: T) -> Result<Self> {
        if !(p >= T::one()) || !p.is_finite() {
            return Err(invalid("p", format!("power gauge needs p >= 1, got {}", p)));
        }
        Ok(Self::with_natural_floor(GaugeKind::Power(p)))
    }

    pub fn flat() -> Self {
        Self::with_natural_floor(GaugeKind::Flat)
    }

    fn with_natural_floor(kind: GaugeKind<T>) -> Self {
        Self {
            kind,
            curvature_floor: natural_floor(kind),
        }
    }

    /// Replace the declared floor by a smaller one; a floor above
    /// `inf φ''` on `[1, ∞)` is rejected.
    pub fn with_curvature_floor(self, c: T) -> Result<Self> {
        let natural = natural_floor(self.kind);
        if !(c >= T::zero()) {
            return Err(invalid(
                "c",
                format!("curvature floor must be >= 0, got {}", c),
            ));
        }
        if c > natural {
            return Err(invalid(
                "c",
                format!(
                    "{} has curvature floor at most {}, got {}",
                    self, natural, c
                ),
            ));
        }
        Ok(Self {
            curvature_floor: c,
            ..self
        })
    }

    pub fn kind(&self) -> GaugeKind<T> {
        self.kind
    }

    pub fn curvature_floor(&self) -> T {
        self.curvature_floor
    }

    /// Whether `φ` is strictly convex on all of `[1, ∞)`.
    pub fn is_strictly_convex(&self) -> bool {
        match self.kind {
            GaugeKind::Square => true,
            GaugeKind::Power(p) => p > T::one(),
            // Flat bends the wrong way beyond t = 1 + sqrt(2/3).
            GaugeKind::Linear | GaugeKind::Flat => false,
        }
    }

    pub fn evaluate(&self, t: T) -> Result<T> {
        check_domain(t)?;
        Ok(match self.kind {
            GaugeKind::Linear => t,
            GaugeKind::Square => t * t,
            GaugeKind::Power(p) => t.powf(p),
            GaugeKind::Flat => t + flat_term(t),
        })
    }

    /// Right derivative `φ'₊(t)`.
    pub fn right_derivative(&self, t: T) -> Result<T> {
        check_domain(t)?;
        Ok(match self.kind {
            GaugeKind::Linear => T::one(),
            GaugeKind::Square => T::two() * t,
            GaugeKind::Power(p) => p * t.powf(p - T::one()),
            GaugeKind::Flat => {
                let u = t - T::one();
                if u == T::zero() {
                    T::one()
                } else {
                    T::one() + T::two() * flat_term(t) / (u * u * u)
                }
            }
        })
    }

    /// Second derivative where it exists (everywhere on `[1, ∞)` for these gauges).
    pub fn second_derivative(&self, t: T) -> Result<T> {
        check_domain(t)?;
        Ok(match self.kind {
            GaugeKind::Linear => T::zero(),
            GaugeKind::Square => T::two(),
            GaugeKind::Power(p) => p * (p - T::one()) * t.powf(p - T::two()),
            GaugeKind::Flat => {
                let u = t - T::one();
                if u == T::zero() {
                    T::zero()
                } else {
                    let u2 = u * u;
                    let u4 = u2 * u2;
                    (T::lit(4.0) / (u4 * u2) - T::lit(6.0) / u4) * flat_term(t)
                }
            }
        })
    }

    /// `φ(t) - φ(s) - φ'₊(s)(t - s) - (c/2)(t - s)²` with the declared floor `c`.
    pub fn taylor_gap(&self, s: T, t: T) -> Result<T> {
        let d = t - s;
        Ok(self.evaluate(t)?
            - self.evaluate(s)?
            - self.right_derivative(s)? * d
            - self.curvature_floor * T::half() * d * d)
    }
}

fn natural_floor<T: Real>(kind: GaugeKind<T>) -> T {
    match kind {
        GaugeKind::Square => T::two(),
        GaugeKind::Power(p) if p >= T::two() => p * (p - T::one()),
        _ => T::zero(),
    }
}

fn check_domain<T: Real>(t: T) -> Result<()> {
    if t >= T::one() && t.is_finite() {
        Ok(())
    } else {
        Err(LabError::Domain(format!(
            "gauges are defined on [1, inf), got t = {}",
            t
        )))
    }
}

fn flat_term<T: Real>(t: T) -> T {
    let u = t - T::one();
    if u == T::zero() {
        T::zero()
    } else {
        (-T::one() / (u * u)).exp()
    }
}

impl<T: Real> fmt::Display for ConvexGauge<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GaugeKind::Linear => write!(f, "linear"),
            GaugeKind::Square => write!(f, "square"),
            GaugeKind::Power(p) => write!(f, "power:{}", p),
            GaugeKind::Flat => write!(f, "flat"),
        }
    }
}

/// Parses `linear`, `square`, `power:p` or `flat`.
impl<T: Real> FromStr for ConvexGauge<T> {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "linear" => Ok(Self::linear()),
            "square" => Ok(Self::square()),
            "flat" => Ok(Self::flat()),
            other => match other.strip_prefix("power:") {
                Some(p) => {
                    let p: f64 = p
                        .parse()
                        .map_err(|_| invalid("gauge", format!("bad exponent in '{}'", other)))?;
                    Self::power(T::lit(p))
                }
                None => Err(invalid(
                    "gauge",
                    format!("unknown gauge '{}' (linear|square|power:p|flat)", other),
                )),
            },
        }
    }
}

/// `Θ(z) = (Im z)² / (2|z|)` with `Θ(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaCheck<T> {
    pub theta: T,
    /// `Θ(z) - (|z| - Re z)`; never positive, since `|z| - Re z >= Θ(z)`.
    pub gap_real_part: T,
    /// `2Θ(z)|z| - (Im z)²`; zero up to rounding.
    pub gap_imaginary_part: T,
}

pub fn theta_check<T: Real>(z: Complex<T>) -> ThetaCheck<T> {
    let r = z.norm();
    let theta = if r == T::zero() {
        T::zero()
    } else {
        z.im * z.im / (T::two() * r)
    };
    ThetaCheck {
        theta,
        gap_real_part: theta - (r - z.re),
        gap_imaginary_part: T::two() * theta * r - z.im * z.im,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all() -> Vec<ConvexGauge<f64>> {
        vec![
            ConvexGauge::linear(),
            ConvexGauge::square(),
            ConvexGauge::power(1.5).unwrap(),
            ConvexGauge::power(3.0).unwrap(),
            ConvexGauge::flat(),
        ]
    }

    #[test]
    fn values() {
        assert_eq!(ConvexGauge::<f64>::square().evaluate(1.0).unwrap(), 1.0);
        let flat = ConvexGauge::<f64>::flat();
        assert_eq!(flat.evaluate(1.0).unwrap(), 1.0);
        assert!((flat.evaluate(2.0).unwrap() - (2.0 + (-1.0f64).exp())).abs() < 1e-15);
        assert_eq!(ConvexGauge::<f64>::linear().evaluate(3.7).unwrap(), 3.7);
        for g in all() {
            assert_eq!(g.evaluate(1.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn right_derivatives() {
        assert_eq!(
            ConvexGauge::<f64>::square().right_derivative(3.0).unwrap(),
            6.0
        );
        assert_eq!(
            ConvexGauge::<f64>::flat().right_derivative(1.0).unwrap(),
            1.0
        );
        assert_eq!(
            ConvexGauge::<f64>::linear().right_derivative(17.0).unwrap(),
            1.0
        );
        for g in all() {
            for t in [1.2, 2.0, 5.0] {
                let h = 1e-6;
                let fd = (g.evaluate(t + h).unwrap() - g.evaluate(t - h).unwrap()) / (2.0 * h);
                assert!((fd - g.right_derivative(t).unwrap()).abs() < 1e-6 * fd.abs().max(1.0));
                let fd2 = (g.right_derivative(t + h).unwrap() - g.right_derivative(t - h).unwrap())
                    / (2.0 * h);
                assert!((fd2 - g.second_derivative(t).unwrap()).abs() < 1e-5 * fd2.abs().max(1.0));
            }
        }
    }

    #[test]
    fn domain_errors() {
        for g in all() {
            assert!(matches!(g.evaluate(0.99), Err(LabError::Domain(_))));
            assert!(matches!(g.right_derivative(0.5), Err(LabError::Domain(_))));
            assert!(g.taylor_gap(0.5, 2.0).is_err());
        }
    }

    #[test]
    fn exact_taylor_gaps() {
        let sq = ConvexGauge::<f64>::square();
        let lin = ConvexGauge::<f64>::linear();
        for (s, t) in [(1.0, 4.0), (3.5, 1.25), (2.0, 2.0)] {
            assert!(sq.taylor_gap(s, t).unwrap().abs() < 1e-12);
            assert_eq!(lin.taylor_gap(s, t).unwrap(), 0.0);
        }
        let flat_gap = ConvexGauge::<f64>::flat().taylor_gap(1.5, 2.5).unwrap();
        let oracle = (2.5 + (-1.0f64 / 2.25).exp())
            - (1.5 + (-4.0f64).exp())
            - (1.0 + 16.0 * (-4.0f64).exp());
        assert!((flat_gap - oracle).abs() < 1e-14);
        assert!(flat_gap > 0.0);
    }

    #[test]
    fn flat_loses_convexity_past_inflection() {
        let flat = ConvexGauge::<f64>::flat();
        let inflection = 1.0 + (2.0f64 / 3.0).sqrt();
        assert!(flat.second_derivative(inflection - 0.01).unwrap() > 0.0);
        assert!(flat.second_derivative(inflection + 0.01).unwrap() < 0.0);
        assert!((flat.second_derivative(2.0).unwrap() + 2.0 * (-1.0f64).exp()).abs() < 1e-14);
        // φ'₊ increases up to the inflection point, then decreases towards 1.
        let d = |t: f64| flat.right_derivative(t).unwrap();
        assert!(d(1.2) < d(1.5) && d(1.5) < d(inflection));
        assert!(d(inflection) > d(3.0) && d(3.0) > d(50.0));
        assert!(!flat.is_strictly_convex());
        assert!(flat.taylor_gap(2.0, 10.0).unwrap() < 0.0);
    }

    #[test]
    fn curvature_floors() {
        assert_eq!(ConvexGauge::<f64>::square().curvature_floor(), 2.0);
        assert_eq!(ConvexGauge::power(3.0f64).unwrap().curvature_floor(), 6.0);
        assert_eq!(ConvexGauge::power(1.5f64).unwrap().curvature_floor(), 0.0);
        assert_eq!(ConvexGauge::<f64>::flat().curvature_floor(), 0.0);
        assert!(ConvexGauge::<f64>::flat()
            .with_curvature_floor(0.1)
            .is_err());
        assert!(ConvexGauge::<f64>::square()
            .with_curvature_floor(1.0)
            .is_ok());
        assert!(ConvexGauge::power(0.5f64).is_err());
    }

    #[test]
    fn parsing() {
        assert_eq!(
            "square".parse::<ConvexGauge<f64>>().unwrap(),
            ConvexGauge::square()
        );
        assert_eq!(
            "power:2.5".parse::<ConvexGauge<f64>>().unwrap(),
            ConvexGauge::power(2.5).unwrap()
        );
        assert!("power:x".parse::<ConvexGauge<f64>>().is_err());
        assert!("cubic".parse::<ConvexGauge<f64>>().is_err());
        assert_eq!(
            ConvexGauge::<f64>::power(2.5).unwrap().to_string(),
            "power:2.5"
        );
    }

    #[test]
    fn theta_examples() {
        let one = theta_check(Complex::new(1.0f64, 0.0));
        assert_eq!(
            (one.theta, one.gap_real_part, one.gap_imaginary_part),
            (0.0, 0.0, 0.0)
        );
        let i = theta_check(Complex::new(0.0f64, 1.0));
        assert_eq!(i.theta, 0.5);
        assert_eq!(i.gap_real_part, 0.5 - 1.0);
        assert_eq!(i.gap_imaginary_part, 0.0);
        let z = theta_check(Complex::new(3.0f64, 4.0));
        assert!((z.theta - 1.6).abs() < 1e-15);
        assert!((z.gap_real_part - (1.6 - 2.0)).abs() < 1e-15);
        assert!(z.gap_imaginary_part.abs() < 1e-12);
        assert_eq!(theta_check(Complex::new(0.0f64, 0.0)).theta, 0.0);
    }

    proptest! {
        #[test]
        fn taylor_gap_nonnegative_for_convex_gauges(s in 1.0..50.0f64, t in 1.0..50.0f64, p in 2.0..4.0f64) {
            for g in [ConvexGauge::linear(), ConvexGauge::square(), ConvexGauge::power(p).unwrap()] {
                let gap = g.taylor_gap(s, t).unwrap();
                prop_assert!(gap >= -1e-12 * g.evaluate(s.max(t)).unwrap().max(1.0), "{} {} {} {}", g, s, t, gap);
            }
        }

        #[test]
        fn flat_taylor_gap_nonnegative_where_convex(s in 1.0..1.8f64, t in 1.0..1.8f64) {
            prop_assert!(ConvexGauge::flat().taylor_gap(s, t).unwrap() >= -1e-12);
        }

        #[test]
        fn theta_inequalities(x in -10.0..10.0f64, y in -10.0..10.0f64) {
            let z = Complex::new(x, y);
            let r = theta_check(z);
            let scale = z.norm().max(1.0);
            prop_assert!(r.gap_imaginary_part >= -1e-12 * scale * scale);
            // |z| - Re z >= |z| - |Re z| >= Θ(z): the bound runs this way round.
            prop_assert!(r.gap_real_part <= 1e-12 * scale);
            if x >= 0.0 {
                prop_assert!(2.0 * r.theta >= (z.norm() - x) - 1e-12 * scale);
            }
        }
    }
}
