use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{AuditReport, Relation};
use crate::error::{invalid, Result};
use crate::gauge::{theta_check, ConvexGauge};

/// Gaps down to `-1e-12` count as nonnegative.
pub const SWEEP_TOLERANCE: f64 = 1e-12;

const TAYLOR_RANGE: (f64, f64) = (1.0, 50.0);
const THETA_BOX: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaylorSweep {
    pub gauge: String,
    pub curvature_floor: f64,
    pub samples: usize,
    pub seed: u64,
    pub min_gap: f64,
    /// `(s, t)` attaining `min_gap`.
    pub worst: (f64, f64),
    pub violations: usize,
    pub pass: bool,
}

/// `taylor_gap` on `samples` uniform pairs in `[1, 50]²`.
pub fn taylor_sweep(gauge: &ConvexGauge<f64>, samples: usize, seed: u64) -> Result<TaylorSweep> {
    if samples == 0 {
        return Err(invalid("samples", "at least one sample is required"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_gap = f64::INFINITY;
    let mut worst = (1.0, 1.0);
    let mut violations = 0;
    for _ in 0..samples {
        let s = rng.gen_range(TAYLOR_RANGE.0..=TAYLOR_RANGE.1);
        let t = rng.gen_range(TAYLOR_RANGE.0..=TAYLOR_RANGE.1);
        let gap = gauge.taylor_gap(s, t)?;
        if gap < -SWEEP_TOLERANCE {
            violations += 1;
        }
        if gap < min_gap {
            min_gap = gap;
            worst = (s, t);
        }
    }
    Ok(TaylorSweep {
        gauge: gauge.to_string(),
        curvature_floor: gauge.curvature_floor(),
        samples,
        seed,
        min_gap,
        worst,
        violations,
        pass: violations == 0,
    })
}

impl TaylorSweep {
    /// The sweep as an audit of `min_gap >= -1e-12`.
    pub fn report(&self) -> AuditReport {
        AuditReport::new("taylor", Relation::AtLeast, self.min_gap, -SWEEP_TOLERANCE)
            .constant("c", self.curvature_floor)
            .constant("samples", self.samples as f64)
            .constant("seed", self.seed as f64)
            .constant("worst_s", self.worst.0)
            .constant("worst_t", self.worst.1)
            .constant("violations", self.violations as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaSweep {
    pub samples: usize,
    pub seed: u64,
    /// Smallest `Θ(z) - (|z| - Re z)` over samples with `Re z >= 0`.
    pub min_gap_real_part: f64,
    pub worst_real_part: (f64, f64),
    /// Smallest `2Θ(z)|z| - (Im z)²` over all samples.
    pub min_gap_imaginary_part: f64,
    pub pass: bool,
}

impl ThetaSweep {
    /// The sweep as an audit of `min(gaps) >= -1e-12`.
    pub fn report(&self) -> AuditReport {
        let lhs = self.min_gap_real_part.min(self.min_gap_imaginary_part);
        AuditReport::new("theta", Relation::AtLeast, lhs, -SWEEP_TOLERANCE)
            .constant("samples", self.samples as f64)
            .constant("seed", self.seed as f64)
            .constant("min_gap_real_part", self.min_gap_real_part)
            .constant("min_gap_imaginary_part", self.min_gap_imaginary_part)
            .constant("worst_re", self.worst_real_part.0)
            .constant("worst_im", self.worst_real_part.1)
    }
}

/// `theta_check` on `samples` uniform points of `[-4, 4]²`; the first gap is
/// taken on the reflected point with `Re z >= 0`.
pub fn theta_sweep(samples: usize, seed: u64) -> Result<ThetaSweep> {
    if samples == 0 {
        return Err(invalid("samples", "at least one sample is required"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_real = f64::INFINITY;
    let mut worst_real = (0.0, 0.0);
    let mut min_imag = f64::INFINITY;
    for _ in 0..samples {
        let z = Complex::new(
            rng.gen_range(-THETA_BOX..=THETA_BOX),
            rng.gen_range(-THETA_BOX..=THETA_BOX),
        );
        min_imag = min_imag.min(theta_check(z).gap_imaginary_part);
        let right = Complex::new(z.re.abs(), z.im);
        let g = theta_check(right).gap_real_part;
        if g < min_real {
            min_real = g;
            worst_real = (right.re, right.im);
        }
    }
    Ok(ThetaSweep {
        samples,
        seed,
        min_gap_real_part: min_real,
        worst_real_part: worst_real,
        min_gap_imaginary_part: min_imag,
        pass: min_real >= -SWEEP_TOLERANCE && min_imag >= -SWEEP_TOLERANCE,
    })
}
