//! End-to-end experiments on the example families: inequality audits, the
//! alignment angle, and epsilon ladders with a log-log exponent fit.
//!
//! Everything here is concrete `f64`; the reports serialise as they stand.

mod audits;
mod ladder;
mod sweeps;

pub use audits::{
    alpha_star, audit_alignment, audit_gn_gap, audit_k_l2, audit_k_mean, AlignmentReport, AlphaStar,
};
pub use ladder::{
    operational_eps0, run_flat_gauge_ladder, run_ladder, FitReport, FlatLadderReport,
    FlatLadderRow, LadderConfig, LadderRow, FLAT_REGIME_THRESHOLD,
};
pub use sweeps::{taylor_sweep, theta_sweep, TaylorSweep, ThetaSweep, SWEEP_TOLERANCE};

use serde::Serialize;

/// Relative slack allowed on `lhs <= rhs` audits.
pub const AUDIT_SLACK: f64 = 1e-8;

/// Smallest gap accepted by [`Relation::GapAbove`] audits.
pub const MIN_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `lhs <= rhs (1 + 1e-8)`.
    AtMost,
    /// `lhs >= rhs`.
    AtLeast,
    /// `lhs - rhs > threshold`.
    GapAbove(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub lemma: String,
    pub relation: Relation,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, NaN when `rhs = 0`.
    pub ratio: f64,
    pub pass: bool,
    pub constants: Vec<(String, f64)>,
    pub notes: Vec<String>,
}

impl AuditReport {
    pub(crate) fn new(lemma: &str, relation: Relation, lhs: f64, rhs: f64) -> Self {
        let pass = match relation {
            Relation::AtMost => lhs <= rhs * (1.0 + AUDIT_SLACK),
            Relation::AtLeast => lhs >= rhs,
            Relation::GapAbove(t) => lhs - rhs > t,
        };
        Self {
            lemma: lemma.to_string(),
            relation,
            lhs,
            rhs,
            ratio: if rhs == 0.0 { f64::NAN } else { lhs / rhs },
            pass,
            constants: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub(crate) fn constant(mut self, name: &str, value: f64) -> Self {
        self.constants.push((name.to_string(), value));
        self
    }

    pub(crate) fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }

    pub fn get_constant(&self, name: &str) -> Option<f64> {
        self.constants
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }
}

#[cfg(test)]
mod tests;
