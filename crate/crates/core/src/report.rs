//! Error reports shared by every protocol in the crate.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Slack allowed when comparing a computed error with its analytic bound.
pub const BOUND_TOL: f64 = 1e-10;

/// The analytic inequality a report is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Cyclic-shift catalyst: `2/sqrt(n+1)`.
    CatalystShift,
    /// Trace norm of a marginal after a catalyst shift: `min(2, 4/sqrt(n+1))`.
    MarginalTrace,
    /// Cover-approximated catalyst: `2/sqrt(n_k+1) + d_i + d_j`.
    CoverComposed,
    /// Diagonal catalyst shift: `2/(n-1)`.
    DiagonalShift,
    /// Polar lift of a contraction: `6*sqrt(2*eps) + 2*gap`.
    PolarLift,
}

impl BoundKind {
    /// Stable name used in report headers.
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::CatalystShift => "catalyst_shift",
            BoundKind::MarginalTrace => "marginal_trace",
            BoundKind::CoverComposed => "cover_composed",
            BoundKind::DiagonalShift => "diagonal_shift",
            BoundKind::PolarLift => "polar_lift",
        }
    }

    pub fn formula(self) -> &'static str {
        match self {
            BoundKind::CatalystShift => "2/sqrt(n+1)",
            BoundKind::MarginalTrace => "min(2, 4/sqrt(n+1))",
            BoundKind::CoverComposed => "2/sqrt(n_k+1) + d_i + d_j",
            BoundKind::DiagonalShift => "2/(n-1)",
            BoundKind::PolarLift => "6*sqrt(2*eps) + 2*gap",
        }
    }
}

/// How the error was achieved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub description: String,
    pub phase: C64,
    /// Parties whose sites are cyclically shifted.
    pub shifted_parties: Vec<usize>,
    /// Number of sites per shifted party (the cycle length).
    pub cycle_length: usize,
    /// Family level (1-based counting index) when the protocol uses a family.
    pub level: Option<usize>,
    /// Cover indices `(source, target)` of the instantiated pair factor.
    pub pair: Option<(u128, u128)>,
}

impl Protocol {
    pub fn cyclic(description: impl Into<String>, phase: C64, shifted_parties: Vec<usize>, cycle_length: usize) -> Self {
        Protocol {
            description: description.into(),
            phase,
            shifted_parties,
            cycle_length,
            level: None,
            pair: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub exact_error: f64,
    pub analytic_bound: f64,
    pub bound: BoundKind,
    pub protocol: Protocol,
    /// The same error evaluated by an independent route (closed form or
    /// dense simulation), when one is available.
    pub reference_error: Option<f64>,
}

impl ErrorReport {
    pub fn within_bound(&self) -> bool {
        self.exact_error <= self.analytic_bound + BOUND_TOL
    }
}
