//! Crate-wide error type.

use std::fmt;

/// Errors surfaced by the library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Input rejected before any computation ran: domain violation,
    /// dimension mismatch, malformed configuration.
    Rejected(String),
    /// Operation called out of order: horizon exhausted, stream length
    /// mismatch.
    Sequencing(String),
    /// Potential gradient summed to (numerically) zero where a strictly
    /// positive sum was required.
    DegenerateGradient,
    /// The requested computation exceeds the enumeration budget.
    BudgetExceeded { needed: u64, budget: u64 },
    /// A per-round inequality the regret bound relies on was violated;
    /// the run is aborted rather than continued with a broken certificate.
    InvariantViolation {
        round: usize,
        check: &'static str,
        value: f64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Rejected(msg) => write!(f, "rejected input: {msg}"),
            Error::Sequencing(msg) => write!(f, "sequencing error: {msg}"),
            Error::DegenerateGradient => write!(f, "potential gradient has zero sum"),
            Error::BudgetExceeded { needed, budget } => {
                write!(f, "budget exceeded: needs ~{needed} nodes, budget {budget}")
            }
            Error::InvariantViolation {
                round,
                check,
                value,
            } => {
                write!(
                    f,
                    "round {round}: {check} inequality violated (value {value:e})"
                )
            }
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
