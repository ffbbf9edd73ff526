use thiserror::Error;

use crate::expr::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad parameters, unparsable expressions, malformed requests.
    Input,
    /// A solver or quadrature failed to converge.
    Numerical,
    /// The physics has no answer here: no bound states, no cut, singular point.
    Domain,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("domain violation at {at}: {reason}")]
    DomainViolation { at: f64, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid bracket [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    InvalidBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("no convergence after {iterations} iterations (last estimate {estimate})")]
    NoConvergence { iterations: usize, estimate: f64 },

    #[error("degenerate turning point near {at}")]
    DegenerateRoot { at: f64 },

    #[error("integrand negative inside cut at {at} (value {value})")]
    InvalidCut { at: f64, value: f64 },

    #[error("non-finite value at {at}")]
    NonFinite { at: f64 },

    #[error("no classically allowed region at E = {energy}")]
    NoCuts { energy: f64 },

    #[error("classically allowed region reaches the window edge {edge} at E = {energy}; no bound state")]
    Unbounded { energy: f64, edge: f64 },

    #[error("no bound states: {0}")]
    NoBoundStates(String),

    #[error("expected {expected} cut(s), found {found} at E = {energy}")]
    CutCountMismatch {
        expected: usize,
        found: usize,
        energy: f64,
    },

    #[error("phase mismatch: phi2 - phi1 = {actual}, expected {expected}")]
    PhaseInconsistent { actual: f64, expected: f64 },

    #[error("unphysical level: {0}")]
    Unphysical(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("index mismatch: {0}")]
    IndexMismatch(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse(_)
            | Error::InvalidParameter(_)
            | Error::InvalidBracket { .. }
            | Error::IndexMismatch(_)
            | Error::Grid(_) => ErrorKind::Input,
            Error::NoConvergence { .. } | Error::PhaseInconsistent { .. } | Error::NonFinite { .. } => {
                ErrorKind::Numerical
            }
            Error::DomainViolation { .. }
            | Error::DegenerateRoot { .. }
            | Error::InvalidCut { .. }
            | Error::NoCuts { .. }
            | Error::Unbounded { .. }
            | Error::NoBoundStates(_)
            | Error::CutCountMismatch { .. }
            | Error::Unphysical(_) => ErrorKind::Domain,
        }
    }

    /// Short machine-readable tag for structured error output.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse",
            Error::DomainViolation { .. } => "domain_violation",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::InvalidBracket { .. } => "invalid_bracket",
            Error::NoConvergence { .. } => "no_convergence",
            Error::DegenerateRoot { .. } => "degenerate_root",
            Error::InvalidCut { .. } => "invalid_cut",
            Error::NonFinite { .. } => "non_finite",
            Error::NoCuts { .. } => "no_cuts",
            Error::Unbounded { .. } => "unbounded",
            Error::NoBoundStates(_) => "no_bound_states",
            Error::CutCountMismatch { .. } => "cut_count_mismatch",
            Error::PhaseInconsistent { .. } => "phase_inconsistent",
            Error::Unphysical(_) => "unphysical",
            Error::Grid(_) => "grid",
            Error::IndexMismatch(_) => "index_mismatch",
        }
    }
}

impl From<EvalError> for Error {
    fn from(e: EvalError) -> Self {
        Error::DomainViolation {
            at: e.point,
            reason: e.reason.to_string(),
        }
    }
}
