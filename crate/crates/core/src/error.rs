use thiserror::Error;

/// Errors raised by the model, trajectory and perturbation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    Validation { field: &'static str, reason: String },

    #[error("position x = {x} lies outside the well interior [-{q}, {q}]")]
    Domain { x: f64, q: f64 },

    #[error("time offset {offset} lies outside the window [{lo}, {hi}] of {context}")]
    Window {
        context: &'static str,
        offset: f64,
        lo: f64,
        hi: f64,
    },

    #[error(
        "microstate (a = {a}, b = {b}, c = {c}) has a time map that is not monotone \
         on the well interior (margin {margin:.3e})"
    )]
    NonMonotoneTrajectory { a: f64, b: f64, c: f64, margin: f64 },

    #[error("degenerate {context}: {detail}")]
    Degenerate { context: &'static str, detail: String },

    #[error("root finder did not converge after {iterations} iterations: {detail}")]
    RootFinding { iterations: usize, detail: String },

    #[error("quadrature did not reach tolerance {tol:e} within depth {max_depth}")]
    Quadrature { tol: f64, max_depth: usize },

    #[error("finite-difference step {step} crosses a window edge: {detail}")]
    Step { step: f64, detail: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("sample {index}: {source}")]
    Sample {
        index: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn validation(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn degenerate(context: &'static str, detail: impl Into<String>) -> Self {
        Error::Degenerate {
            context,
            detail: detail.into(),
        }
    }

    /// True for errors caused by bad caller input rather than by numerics.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Validation { .. }
            | Error::Domain { .. }
            | Error::Window { .. }
            | Error::NonMonotoneTrajectory { .. }
            | Error::Input(_) => true,
            Error::Sample { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
