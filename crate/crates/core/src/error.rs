use thiserror::Error;

use crate::flow::Trajectory;

/// Errors raised by the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A metric coordinate was zero, negative or not finite. The index is 1-based.
    #[error("coordinate x{0} must be strictly positive")]
    NonPositiveCoordinate(usize),

    #[error("invalid space parameters: {0}")]
    InvalidParams(String),

    #[error("module dimensions d1, d2, d3 are required for this operation")]
    MissingDimensions,

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("Kähler curves are separatrices only at a = 1/6 (got a = {a}); pass an override to sample anyway")]
    KahlerOnlyAtOneSixth { a: f64 },

    #[error("point is not an equilibrium: field norm {norm:e}")]
    NotAnEquilibrium { norm: f64 },

    #[error("invalid integrator options: {0}")]
    InvalidOptions(String),

    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Integration failures. Both variants keep the part of the trajectory
/// computed before the failure.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum FlowError {
    #[error("adaptive step size underflow at t = {t} (h = {h:e})")]
    StepFailure {
        t: f64,
        h: f64,
        partial: Box<Trajectory>,
    },

    #[error("trajectory left the coordinate window [1e-12, 1e12] at t = {t}")]
    BlowUp { t: f64, partial: Box<Trajectory> },
}

impl FlowError {
    pub fn partial(&self) -> &Trajectory {
        match self {
            FlowError::StepFailure { partial, .. } | FlowError::BlowUp { partial, .. } => partial,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
