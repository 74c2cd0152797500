use thiserror::Error;

/// Errors raised by model construction and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("growth rate a[{species}] = {value} must be positive")]
    NonPositiveGrowth { species: usize, value: f64 },

    #[error("harvest capacity tau[{species}] = {value} must be positive")]
    NonPositiveHarvestCapacity { species: usize, value: f64 },

    #[error("diffusion coefficient D[{species}] = {value} must be non-negative")]
    NegativeDiffusion { species: usize, value: f64 },

    #[error("self-interaction b[{species}][{species}] = {value} must be positive")]
    NonPositiveSelfInteraction { species: usize, value: f64 },

    #[error("interaction b[{row}][{col}] = {value} must be non-negative")]
    NegativeInteraction { row: usize, col: usize, value: f64 },

    #[error("non-finite model parameter {name}")]
    NonFiniteParameter { name: &'static str },

    #[error("symmetrized interaction matrix is singular (condition estimate {condition:e})")]
    SingularSymmetrizedMatrix { condition: f64 },

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("negative density {value} for species {species}")]
    NegativeDensity { species: usize, value: f64 },

    #[error("trajectory is empty")]
    EmptyTrajectory,

    #[error("non-finite state at t = {time}")]
    NonFiniteState { time: f64 },

    #[error(
        "inner iteration did not converge: residual {residual:e} after {iterations} iterations"
    )]
    InnerIterationDiverged { iterations: usize, residual: f64 },

    #[error("zero pivot in linear solve at row {row}")]
    LinearSolveFailure { row: usize },

    #[error("time step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Strips any [`Error::Step`] wrapping.
    pub fn root(&self) -> &Error {
        match self {
            Error::Step { source, .. } => source.root(),
            other => other,
        }
    }

    /// `true` for failures of the numerical schemes as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self.root(),
            Error::NegativeDensity { .. }
                | Error::NonFiniteState { .. }
                | Error::InnerIterationDiverged { .. }
                | Error::LinearSolveFailure { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
