use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0}")]
    InvalidParameter(String),

    #[error("parameters outside the blow-up region: {0}")]
    RegionViolation(String),

    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error("degenerate initial data: {0}")]
    DegenerateData(String),

    #[error("nonpositive constant {name} = {value}")]
    NonpositiveConstant { name: &'static str, value: f64 },

    #[error("eps = {eps} exceeds the smallness threshold eps0 = {eps0}")]
    EpsilonTooLarge { eps: f64, eps0: f64 },

    #[error("CFL number {0} outside (0, 0.5]")]
    CflViolation(f64),

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("insufficient blow-ups: {0}")]
    InsufficientBlowups(String),

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence(_) | Error::CflViolation(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
