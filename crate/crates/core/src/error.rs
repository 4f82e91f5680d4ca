use thiserror::Error;

/// Errors raised across the crate.
///
/// Variants follow the failure classes of the individual modules so callers
/// (the CLI in particular) can map them onto exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("array too small: {0}")]
    Size(String),
    #[error("unknown site {0}")]
    Lookup(usize),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("schedule infeasible: {0}")]
    ScheduleInfeasible(String),
    #[error("singular resonance: K is nonzero while L is zero")]
    SingularResonance,
    #[error("undefined ratio: D-state rate is zero")]
    UndefinedRatio,
    #[error("invalid configuration: {0}")]
    Configuration(String),
}

pub type Result<T> = std::result::Result<T, Error>;
