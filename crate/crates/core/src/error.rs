use alloc::string::String;

/// Errors raised by scenario construction, inference and training.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{users} users requested but only {pool} distinct pilot sequences exist")]
    PilotCapacity { users: usize, pool: usize },

    #[error("failed to construct a regular spreading matrix after {attempts} attempts")]
    Generation { attempts: usize },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("numerical domain error in {0}")]
    NumericalDomain(&'static str),

    #[error("normal matrix of size {size} is not positive definite")]
    Singular { size: usize },

    #[error("training diverged at epoch {epoch}: loss {loss} exceeds 10x the initial loss {initial}")]
    Diverged { epoch: usize, loss: f64, initial: f64 },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
