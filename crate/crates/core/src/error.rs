use thiserror::Error;

pub type Result<T> = std::result::Result<T, StamError>;

#[derive(Debug, Error)]
pub enum StamError {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite gradient of component {component}")]
    NonFiniteComponent { component: usize },

    #[error("iterate diverged at iteration {iteration}: {what} is not finite")]
    Divergence { iteration: usize, what: &'static str },

    #[error("missing or invalid configuration: {0}")]
    Config(String),

    #[error("no valid step size: {0}")]
    NoValidGamma(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl StamError {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        StamError::Argument(msg.into())
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(StamError::Dimension {
            what,
            expected,
            got,
        });
    }
    Ok(())
}
