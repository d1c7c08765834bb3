use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid Young function: {0}")]
    Validation(String),

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("t = {t} lies outside the finite domain [0, {end}]")]
    Domain { t: f64, end: f64 },

    #[error("oracle scale exceeded: {what} = {found} > {limit}")]
    Scale {
        what: &'static str,
        limit: usize,
        found: usize,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("membership violated: {0}")]
    Membership(String),

    #[error("tolerance not met: {0}")]
    Tolerance(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
