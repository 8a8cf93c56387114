use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the operation's domain (bad shape, empty input,
    /// non-finite value, invalid parameter).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite value in {context} at iteration {iteration}")]
    Numerical { context: &'static str, iteration: usize },

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("all {0} dictionary atoms are already selected")]
    Exhausted(usize),

    #[error("boosting iteration {iteration}: {source}")]
    Boosting {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
