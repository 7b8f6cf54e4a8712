use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("row {0} is already removed")]
    AlreadyRemoved(usize),

    #[error("row {0} is not removed")]
    NotRemoved(usize),

    #[error("LP solver failure: {0}")]
    Solver(String),

    #[error("LP is {0:?}; elastic models are feasible and bounded by construction")]
    UnexpectedStatus(crate::lp::Status),

    #[error("no candidates left while Z = {0} is still positive")]
    NoCandidates(f64),

    #[error("iteration cap of {0} exceeded")]
    IterationCap(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by the caller's data rather than the solver.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::Parse { .. }
                | Error::AlreadyRemoved(_)
                | Error::NotRemoved(_)
                | Error::Io(_)
                | Error::Csv(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
