use thiserror::Error;

use crate::case_io::CaseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Case(#[from] CaseError),

    #[error("branch {from}-{to} has zero impedance (r = x = 0)")]
    SingularBranch { from: u32, to: u32 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("LP backend `{backend}` failed: {message}")]
    Backend { backend: String, message: String },

    #[error("LP relaxation infeasible at round {round}; check the case data")]
    Infeasible { round: usize },

    #[error("LP relaxation unbounded at round {round}")]
    Unbounded { round: usize },

    #[error("unknown row id {0}")]
    UnknownRow(u64),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("cut file, record {record}: {message}")]
    CutFile { record: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the error stems from input data rather than the solver.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Case(_) | Error::SingularBranch { .. } | Error::CutFile { .. } | Error::Infeasible { .. } | Error::Io(_)
        )
    }
}
