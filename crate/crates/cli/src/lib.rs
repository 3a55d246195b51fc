//! Batch front end for `pvm-algebra`: named-object JSON documents in,
//! text or JSON reports out, outcomes encoded in the exit code.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success; the set generates; the family separates |
//! | 1 | does not generate; not separating; campaign failures |
//! | 2 | schema violation in the input document or flags |
//! | 3 | a mathematical invariant failed (the message names it) |
//! | 4 | criterion and bicommutant oracle disagree |
//! | 5 | the matrix is not normal |

pub mod commands;
pub mod document;

use pvm_algebra::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_DISAGREEMENT: i32 = 4;
pub const EXIT_NOT_NORMAL: i32 = 5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invariant violated: {0}")]
    Invariant(Error),
    #[error("{0}")]
    NotNormal(Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) | CliError::Io(_) => EXIT_SCHEMA,
            CliError::Invariant(_) => EXIT_INVARIANT,
            CliError::NotNormal(_) => EXIT_NOT_NORMAL,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotNormal { .. } => CliError::NotNormal(e),
            Error::DimensionMismatch { .. }
            | Error::UnknownAtom(_)
            | Error::InvalidInput(_)
            | Error::InvalidTolerance(_)
            | Error::InfeasibleSpec(_) => CliError::Schema(e.to_string()),
            other => CliError::Invariant(other),
        }
    }
}
