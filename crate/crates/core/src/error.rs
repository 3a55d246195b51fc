use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not normal (commutator norm {defect:e})")]
    NotNormal { defect: f64 },

    #[error("family is not pairwise commuting (members {first} and {second})")]
    NotCommuting { first: usize, second: usize },

    #[error("iteration budget of {sweeps} sweeps exhausted")]
    NoConvergence { sweeps: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unknown atom `{0}`")]
    UnknownAtom(String),

    #[error("function undefined on non-null atom {atom}")]
    UndefinedOnSupport { atom: usize },

    #[error("argument {modulus} lies outside the open unit disc")]
    OutOfDisc { modulus: f64 },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid spectral measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid algebra basis: {0}")]
    InvalidAlgebra(String),

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("infeasible instance: {0}")]
    InfeasibleSpec(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
