use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator dimension must be at least 1")]
    EmptyOperator,

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian: |a[{row}][{col}] - conj(a[{col}][{row}])| = {deviation:e}")]
    NotHermitian {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("eigensolver failed to converge on a {dim}x{dim} matrix")]
    EigenFailed { dim: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid density operator: {0}")]
    InvalidState(String),

    #[error("zero vector has no associated state")]
    ZeroVector,

    #[error("invalid payoff kernel: Z({lambda}, {l}) = {value} is negative")]
    NegativeKernel { lambda: f64, l: f64, value: f64 },

    #[error("degenerate payoff kernel: identically zero on the spectrum grid")]
    DegenerateKernel,

    #[error("payoff table is {rows}x{cols} but the spectra have {expected_rows}x{expected_cols} points")]
    TableShape {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },

    #[error("distribution support does not match the payoff grid ({0})")]
    SupportMismatch(&'static str),

    #[error("infeasible energy constraint: cap {cap} is below the ground energy {ground}")]
    InfeasibleEnergy { cap: f64, ground: f64 },

    #[error("dual bracketing failed after {doublings} doublings (last multiplier {mu:e})")]
    Bracketing { doublings: usize, mu: f64 },

    #[error("best-response oracle could not certify gap {gap:e} <= {tol:e}")]
    NotCertified { gap: f64, tol: f64 },

    #[error("grid is not strictly increasing at index {0}")]
    NonIncreasingGrid(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
