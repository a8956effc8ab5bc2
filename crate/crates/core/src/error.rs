use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("table length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("dirichlet exponential needs a(1) = 0, got {0}")]
    NonzeroConstantTerm(f64),

    #[error("zeta has a pole at s = 1")]
    Pole,

    #[error("tolerance {tol:e} is not attainable: {reason}")]
    ToleranceUnattainable { tol: f64, reason: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grids differ: {0}")]
    GridMismatch(String),

    #[error("need at least 3 retained grid points, have {0}")]
    TooFewPoints(usize),

    #[error("frequency {lambda} exceeds the grid Nyquist bound {bound}")]
    AboveNyquist { lambda: f64, bound: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("every grid point is masked")]
    AllMasked,

    #[error("zero table is empty")]
    EmptyZeroTable,

    #[error("zero table line {line}: cannot parse {text:?}")]
    ZeroTableParse { line: usize, text: String },

    #[error("zero table line {line}: ordinate {value} does not exceed previous {previous}")]
    ZeroTableNotIncreasing { line: usize, value: f64, previous: f64 },

    #[error("zero table line {line}: first ordinate {value} is below the sanity floor 14")]
    ZeroTableFloor { line: usize, value: f64 },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
