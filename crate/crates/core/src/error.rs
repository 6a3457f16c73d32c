use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("symbol {value} out of range 1..={n}")]
    SymbolOutOfRange { value: u32, n: u32 },

    #[error("V_{m} over {n} symbols holds {required} points, exceeding the size cap {cap}")]
    SizeCapExceeded {
        n: u32,
        m: usize,
        required: u128,
        cap: usize,
    },

    #[error("neighborhood depth {depth} is below the point level {level}")]
    DepthBelowLevel { depth: usize, level: usize },

    #[error("grid function has level {got}, expected {expected}")]
    LevelMismatch { expected: usize, got: usize },

    #[error("eigenvalue {value} is forbidden: {reason}")]
    ForbiddenEigenvalue { value: f64, reason: &'static str },

    #[error("the Dirichlet spectrum construction requires N >= 3, got N = {n}")]
    TooFewSymbols { n: u32 },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("matrix has no rows")]
    EmptyMatrix,

    #[error("eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("grid function does not vanish on the boundary (index {index})")]
    NotDirichlet { index: usize },

    #[error("cannot parse point '{input}': {reason}")]
    PointParse { input: String, reason: &'static str },

    #[error("renormalized limit not Cauchy by level {max_m}; last scaled value {last}")]
    LimitNotConverged { max_m: usize, last: f64 },

    #[error("{0}")]
    InvalidArgument(String),
}
