use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval [{start}, {end}]: end must exceed start")]
    InvalidInterval { start: f64, end: f64 },

    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("non-finite sample {value} at node {index} (x = {x})")]
    NonFiniteSample { index: usize, x: f64, value: f64 },

    #[error("stencil nodes {first}..={last} leave the signal (valid nodes 0..={max})")]
    OutOfRange { first: i64, last: i64, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no explicit quadratic form for r = {0} (only r = 3 and r = 4)")]
    UnsupportedR(usize),

    #[error("linear system for the ({a},{b})-optimal weights of order r = {r} is inconsistent")]
    NoSolution { r: usize, a: usize, b: usize },

    #[error("signal has {nodes} nodes, the scheme needs at least {required}")]
    SignalTooShort { nodes: usize, required: usize },

    #[error("error value {0:e} is zero or below 1e-300; order is undefined")]
    DegenerateError(f64),

    #[error("the window around the jump interval ending at node {j0} leaves the grid")]
    JumpTooCloseToBoundary { j0: usize },

    #[error("unknown function `{0}`")]
    UnknownFunction(String),

    #[error("malformed signal data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
