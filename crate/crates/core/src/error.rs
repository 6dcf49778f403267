use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("leaf cube has no children in grid")]
    LeafCube,
    #[error("grid mismatch: expected d={expected_d} L={expected_l}, got d={got_d} L={got_l}")]
    GridMismatch {
        expected_d: u32,
        expected_l: u32,
        got_d: u32,
        got_l: u32,
    },
    #[error("weight must be positive (cell {cell} has value {value})")]
    NonPositiveWeight { cell: usize, value: f64 },
    #[error("degenerate weighted Haar: weight vanishes on a half of E(alpha={alpha}) at level {level}")]
    DegenerateWeight { level: u32, alpha: u32 },
    #[error("sets not strictly nested")]
    NotNested,
    #[error("alpha {alpha} out of range for d={dim}")]
    InvalidAlpha { alpha: u32, dim: u32 },
    #[error("cube out of range: level {level}, index {index}")]
    InvalidCube { level: u32, index: usize },
    #[error("symbol has negative entry {value} at level {level}, alpha {alpha}")]
    NegativeSymbol { level: u32, alpha: u32, value: f64 },
    #[error("quadratic form is not positive definite on the working span (entry {index} = {value})")]
    NonPositiveForm { index: usize, value: f64 },
    #[error("span of dimension {size} exceeds the dense cap {cap}; use the matrix-free path")]
    SizeCap { size: usize, cap: usize },
    #[error("power iteration did not converge after {iterations} iterations; bracket [{lower}, {upper}]")]
    NonConvergence {
        iterations: usize,
        lower: f64,
        upper: f64,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
