use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("moment matrix is singular")]
    SingularMatrix,

    #[error("{what} = {value} is not a multiple of 2^-{level}")]
    Misaligned {
        what: &'static str,
        value: f64,
        level: u32,
    },

    #[error("ghost cell (level {level}, index {index}) has no fill rule")]
    UnresolvedGhost { level: u32, index: i64 },

    #[error("non-finite population after step {step}")]
    NonFinite { step: u64 },

    #[error("final time {time} is not a whole number of steps of {dt}")]
    NonIntegerSteps { time: f64, dt: f64 },

    #[error("convergence rate undefined for non-positive value {0}")]
    InvalidRate(f64),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
