use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid rod properties: {0}")]
    InvalidRod(String),

    #[error("invalid node grid: {0}")]
    InvalidGrid(String),

    #[error("grid length {grid_m} m does not match rod length {rod_m} m")]
    LengthMismatch { grid_m: f64, rod_m: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("force location {s_m} m outside [0, {length_m}] m")]
    LocationOutOfRange { s_m: f64, length_m: f64 },

    #[error("force locations are not strictly increasing (index {index})")]
    Unordered { index: usize },

    #[error("parameter sequence of length {0} is not a multiple of 3")]
    ParameterLength(usize),

    #[error("shooting did not converge after {iterations} iterations (residual {residual:.3e})")]
    BvpNotConverged { iterations: usize, residual: f64 },

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
