use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config parse error at line {line}, column {column}: {message}")]
    ConfigParse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid config field `{field}`: {message}")]
    InvalidConfig { field: String, message: String },

    #[error(
        "grid too coarse: orthonormality residual {residual:.3e} with {points} points; increase grid.points"
    )]
    GridTooCoarse { residual: f64, points: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{0} is not symmetric (residual {1:.3e})")]
    NotSymmetric(&'static str, f64),

    #[error("{0} is not Hermitian (residual {1:.3e})")]
    NotHermitian(&'static str, f64),

    #[error("unstable Hamiltonian: {message} (offending eigenvalue {eigenvalue})")]
    Instability {
        eigenvalue: Complex64,
        message: String,
    },

    #[error("Bloch-Messiah reconstruction residual {residual:.3e} exceeds {tolerance:.1e}")]
    Reconstruction { residual: f64, tolerance: f64 },

    #[error("singular matrix: {0}")]
    Singular(&'static str),

    #[error("hafnian of dimension {dim} exceeds the {method} budget of {max}")]
    HafnianSize {
        dim: usize,
        max: usize,
        method: &'static str,
    },

    #[error("hafnian has imaginary residual {imag:.3e} against real part {real:.3e}")]
    ImaginaryResidual { real: f64, imag: f64 },

    #[error("probability {0:.3e} is negative beyond roundoff")]
    NegativeProbability(f64),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("captured mass {captured_mass:.6} is too small to sample from (need > {required})")]
    Truncation { captured_mass: f64, required: f64 },

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("outcome {0} is not part of the enumerated distribution")]
    UnknownOutcome(String),

    #[error("empty mode selection")]
    EmptySelection,

    #[error("{0}")]
    Unavailable(String),

    #[error("scattering time undefined: `{0}` is zero or missing")]
    ScatteringTime(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
