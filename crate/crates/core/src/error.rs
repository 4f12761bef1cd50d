use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("spin must satisfy 2I >= 1 (got 2I = {0})")]
    InvalidSpin(u32),
    #[error("matrix dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("{len} entries do not form a square matrix")]
    NotSquare { len: usize },
    #[error("hermitian eigensolver did not converge")]
    EigenNoConvergence,
    #[error("time {t} outside stroke interval [0, {half_tau}]")]
    TimeOutOfRange { t: f64, half_tau: f64 },
    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),
    #[error("temperature must be positive and finite (got {0})")]
    InvalidTemperature(f64),
    #[error("not a density matrix: {0}")]
    InvalidDensityMatrix(String),
    #[error("energy gap {0:e} too small to order the eigenbasis")]
    DegenerateSpectrum(f64),
    #[error("relative entropy undefined: reference state has eigenvalue {0:e}")]
    SingularReference(f64),
    #[error("level index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("coherence needs two distinct levels (got {0} twice)")]
    SameLevel(usize),
    #[error("initial state is not diagonal in the initial energy basis (off-diagonal {0:e})")]
    NotDiagonal(f64),
    #[error("initial state is not a positive-temperature Gibbs state: {0}")]
    NotThermal(String),
    #[error("integrator did not converge after {steps} steps (last trace distance {distance:e})")]
    NoConvergence { steps: usize, distance: f64 },
    #[error("invalid integrator config: {0}")]
    InvalidIntegrator(String),
    #[error("maximum efficiency undefined: initial gap is zero")]
    ZeroGap,
    #[error("no sign change of the net work in [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("config: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}
