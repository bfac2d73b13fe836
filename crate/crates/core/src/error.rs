use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("wave function has zero norm")]
    ZeroNorm,
    #[error("wave function contains non-finite amplitudes")]
    NonFinite,
    #[error("grid mismatch between wave functions")]
    GridMismatch,
    #[error("{0}")]
    Domain(String),
    #[error("probability mass {mass:.3e} reached the boundary at t = {time}")]
    BoundaryLeak { time: f64, mass: f64 },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("inconsistent detector scenario: {0}")]
    Scenario(String),
    #[error("events are not space-like separated (s2 = {s2}); no simultaneity frame exists")]
    CausalOrder { s2: f64 },
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("field is singular on the integration path near ({x}, {y})")]
    SingularPath { x: f64, y: f64 },
    #[error("point lies on the loop boundary")]
    BoundaryAmbiguous,
    #[error("invalid loop: {0}")]
    InvalidLoop(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}
