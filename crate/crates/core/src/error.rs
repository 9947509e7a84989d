use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument {value} outside the domain of the constitutive law (max {max})")]
    OutOfDomain { value: f64, max: f64 },
    #[error("invalid grid: {0}")]
    InvalidSpec(String),
    #[error("placement mismatch: {0}")]
    PlacementMismatch(String),
    #[error("fields live on different grids or placements: {0}")]
    GridMismatch(String),
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("coefficient must be positive (min {0})")]
    NonPositiveCoefficient(f64),
    #[error("state is not converged")]
    NotConverged,
    #[error("converged state is outside the convexity set (margin {0})")]
    OutOfK(f64),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("invalid boundary data: {0}")]
    InvalidData(String),
    #[error("continuation never enters the convexity set (margin {margin} at mu = {mu})")]
    NeverEntersK { mu: f64, margin: f64 },
    #[error("continuation budget of {0} steps exceeded")]
    BudgetExceeded(usize),
    #[error("no threshold found after {0} steps: the threshold is unbounded for this datum")]
    UnboundedThreshold(usize),
    #[error("boundary datum is identically zero")]
    ZeroDatum,
    #[error("tangential data contains non-gradient (CROSS) components")]
    NonGradientData,
    #[error("normal data has a nonzero mean (l = 0 coefficient {0})")]
    NonzeroMean(f64),
    #[error("exterior curl source has nonzero flux {0}")]
    NonzeroFlux(f64),
    #[error("tangential data incompatible with the curl source at (l, m) = ({l}, {m}): expected {expected}, got {got}")]
    Incompatible { l: usize, m: i64, expected: f64, got: f64 },
    #[error("trace samplings differ: {0}")]
    SamplingMismatch(String),
    #[error("slab field {b} above the superheating value {max}")]
    AboveThreshold { b: f64, max: f64 },
    #[error("i/o: {0}")]
    Io(String),
    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
