use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain too small: {interior} interior points, at least 5 are required")]
    DomainTooSmall { interior: i64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("wavefunctions live on different grids")]
    GridMismatch,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("x = {x} is outside the tabulated range [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("no classical turning point {side} of the well at energy {energy}")]
    NoTurningPoint { side: &'static str, energy: f64 },

    #[error("singular matrix: pivot {pivot:e} at row {row}; try a different time step")]
    Singular { row: usize, pivot: f64 },

    #[error("parity selection requires a grid symmetric about x = 0, got [{x_min}, {x_max}]")]
    AsymmetricGrid { x_min: f64, x_max: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("wavefunction vanished (check the initial state and parity)")]
    ZeroState,

    #[error("non-finite value in iterate {iteration}")]
    NonFinite { iteration: usize },

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("degenerate lattice steps: {0}")]
    DegenerateSteps(String),

    #[error("{0}")]
    Parse(String),
}
