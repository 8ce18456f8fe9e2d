use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("loop configuration error: {0}")]
    LoopConfiguration(String),

    #[error("degenerate steady state: singular value ratio {ratio:.3e} below threshold")]
    DegenerateSteadyState { ratio: f64 },

    #[error("solver error: {0}")]
    Solver(String),

    #[error("non-finite integrand at velocity node {node} (v = {velocity} m/s)")]
    NonFiniteIntegrand { node: usize, velocity: f64 },

    #[error("index ({i}, {j}) out of range for a {dim}-level system")]
    IndexOutOfRange { i: usize, j: usize, dim: usize },

    #[error("division by zero: {0}")]
    Division(String),

    #[error("NEP undefined for zero total efficiency")]
    UndefinedNep,

    #[error("coupling matrix implies net gain: output flux exceeds input by {excess:.3e}")]
    NonPassiveMedium { excess: f64 },

    #[error("trace has no positive peak")]
    NoPeak,

    #[error("trace maximum lies on the grid boundary (index {index})")]
    BoundaryPeak { index: usize },

    #[error("invalid trace: {0}")]
    InvalidTrace(String),

    #[error("response curve never exceeds SNR = 1")]
    BelowNoise,

    #[error("response curve already above SNR = 1 at its first point")]
    AboveNoiseFloor,

    #[error("no -3 dB compression point on the curve; range up to last point is {partial_db:.3} dB")]
    UnsaturatedCurve { partial_db: f64 },

    #[error("photon stream is empty")]
    EmptyStream,

    #[error("insufficient data: {occupied} occupied bins, need at least {required}")]
    InsufficientData { occupied: usize, required: usize },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
