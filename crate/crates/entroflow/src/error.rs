use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("fields live on different domains")]
    DimensionMismatch,

    #[error("bisection bracket failure: {0}")]
    BracketFailure(String),

    #[error("mass mismatch: got {got}, want {want}")]
    MassMismatch { got: f64, want: f64 },

    #[error("negative cell value (index {index}, value {value}) during flow")]
    NegativeCell { index: usize, value: f64 },

    #[error("CFL violation: step size {0} fell below the floor")]
    CflViolation(f64),

    #[error("desingularization connector infeasible: {0}")]
    ConnectorInfeasible(String),

    #[error("trace integral requested on a truncation face")]
    TraceOnTruncationFace,

    #[error("fit window too short or degenerate: {0}")]
    WindowTooShort(String),

    #[error("field is identically zero")]
    ZeroField,

    #[error("rescaled support escapes the domain box")]
    SupportEscapesBox,

    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),

    #[error("probe time {0} outside the recorded trace")]
    ProbeOutsideTrace(f64),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
