use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown identifier `{name}` at byte {position}")]
    UnknownIdentifier { position: usize, name: String },

    #[error("variable x{index} is outside the declared dimension {dimension}")]
    VariableOutOfRange { index: usize, dimension: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("interval division by an interval containing zero")]
    ZeroInDenominator,

    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("degenerate box: every width is zero")]
    DegenerateBox,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite relaxation parameter on box")]
    NonFiniteAlpha,

    #[error("empty list")]
    Empty,

    #[error("unknown instance `{0}`")]
    UnknownInstance(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed report: {0}")]
    Report(String),

    #[error("cannot read {0}")]
    Input(String),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
