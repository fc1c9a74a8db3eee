use thiserror::Error;

/// Errors reported by the library.
///
/// Every variant maps onto a stable machine-readable code (see [`SketchError::code`]),
/// which the CLI prints on failure and the C ABI returns as an integer.
#[derive(Debug, Error)]
pub enum SketchError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("rank deficient: {0}")]
    RankDeficient(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl SketchError {
    pub fn code(&self) -> &'static str {
        match self {
            SketchError::InvalidInput(_) => "E_INVALID_INPUT",
            SketchError::RankDeficient(_) => "E_RANK_DEFICIENT",
            SketchError::Budget(_) => "E_BUDGET",
            SketchError::Parse { .. } => "E_PARSE",
            SketchError::Config(_) => "E_CONFIG",
            SketchError::Io(_) => "E_IO",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        SketchError::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, SketchError>;
