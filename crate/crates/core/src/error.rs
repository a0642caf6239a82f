use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid query: {0}")]
    Query(String),
    #[error("invalid model: {0}")]
    Model(String),
    #[error("positivity violated: {0}")]
    Positivity(String),
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("graph structure: {0}")]
    Structure(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("script structure: {0}")]
    Script(String),
    #[error("rule {rule} failed at {slot}: {message}")]
    RuleApplication { rule: String, slot: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for errors caused by malformed input data rather than a bad request.
    pub fn is_input_format(&self) -> bool {
        matches!(
            self,
            Error::Model(_) | Error::Format(_) | Error::Syntax { .. } | Error::Script(_) | Error::Positivity(_)
        )
    }
}
