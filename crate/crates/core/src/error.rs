use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Pauli label character {ch:?} at position {position}")]
    PauliParse { position: usize, ch: char },

    #[error("empty Pauli label")]
    EmptyLabel,

    #[error("qubit count mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("{what} requires n <= {cap}, got n = {n}")]
    TooManyQubits { what: &'static str, n: usize, cap: usize },

    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("map is not Hermiticity-preserving (imaginary residue {residue:.3e})")]
    NotHermiticityPreserving { residue: f64 },

    #[error("matrix is not Hermitian (residue {residue:.3e}): {what}")]
    NotHermitian { what: &'static str, residue: f64 },

    #[error("input is not CPTP: {0}")]
    NotCptp(String),

    #[error("PL parameters ill-defined: Pauli eigenvalue f[{word}] = {value:e} vanishes")]
    IllDefinedLambda { word: String, value: f64 },

    #[error("inconclusive: principal branch unavailable ({0})")]
    PrincipalBranchUnavailable(String),

    #[error("rank-deficient fit: {rank} independent equations for {unknowns} unknowns")]
    RankDeficient { rank: usize, unknowns: usize },

    #[error("non-positive measured Pauli eigenvalue {value} for word {word}")]
    NonPositiveMeasurement { word: String, value: f64 },

    #[error("complex PL parameters are not supported here (word {word})")]
    ComplexLambda { word: String },

    #[error("invalid argument `{field}`: {message}")]
    InvalidArgument { field: &'static str, message: String },

    #[error("split reconstruction residual {residue:.3e} exceeds tolerance")]
    InconsistentGenerator { residue: f64 },

    #[error("malformed input at `{field}`: {message}")]
    Format { field: String, message: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Name of the offending input field, when one is known.
    pub fn field(&self) -> Option<String> {
        match self {
            Error::Format { field, .. } => Some(field.clone()),
            Error::InvalidArgument { field, .. } => Some((*field).to_string()),
            Error::IllDefinedLambda { word, .. }
            | Error::NonPositiveMeasurement { word, .. }
            | Error::ComplexLambda { word } => Some(word.clone()),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(field: &'static str, message: impl Into<String>) -> Error {
    Error::InvalidArgument { field, message: message.into() }
}

pub(crate) fn format_err(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Format { field: field.into(), message: message.into() }
}
