use thiserror::Error;

pub type Result<T> = std::result::Result<T, PaviError>;

#[derive(Debug, Error)]
pub enum PaviError {
    #[error("invalid variable set: {0}")]
    InvalidSet(String),

    #[error("variable index {index} exceeds dimension p={p}")]
    IndexOutOfRange { index: usize, p: usize },

    #[error("support exceeds capacity: {size} predictors with {n} observations")]
    SupportExceedsCapacity { size: usize, n: usize },

    #[error("non-binary response value {value} at observation {row}")]
    NonBinaryResponse { row: usize, value: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("family mismatch: expected {expected}, found {found}")]
    FamilyMismatch { expected: String, found: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("invalid penalty: {0}")]
    InvalidPenalty(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("cross-validation failed: {0}")]
    CrossValidation(String),

    #[error("all candidate models are unfittable")]
    NoFittableCandidates,

    #[error("all-subsets enumeration limited to p <= 20, got p={0}")]
    TooManySubsets(usize),

    #[error("unknown simulation example {0} (expected 1..=5)")]
    UnknownExample(u32),

    #[error("unknown {kind} '{name}'")]
    UnknownStrategy { kind: &'static str, name: String },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("missing value at row {row}, column {column}")]
    MissingValue { row: usize, column: String },

    #[error("missing column '{0}'")]
    MissingColumn(String),

    #[error("model list: {0}")]
    ModelList(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl PaviError {
    /// Stable machine-readable code used on the CLI error line.
    pub fn code(&self) -> &'static str {
        match self {
            PaviError::InvalidSet(_) => "invalid-set",
            PaviError::IndexOutOfRange { .. } => "index-out-of-range",
            PaviError::SupportExceedsCapacity { .. } => "support-capacity",
            PaviError::NonBinaryResponse { .. } => "non-binary-response",
            PaviError::NonFinite(_) => "non-finite",
            PaviError::FamilyMismatch { .. } => "family-mismatch",
            PaviError::DimensionMismatch(_) => "dimension-mismatch",
            PaviError::DegenerateDesign(_) => "degenerate-design",
            PaviError::InvalidPenalty(_) => "invalid-penalty",
            PaviError::InvalidConfig(_) => "invalid-config",
            PaviError::CrossValidation(_) => "cross-validation",
            PaviError::NoFittableCandidates => "no-fittable-candidates",
            PaviError::TooManySubsets(_) => "too-many-subsets",
            PaviError::UnknownExample(_) => "unknown-example",
            PaviError::UnknownStrategy { .. } => "unknown-strategy",
            PaviError::Parse { .. } => "parse",
            PaviError::MissingValue { .. } => "missing-value",
            PaviError::MissingColumn(_) => "missing-column",
            PaviError::ModelList(_) => "model-list",
            PaviError::Io(_) => "io",
            PaviError::Csv(_) => "csv",
            PaviError::Json(_) => "json",
        }
    }
}
