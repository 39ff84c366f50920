use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("target column '{0}' not found")]
    MissingTarget(String),
    #[error("target column '{column}' must have exactly 2 classes, found {distinct}")]
    NonBinaryTarget { column: String, distinct: usize },
    #[error("malformed CSV at line {line}{}: {message}", column.as_ref().map(|c| format!(", column '{c}'")).unwrap_or_default())]
    MalformedCsv {
        line: u64,
        column: Option<String>,
        message: String,
    },
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("dataset needs at least 2 columns, found {0}")]
    TooFewColumns(usize),
    #[error("duplicate column name '{0}'")]
    DuplicateColumn(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("cell at row {row} does not conform to column '{column}'")]
    InvalidCell { row: usize, column: String },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("target is null at row {row}")]
    NullTarget { row: usize },
    #[error("unknown column '{0}'")]
    UnknownColumn(String),
    #[error("need at least 2 numeric columns, found {0}")]
    InsufficientNumericColumns(usize),
    #[error("class '{class}' has {count} rows; at least 2 are required")]
    ClassTooSmall { class: String, count: usize },
    #[error("split ratio must lie in (0, 1), got {0}")]
    InvalidRatio(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum CorruptError {
    #[error("feature '{0}' not found")]
    FeatureNotFound(String),
    #[error("'{0}' is the target column and cannot be corrupted by this error type")]
    FeatureIsTarget(String),
    #[error("outliers apply only to numeric features; '{0}' is not numeric")]
    OutlierOnCategorical(String),
    #[error("noisy values need at least 2 categories in '{0}'")]
    SingleCategory(String),
    #[error("row predicate selects no rows")]
    PredicateSelectsNoRows,
    #[error("level {0} is not part of the severity schedule")]
    LevelNotInSchedule(f64),
    #[error("invalid severity schedule: {0}")]
    InvalidSchedule(String),
    #[error("{0} requires at least one target feature")]
    MissingFeatures(&'static str),
    #[error("{0} does not take a feature list")]
    UnexpectedFeatures(&'static str),
    #[error("feature list is empty")]
    EmptyFeatureList,
    #[error("error type list is empty")]
    EmptyErrorTypes,
    #[error("{0} is not a cell-level error type")]
    NotACellError(&'static str),
    #[error("class '{0}' is not a label of the target column")]
    UnknownClass(String),
    #[error("correlation threshold must lie in (0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("training data contains a single class")]
    DegenerateTraining,
    #[error("{model}: class covariance is singular even after regularization")]
    SingularCovariance { model: &'static str },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("test set is empty")]
    EmptyTest,
    #[error("positive class '{0}' is not a target label")]
    UnknownPositiveClass(String),
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
}

#[derive(Debug, Error)]
pub enum EspError {
    #[error("curve needs at least 2 points, found {0}")]
    TooFewPoints(usize),
    #[error("baseline performance {0} is too close to zero")]
    ZeroBaseline(f64),
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("profiles do not share the same severity schedule")]
    MixedSchedules,
    #[error("profiles do not share the same metric")]
    MixedMetrics,
    #[error("aggregation needs at least 2 runs, found {0}")]
    TooFewRuns(usize),
    #[error("curve file violates the interchange schema: {0}")]
    SchemaViolation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("paired samples differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {min} pairs, found {found}")]
    TooFewPairs { min: usize, found: usize },
    #[error("no p-values supplied")]
    EmptyInput,
    #[error("p-value {value} at position {index} is outside [0, 1]")]
    PValueOutOfRange { index: usize, value: f64 },
    #[error("{name} must lie in (0, 1), got {value}")]
    InvalidLevel { name: &'static str, value: f64 },
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration at '{field}': {message}")]
    Validation { field: String, message: String },
    #[error("scenario '{0}' not found")]
    ScenarioNotFound(String),
    #[error("scenario '{0}' has no complete repetition")]
    IncompleteRepetition(String),
    #[error("test partition checksum changed for scenario {scenario} repetition {repetition}: expected {expected}, found {found}")]
    Integrity {
        scenario: String,
        repetition: u32,
        expected: String,
        found: String,
    },
    #[error("run store at {0} belongs to a different configuration")]
    ConfigMismatch(String),
    #[error("run store already exists at {0}; pass --resume to continue it")]
    StoreExists(String),
    #[error("run store holds no corrupted levels to analyze")]
    EmptyStore,
    #[error("corrupt run store line {line}: {message}")]
    CorruptStore { line: usize, message: String },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Corrupt(#[from] CorruptError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Esp(#[from] EspError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        RunError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}
