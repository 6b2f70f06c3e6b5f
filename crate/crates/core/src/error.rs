use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("no header")]
    NoHeader,
    #[error("no data rows")]
    NoRows,
    #[error("row {row} has {found} cells, header has {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("column name must be non-empty")]
    EmptyColumnName,
    #[error("target column absent")]
    TargetAbsent,
    #[error("schema declares {0} target columns, expected exactly one")]
    TargetCount(usize),
    #[error("column `{0}` is entirely missing")]
    AllMissing(String),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("column `{column}` has kind {found}, expected {expected}")]
    KindMismatch {
        column: String,
        expected: &'static str,
        found: &'static str,
    },
    #[error("column length {found} does not match row count {expected}")]
    ColumnLength { expected: usize, found: usize },
    #[error("category code {code} out of range for column `{column}`")]
    CodeOutOfRange { column: String, code: u32 },
    #[error("need at least {needed} rows, got {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("degenerate target")]
    DegenerateTarget,
    #[error("target column `{0}` is not binary")]
    NonBinaryTarget(String),
    #[error("target column `{0}` contains missing values")]
    MissingTarget(String),
    #[error("column `{0}` contains missing values")]
    MissingValues(String),
    #[error("test fraction {0} outside (0, 1)")]
    InvalidFraction(f64),
    #[error("empty feature set")]
    EmptyFeatureSet,
    #[error("feature mismatch: {0}")]
    FeatureMismatch(String),
    #[error("row has {found} features, model expects {expected}")]
    RowLength { expected: usize, found: usize },
    #[error("brute-force Shapley refuses {found} features (limit {limit})")]
    TooManyFeatures { found: usize, limit: usize },
    #[error("empty attribution matrix")]
    EmptyMatrix,
    #[error("degenerate attribution: {0}")]
    DegenerateAttribution(&'static str),
    #[error("vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("zero trace: every column is constant")]
    ZeroTrace,
    #[error("need at least {needed} numeric columns, got {found}")]
    TooFewColumns { needed: usize, found: usize },
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        source: Box<Error>,
    },
}

impl Error {
    pub fn at(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Stage tag of the outermost stage wrapper, if any.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.at(stage))
    }
}
