use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    // data ingestion
    #[error("target column `{0}` not found")]
    MissingTarget(String),
    #[error("target column `{column}` must hold exactly two distinct values, found {found}")]
    NonBinaryTarget { column: String, found: usize },
    #[error("row {row_index} has {found} cells, expected {expected}")]
    RaggedRow {
        row_index: usize,
        found: usize,
        expected: usize,
    },
    #[error("missing value at row {row}, column `{column}`")]
    MissingValue { row: usize, column: String },
    #[error("column `{column}` declared numeric but `{value}` at row {row} is not a finite number")]
    NotNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("split would leave a side without both classes: {0}")]
    DegenerateSplit(String),
    #[error("class {class} has {count} members, fewer than {n_folds} folds")]
    TooFewPerClass {
        class: u8,
        count: usize,
        n_folds: usize,
    },

    // learners
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("training data contains a single class")]
    SingleClassData,
    #[error("AUC needs both classes among the labels")]
    SingleClass,
    #[error("score vector has a non-finite value at position {0}")]
    NonFiniteScore(usize),
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("feature layout of model `{model}` does not match the dataset")]
    FeatureMismatch { model: String },
    #[error("unsupported format version {found}, expected {expected}")]
    VersionMismatch { found: u64, expected: u64 },
    #[error("corrupt payload: {0}")]
    CorruptPayload(String),

    // profiles
    #[error("variable `{0}` is categorical")]
    CategoricalVariable(String),
    #[error("variable `{0}` is numeric")]
    NumericVariable(String),
    #[error("variable `{0}` has a degenerate domain (min equals max)")]
    DegenerateDomain(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("profile exchange schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("profiles for variable `{0}` are not on a shared grid")]
    GridMismatch(String),

    // measures
    #[error("profile has {len} points, window needs {window}")]
    ProfileTooShort { len: usize, window: usize },
    #[error("bad derivative window: w={window}, q={degree} (need odd w >= 3 and 1 <= q < w)")]
    BadWindow { window: usize, degree: usize },
    #[error("category lists differ for variable `{0}`")]
    CategoryMismatch(String),
    #[error("invalid sign tolerance {0}")]
    InvalidTolerance(f64),

    // rashomon
    #[error("no models supplied")]
    NoModels,
    #[error("unknown model id `{0}`")]
    UnknownExplicitId(String),
    #[error("profile bundle lacks model `{0}`")]
    BundleIncomplete(String),
    #[error("model `{0}` has no test AUC")]
    MissingTestAuc(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    // scenarios
    #[error("unknown scenario {0} (expected 1..=8)")]
    UnknownScenario(u32),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, with all context layers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// Stable variant name used in machine-readable error reports.
    pub fn kind(&self) -> &'static str {
        match self.root() {
            Error::MissingTarget(_) => "MissingTarget",
            Error::NonBinaryTarget { .. } => "NonBinaryTarget",
            Error::RaggedRow { .. } => "RaggedRow",
            Error::MissingValue { .. } => "MissingValue",
            Error::NotNumeric { .. } => "NotNumeric",
            Error::InvalidDataset(_) => "InvalidDataset",
            Error::DegenerateSplit(_) => "DegenerateSplit",
            Error::TooFewPerClass { .. } => "TooFewPerClass",
            Error::InvalidHyperparameter(_) => "InvalidHyperparameter",
            Error::SingleClassData => "SingleClassData",
            Error::SingleClass => "SingleClass",
            Error::NonFiniteScore(_) => "NonFiniteScore",
            Error::LengthMismatch(_) => "LengthMismatch",
            Error::FeatureMismatch { .. } => "FeatureMismatch",
            Error::VersionMismatch { .. } => "VersionMismatch",
            Error::CorruptPayload(_) => "CorruptPayload",
            Error::CategoricalVariable(_) => "CategoricalVariable",
            Error::NumericVariable(_) => "NumericVariable",
            Error::DegenerateDomain(_) => "DegenerateDomain",
            Error::UnknownVariable(_) => "UnknownVariable",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::SchemaMismatch(_) => "SchemaMismatch",
            Error::GridMismatch(_) => "GridMismatch",
            Error::ProfileTooShort { .. } => "ProfileTooShort",
            Error::BadWindow { .. } => "BadWindow",
            Error::CategoryMismatch(_) => "CategoryMismatch",
            Error::InvalidTolerance(_) => "InvalidTolerance",
            Error::NoModels => "NoModels",
            Error::UnknownExplicitId(_) => "UnknownExplicitId",
            Error::BundleIncomplete(_) => "BundleIncomplete",
            Error::MissingTestAuc(_) => "MissingTestAuc",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::UnknownScenario(_) => "UnknownScenario",
            Error::Io(_) => "Io",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
            Error::Context { .. } => unreachable!("root() strips context"),
        }
    }

    /// True when the error stems from bad input rather than a bug.
    pub fn is_user_error(&self) -> bool {
        !matches!(self.root(), Error::LengthMismatch(_) | Error::NonFiniteScore(_))
    }
}

pub(crate) trait ResultExt<T> {
    fn context_with<F: FnOnce() -> String>(self, f: F) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn context_with<F: FnOnce() -> String>(self, f: F) -> Result<T> {
        self.map_err(|e| e.context(f()))
    }
}
