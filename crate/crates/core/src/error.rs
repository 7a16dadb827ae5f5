use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: no rows")]
    NoRows { path: PathBuf },

    #[error("{path}: malformed CSV at data row {row}: {reason}")]
    MalformedRow {
        path: PathBuf,
        row: usize,
        reason: String,
    },

    #[error("label column `{0}` not found")]
    MissingLabelColumn(String),

    #[error("column `{0}` has no usable values")]
    EmptyColumn(String),

    #[error("unknown dataset schema `{0}`")]
    UnknownSchema(String),

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("{0}")]
    InvalidSplit(String),

    #[error("training data has a single class `{0}`")]
    SingleClass(String),

    #[error("k = {k} exceeds the {rows} training rows")]
    KTooLarge { k: usize, rows: usize },

    #[error("expected {expected} features per row, got {got}")]
    WidthMismatch { expected: usize, got: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("{folds} folds requested but class `{class}` has only {count} rows")]
    TooManyFolds {
        folds: usize,
        class: String,
        count: usize,
    },

    #[error("undefined for an empty confusion matrix")]
    EmptyMatrix,

    #[error("relative improvement is undefined for an old value of 0")]
    ZeroBaseline,

    #[error("unknown {kind} `{name}`")]
    UnknownStrategy { kind: &'static str, name: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot compare reports: {0}")]
    Incomparable(String),

    #[error("report parse error at line {line}: {reason}")]
    ReportParse { line: usize, reason: String },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

/// Tags an error with the pipeline stage it came from.
pub trait StageContext<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageContext<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| match e {
            tagged @ Error::Stage { .. } => tagged,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        })
    }
}
