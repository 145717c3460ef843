use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("scheme mismatch: expected {expected}, found {found}")]
    SchemeMismatch { expected: String, found: String },

    #[error("index {index:?} is not valid for scheme {scheme}")]
    InvalidIndex { index: Vec<i64>, scheme: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("parameter {0} lies outside the open unit disc")]
    OutOfDisc(String),

    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("invalid triple: {0}")]
    InvalidTriple(String),

    #[error("operator check failed: {0}")]
    CheckFailed(String),

    #[error("kernel of {op} not stabilized at grade {grade} (dims {dims:?})")]
    KernelNotStabilized { op: String, grade: u32, dims: Vec<usize> },

    #[error("inputs do not commute (deviation {0:e})")]
    NotCommuting(f64),

    #[error("common-eigenvector deflation failed: {0}")]
    Deflation(String),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
