//! Error types shared across the crate.

use thiserror::Error;

/// Errors from dataset construction, CSV ingestion and model-file I/O.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid sample: {field} = {value} ({detail})")]
    InvalidSample {
        field: &'static str,
        value: String,
        detail: String,
    },

    #[error("malformed CSV header in {path}: expected `{expected}`, found `{found}`")]
    CsvHeader {
        path: String,
        expected: String,
        found: String,
    },

    #[error("CSV row error at line {line}: {detail}")]
    CsvRow { line: usize, detail: String },

    #[error("dataset tag mismatch: {detail}")]
    DatasetMismatch { detail: String },

    #[error("cannot infer dataset tags from a CSV with no data rows: {path}")]
    EmptyCsv { path: String },

    #[error("model file {path}: unsupported schema_version {found} (expected {expected})")]
    SchemaVersion {
        path: String,
        found: u32,
        expected: u32,
    },

    #[error("model file {path}: unknown model_kind `{kind}`")]
    UnknownModelKind { path: String, kind: String },

    #[error("model file {path}: model_kind `{declared}` does not match the payload ({detail})")]
    KindMismatch {
        path: String,
        declared: String,
        detail: String,
    },

    #[error("model file {path}: malformed payload: {detail}")]
    MalformedPayload { path: String, detail: String },

    #[error("TOML error on {path}: {detail}")]
    Toml { path: String, detail: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

/// Errors from the synthetic campaign generator.
#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),

    #[error("unknown platform alias `{0}`")]
    UnknownPlatform(String),

    #[error(
        "could not draw a feasible configuration after {attempts} attempts \
         (snr range may be entirely infeasible)"
    )]
    RejectionCapExceeded { attempts: usize },

    #[error("generated sample violates invariants: {0}")]
    InvalidSample(#[from] CoreError),

    #[error("oracle evaluation failed: {0}")]
    Oracle(#[from] FitError),
}

/// Errors from the regression predictors and fitters.
#[derive(Debug, Error)]
pub enum FitError {
    #[error(
        "infeasible configuration: snr {snr_db:.3} dB <= c_min({mcs}) = {c_min:.3} dB"
    )]
    Infeasible { snr_db: f64, mcs: u8, c_min: f64 },

    #[error("invalid regression parameters: {0}")]
    InvalidParams(String),

    #[error("dataset unsuitable for fitting: {0}")]
    Unfittable(String),

    #[error("under-determined fit: {0}")]
    UnderDetermined(String),
}

/// Errors from MLP training.
#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    InvalidConfig(String),

    #[error("training dataset is empty")]
    EmptyDataset,

    #[error("non-finite loss at epoch {epoch}, step {step}")]
    NonFiniteLoss { epoch: usize, step: usize },

    #[error("model dimensions {found:?} do not match expected {expected:?}")]
    DimensionMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },
}

/// Errors from dataset splitting and scenario evaluation.
#[derive(Debug, Error)]
pub enum EvalError {
    #[error("dataset too small to split: {n} samples (need at least {min})")]
    DatasetTooSmall { n: usize, min: usize },

    #[error("empty prediction/actual pair list")]
    EmptyPairs,

    #[error("scenario {scenario}: {detail}")]
    Scenario { scenario: String, detail: String },

    #[error("scenario {scenario}: fit failed: {source}")]
    Fit {
        scenario: String,
        #[source]
        source: FitError,
    },

    #[error("scenario {scenario}: training failed: {source}")]
    Train {
        scenario: String,
        #[source]
        source: TrainError,
    },

    #[error(transparent)]
    Datagen(#[from] DatagenError),

    #[error(transparent)]
    Core(#[from] CoreError),
}
