use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by any stage of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path}: {message}")]
    Json { path: PathBuf, message: String },

    #[error("unknown manifest schema version {0} (expected 1)")]
    UnknownSchemaVersion(u64),

    #[error("ragged columns in {path}: row {row} has {got} fields, expected {expected}")]
    RaggedColumns {
        path: PathBuf,
        row: usize,
        got: usize,
        expected: usize,
    },

    #[error("non-numeric sample in {path} at row {row}, column {column:?}: {value:?}")]
    NonNumericSample {
        path: PathBuf,
        row: usize,
        column: String,
        value: String,
    },

    #[error("channel column not found: {0:?}")]
    ChannelNotFound(String),

    #[error("label track not found: {0:?}")]
    LabelTrackNotFound(String),

    #[error("invalid recording: {0}")]
    InvalidRecording(String),

    #[error("synthesis spec has an empty state list")]
    EmptyStateList,

    #[error("invalid synthesis spec: {0}")]
    InvalidSynthSpec(String),

    #[error("target rate {target_hz} Hz does not divide sample rate {rate_hz} Hz to an integer factor")]
    NonIntegerDecimation { rate_hz: f64, target_hz: f64 },

    #[error("cutoff {cutoff_hz} Hz exceeds the target Nyquist frequency {nyquist_hz} Hz")]
    CutoffAboveNyquist { cutoff_hz: f64, nyquist_hz: f64 },

    #[error("window of {window} samples is longer than the signal ({len} samples)")]
    WindowTooLong { window: usize, len: usize },

    #[error("window length {0} is below the minimum of 8 samples")]
    WindowTooShort(usize),

    #[error("band {band:?} [{lo_hz}, {hi_hz}) Hz contains no frequency bins")]
    EmptyBand { band: String, lo_hz: f64, hi_hz: f64 },

    #[error("invalid band: {0}")]
    InvalidBand(String),

    #[error("unknown band name {0:?} (expected delta, theta, alpha, beta or gamma)")]
    UnknownBandName(String),

    #[error("recording of {len} samples is shorter than one {window}-sample window")]
    RecordingTooShort { len: usize, window: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("perplexity {perplexity} infeasible for {n} points (need 3*perplexity < n)")]
    PerplexityInfeasible { perplexity: f64, n: usize },

    #[error("node {0} has an empty label distribution")]
    EmptyNodeLabels(usize),

    #[error("modularity undefined on edgeless graph")]
    EdgelessGraph,

    #[error("silhouette undefined: need at least 2 non-empty clusters")]
    SilhouetteUndefined,

    #[error("degenerate centroid pair: clusters {a} and {b} have coincident centroids with nonzero scatter")]
    DegenerateCentroids { a: i64, b: i64 },

    #[error("label sequences have mismatched lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("requested {k} clusters from {n} points")]
    TooManyClusters { k: usize, n: usize },

    #[error("singular covariance in component {0} despite regularization")]
    SingularCovariance(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Tag an error with the pipeline stage it came from.
    pub fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
