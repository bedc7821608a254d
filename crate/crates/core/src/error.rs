use thiserror::Error;

/// Errors produced across the crate.
///
/// The variants fall into three families that map onto CLI exit codes:
/// usage errors (bad configuration), data errors (bad input files or
/// samples), and invariant violations (a bug or an impossible state).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("cannot split {n} samples with calibration fraction {cal_fraction}")]
    Split { n: usize, cal_fraction: f64 },

    #[error("no rating digit found in transcript {sample_id}")]
    NoRatingDigit { sample_id: String },

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("value {y} lies outside the grid [{lo}, {hi}]")]
    OutsideGrid { y: f64, lo: f64, hi: f64 },

    #[error("group {group} has {count} calibration samples, fewer than the minimum {min}")]
    GroupTooSmall {
        group: String,
        count: usize,
        min: usize,
    },

    #[error("sample {sample_id}: ground truth disagrees across judges ({a} vs {b})")]
    GroundTruthMismatch { sample_id: String, a: i32, b: i32 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 1 usage, 2 data, 3 internal invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Invariant(_) => 3,
            _ => 2,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
