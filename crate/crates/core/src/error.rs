use std::path::PathBuf;

/// Errors produced by `skywatch-core`.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed image data: {0}")]
    Format(String),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid bounding box: {0}")]
    InvalidBox(String),

    #[error("bounding box has no area inside the frame")]
    EmptyBox,

    #[error("foreground asset has no visible (alpha > 0) pixels")]
    EmptyAsset,

    #[error("no placement keeps at least half of the foreground in frame after {0} draws")]
    NoValidPlacement(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("tensor shape error: {0}")]
    Shape(String),

    #[error("empty batch")]
    EmptyBatch,

    #[error("bad calibration parameters: {0}")]
    BadParams(String),

    #[error("tracker update called before init")]
    UpdateBeforeInit,

    #[error("length mismatch: {0} predictions vs {1} ground-truth frames")]
    LengthMismatch(usize, usize),

    #[error("detection on frame {0} has no score")]
    MissingScore(u64),

    #[error("annotation parse error at line {line}: {message}")]
    Annotation { line: usize, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
