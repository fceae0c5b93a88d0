use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid rectangle ({x}, {y}, {w}, {h}): width and height must be positive and finite")]
    InvalidRect { x: f64, y: f64, w: f64, h: f64 },
    #[error("rectangle is empty after clipping to frame bounds")]
    EmptyAfterClip,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("image {height}x{width} is smaller than the extractor receptive field {min}")]
    ImageTooSmall { height: usize, width: usize, min: usize },
    #[error("search region for box {index} left the feature map")]
    EmptySearchRegion { index: usize },
    #[error("degenerate dataset: {0}")]
    DegenerateDataset(String),
    #[error("empty sequence")]
    EmptySequence,
    #[error("oracle scheduling requires groundtruth")]
    MissingGroundtruth,
    #[error("scene spec overflow: {0}")]
    SpecOverflow(String),
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: u64, msg: String },
    #[error("missing frame {frame} in {dir}")]
    MissingFrame { dir: PathBuf, frame: u32 },
    #[error("prediction at frame {frame} has no object id")]
    MissingIds { frame: u32 },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
