use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = PdcError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum PdcError {
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to decode image {}: {message}", path.display())]
    Decode { path: PathBuf, message: String },

    #[error("failed to encode image {}: {message}", path.display())]
    Encode { path: PathBuf, message: String },

    #[error("expected a 16-bit depth image, found {found}-bit samples")]
    WrongBitDepth { found: u16 },

    #[error("expected {expected} channel(s), found {found}")]
    WrongChannelCount { expected: u8, found: u8 },

    #[error("depth {depth} m at pixel ({x}, {y}) cannot be encoded as a 16-bit depth png")]
    DepthNotEncodable { x: usize, y: usize, depth: f64 },

    #[error("depth {depth} m at pixel ({x}, {y}) is not below max_depth {max_depth} m")]
    DepthExceedsMax {
        x: usize,
        y: usize,
        depth: f64,
        max_depth: f64,
    },

    #[error("invalid depth {depth} at pixel ({x}, {y})")]
    InvalidDepthValue { x: usize, y: usize, depth: f64 },

    #[error("dimension mismatch: {left_w}x{left_h} vs {right_w}x{right_h}")]
    DimensionMismatch {
        left_w: usize,
        left_h: usize,
        right_w: usize,
        right_h: usize,
    },

    #[error("buffer length {len} does not match {width}x{height}")]
    BufferLength {
        width: usize,
        height: usize,
        len: usize,
    },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("superpixel count {requested} exceeds pixel count {pixels}")]
    TooManySuperpixels { requested: usize, pixels: usize },

    #[error("input map has {count} invalid pixel(s); the filter needs a dense map")]
    InvalidPixelsPresent { count: usize },

    #[error("prediction and ground truth share no valid pixels")]
    NoOverlap,

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl PdcError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            PdcError::MissingFile(path)
        } else {
            PdcError::Io { path, source }
        }
    }

    pub(crate) fn mismatch(a: (usize, usize), b: (usize, usize)) -> Self {
        PdcError::DimensionMismatch {
            left_w: a.0,
            left_h: a.1,
            right_w: b.0,
            right_h: b.1,
        }
    }
}
