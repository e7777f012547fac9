//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    /// Tensor shapes do not conform for the requested operation.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A configuration value is outside its documented range.
    #[error("invalid config: {0}")]
    Config(String),

    /// A token or lookup index is out of range.
    #[error("index out of range: {0}")]
    Index(String),

    /// A NaN or infinity was produced or passed where finite values are required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// A binary or text file does not match its documented layout.
    #[error("format error: {0}")]
    Format(String),

    /// Underlying I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Image decode/encode failure.
    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, Error>;
