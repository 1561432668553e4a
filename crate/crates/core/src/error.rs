//! Error types shared by all fog-model modules.

use thiserror::Error;

/// Errors produced by the fog models and their input validation.
#[derive(Debug, Error)]
pub enum FogError {
    /// A scalar argument is outside its legal domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Paired rasters do not have the same dimensions.
    #[error("dimension mismatch: expected {expected_width}x{expected_height}, got {actual_width}x{actual_height}")]
    DimensionMismatch {
        expected_width: usize,
        expected_height: usize,
        actual_width: usize,
        actual_height: usize,
    },

    /// Image and depth aspect ratios differ by more than the 1% alignment
    /// tolerance, so resampling would distort the scene.
    #[error("aspect ratio mismatch: image {image_width}x{image_height} vs depth {depth_width}x{depth_height}")]
    AspectRatioMismatch {
        image_width: usize,
        image_height: usize,
        depth_width: usize,
        depth_height: usize,
    },

    /// A raster buffer has the wrong length for its stated dimensions.
    #[error("buffer length {actual} does not match {width}x{height} ({expected} expected)")]
    BufferLength {
        width: usize,
        height: usize,
        expected: usize,
        actual: usize,
    },

    /// A depth sample is NaN, infinite, or not strictly positive.
    #[error("invalid depth {value} at pixel ({x}, {y})")]
    InvalidDepth { x: usize, y: usize, value: f64 },

    /// A channel value is outside [0, 1] or non-finite.
    #[error("invalid channel value {value} at index {index}")]
    InvalidChannel { index: usize, value: f64 },

    /// A point cloud record violates the cloud invariants.
    #[error("invalid point at index {index}: {reason}")]
    InvalidPoint { index: usize, reason: String },

    /// An operation that needs at least one element received none.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
}

pub type Result<T> = std::result::Result<T, FogError>;
