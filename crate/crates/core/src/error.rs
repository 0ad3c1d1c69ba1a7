use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point lies outside the hemisphere covered by this fisheye")]
    OutOfHemisphere,
    #[error("point lies behind the perspective camera")]
    BehindCamera,
    #[error("point projects outside the perspective field of view")]
    OutsideFov,
    #[error("argument outside the valid domain: {0}")]
    Domain(String),
    #[error("jacobian determinant is singular ({0:e})")]
    SingularJacobian(f64),
    #[error("invalid projection spec: {0}")]
    InvalidSpec(String),
    #[error("incompatible specs: {0}")]
    IncompatibleSpecs(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("input too small: {0}")]
    TooSmall(String),
    #[error("patch at latitude {phi_deg:.3} deg with fov {fov_deg:.3} deg overlaps a pole")]
    PoleOverlap { phi_deg: f64, fov_deg: f64 },
    #[error("validity mask has no true pixel")]
    EmptyMask,
    #[error("window size {window} does not divide {height}x{width}")]
    IndivisibleWindow {
        window: usize,
        height: usize,
        width: usize,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the filesystem or codecs rather than of the input's content.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Image { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
