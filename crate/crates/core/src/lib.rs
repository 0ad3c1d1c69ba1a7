//! Geometry, resampling, degradation, augmentation and quality metrics for
//! omnidirectional (360°) images, plus forward reference implementations of
//! distortion-aware deformable attention and convolution blocks.
//!
//! Angles are radians everywhere in this crate. Rasters use a half-pixel
//! centre rule: pixel `(m, n)` sits at fractional index `(m, n)` and covers
//! `[m - 0.5, m + 0.5)`; the top row of an ERP raster is the north pole.

pub mod augment;
pub mod degradation;
mod error;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod metrics;
pub mod modulation;
pub mod resample;
pub mod synthetic;

pub use error::{Error, Result};
pub use grid::{ImageGrid, ValidityMask};
