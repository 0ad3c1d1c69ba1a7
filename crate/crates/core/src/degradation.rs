//! Fisheye downsampling: ERP → padded dual fisheye → uniform anti-aliased
//! bicubic downsampling of each disk → back to ERP.
//!
//! The dual pair is spliced horizontally: the front disk is centred on the
//! north pole and the back disk on the south pole. Each disk is rendered
//! with an aperture wider than a hemisphere so the reconversion never reads
//! kernel taps from beyond the rendered content.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{FisheyeParams, Hemisphere, ProjectionSpec};
use crate::grid::{ImageGrid, ValidityMask};
use crate::resample::{resize_antialiased, sample_into, warp, OutOfBounds, SampleSpec};

/// Default padded fisheye aperture: 200°.
pub const DEFAULT_PAD_APERTURE: f64 = 200.0 * PI / 180.0;

const MIN_DISK_COVERAGE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegradationConfig {
    /// Downscale factor. `1` is accepted as a pass-through for round-trip studies.
    pub scale: usize,
    /// Aperture the disks are rendered with, in `(π, 2π)`.
    pub pad_aperture: f64,
    /// Disk diameter in pixels; defaults to the ERP height.
    pub fisheye_resolution: Option<usize>,
}

impl Default for DegradationConfig {
    fn default() -> Self {
        Self {
            scale: 2,
            pad_aperture: DEFAULT_PAD_APERTURE,
            fisheye_resolution: None,
        }
    }
}

impl DegradationConfig {
    pub fn with_scale(scale: usize) -> Self {
        Self {
            scale,
            ..Self::default()
        }
    }

    /// Checks the config against an ERP height and returns the disk diameter.
    pub fn validate(&self, erp_height: usize) -> Result<usize> {
        if ![1, 2, 4, 8, 16].contains(&self.scale) {
            return Err(Error::Config(format!(
                "scale {} not in {{2, 4, 8, 16}}",
                self.scale
            )));
        }
        if !(self.pad_aperture > PI && self.pad_aperture < 2.0 * PI) {
            return Err(Error::Config(format!(
                "pad aperture {} outside (π, 2π)",
                self.pad_aperture
            )));
        }
        let resolution = self.fisheye_resolution.unwrap_or(erp_height);
        if resolution == 0 || resolution % self.scale != 0 {
            return Err(Error::Config(format!(
                "scale {} does not divide fisheye resolution {resolution}",
                self.scale
            )));
        }
        if erp_height % self.scale != 0 {
            return Err(Error::Config(format!(
                "scale {} does not divide ERP height {erp_height}",
                self.scale
            )));
        }
        Ok(resolution)
    }
}

/// A horizontally spliced fisheye pair with the disks' validity masks.
#[derive(Debug, Clone)]
pub struct DualFisheye {
    pub north: ImageGrid,
    pub south: ImageGrid,
    pub north_mask: ValidityMask,
    pub south_mask: ValidityMask,
    pub aperture: f64,
}

impl DualFisheye {
    pub fn diameter(&self) -> usize {
        self.north.height()
    }

    pub fn spec(&self, hemisphere: Hemisphere) -> ProjectionSpec {
        ProjectionSpec::fisheye(
            self.diameter(),
            FisheyeParams::horizontal(self.aperture).with_hemisphere(hemisphere),
        )
    }

    fn disk(&self, hemisphere: Hemisphere) -> (&ImageGrid, &ValidityMask) {
        match hemisphere {
            Hemisphere::North => (&self.north, &self.north_mask),
            Hemisphere::South => (&self.south, &self.south_mask),
        }
    }
}

fn check_erp(erp: &ImageGrid) -> Result<()> {
    if erp.height() == 0 || erp.width() != 2 * erp.height() {
        return Err(Error::Config(format!(
            "ERP raster {}x{} must have width = 2·height",
            erp.height(),
            erp.width()
        )));
    }
    Ok(())
}

/// Renders both disks of a dual fisheye from an ERP with any aperture.
pub fn render_dual_fisheye(erp: &ImageGrid, aperture: f64, diameter: usize) -> Result<DualFisheye> {
    check_erp(erp)?;
    let src = ProjectionSpec::erp(erp.height());
    let sample = SampleSpec::bicubic(OutOfBounds::WrapLongitude);
    let render = |hemisphere| {
        let dst = ProjectionSpec::fisheye(
            diameter,
            FisheyeParams::horizontal(aperture).with_hemisphere(hemisphere),
        );
        warp(erp, &src, &dst, sample)
    };
    let ((north, north_mask), (south, south_mask)) = (render(Hemisphere::North)?, render(Hemisphere::South)?);
    Ok(DualFisheye {
        north,
        south,
        north_mask,
        south_mask,
        aperture,
    })
}

/// Converts an ERP into the padded dual fisheye described by `cfg`.
pub fn erp_to_dual_fisheye(erp: &ImageGrid, cfg: &DegradationConfig) -> Result<DualFisheye> {
    check_erp(erp)?;
    let diameter = cfg.validate(erp.height())?;
    render_dual_fisheye(erp, cfg.pad_aperture, diameter)
}

/// Resamples a dual fisheye back to an ERP of the given height.
///
/// Each ERP pixel reads from the disk of its own hemisphere (hard split at
/// the equator); kernel taps on invalid disk pixels are dropped.
pub fn dual_fisheye_to_erp(dual: &DualFisheye, height: usize) -> Result<ImageGrid> {
    let dst = ProjectionSpec::erp(height);
    dst.validate()?;
    let specs = [dual.spec(Hemisphere::North), dual.spec(Hemisphere::South)];
    let ch = dual.north.channels();
    let width = dst.width;
    let sample = SampleSpec::bicubic(OutOfBounds::ClampEdge);
    let mut data = vec![0.0; height * width * ch];
    data.par_chunks_mut(width * ch).enumerate().for_each(|(m, row)| {
        for n in 0..width {
            let s = dst.sphere_from_pixel(m as f64, n as f64).expect("ERP pixel centre");
            let order = if s.phi() >= 0.0 { [0, 1] } else { [1, 0] };
            let out = &mut row[n * ch..(n + 1) * ch];
            for k in order {
                let hemisphere = if k == 0 { Hemisphere::North } else { Hemisphere::South };
                let (img, mask) = dual.disk(hemisphere);
                if let Ok((y, x)) = specs[k].pixel_from_sphere(s) {
                    if sample_into(img, Some(mask), x, y, sample, out) {
                        break;
                    }
                }
            }
        }
    });
    ImageGrid::new(height, width, ch, data)
}

/// Downscales one disk and its mask. Pixels near the disk rim, whose kernel
/// footprint straddles unrendered area, are renormalized by the valid
/// coverage; pixels with less than half coverage are dropped.
fn downsample_disk(img: &ImageGrid, mask: &ValidityMask, size: usize) -> Result<(ImageGrid, ValidityMask)> {
    if size == img.height() {
        return Ok((img.clone(), mask.clone()));
    }
    let mut small = resize_antialiased(img, size, size)?;
    let coverage = ImageGrid::new(
        mask.height(),
        mask.width(),
        1,
        mask.data().iter().map(|&v| if v { 1.0 } else { 0.0 }).collect(),
    )?;
    let coverage = resize_antialiased(&coverage, size, size)?;
    let mut small_mask = ValidityMask::filled(size, size, false);
    for m in 0..size {
        for n in 0..size {
            let c = coverage.get(m, n, 0);
            let valid = c >= MIN_DISK_COVERAGE;
            small_mask.set(m, n, valid);
            for k in 0..small.channels() {
                let v = if valid { small.get(m, n, k) / c } else { 0.0 };
                small.set(m, n, k, v);
            }
        }
    }
    Ok((small, small_mask))
}

/// Full fisheye-domain degradation of an HR ERP.
pub fn fisheye_downsample(erp_hr: &ImageGrid, cfg: &DegradationConfig) -> Result<ImageGrid> {
    let dual = erp_to_dual_fisheye(erp_hr, cfg)?;
    let size = dual.diameter() / cfg.scale;
    let (north, north_mask) = downsample_disk(&dual.north, &dual.north_mask, size)?;
    let (south, south_mask) = downsample_disk(&dual.south, &dual.south_mask, size)?;
    let lr = DualFisheye {
        north,
        south,
        north_mask,
        south_mask,
        aperture: dual.aperture,
    };
    dual_fisheye_to_erp(&lr, erp_hr.height() / cfg.scale)
}

/// Conventional degradation: anti-aliased bicubic downsampling of the ERP itself.
pub fn erp_downsample(erp_hr: &ImageGrid, scale: usize) -> Result<ImageGrid> {
    check_erp(erp_hr)?;
    if scale == 0 || erp_hr.height() % scale != 0 {
        return Err(Error::Config(format!(
            "scale {scale} does not divide ERP height {}",
            erp_hr.height()
        )));
    }
    resize_antialiased(erp_hr, erp_hr.height() / scale, erp_hr.width() / scale)
}
