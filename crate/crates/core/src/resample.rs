//! Point samplers, the anti-aliased bicubic rescaler and the inverse-map warper.
//!
//! Sample positions are fractional pixel indices: `(x, y) = (n, m)` is the
//! centre of pixel `(m, n)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Projection, ProjectionSpec};
use crate::grid::{ImageGrid, ValidityMask};

/// Bicubic kernel parameter of the anti-aliased reference resampler.
pub const BICUBIC_A: f64 = -0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Bilinear,
    /// Point bicubic (`a = −0.5`) when warping; width-scaled when resizing.
    BicubicAntialiased,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutOfBounds {
    /// Taps outside the raster read as zero.
    Zero,
    /// Taps are clamped to the nearest edge pixel.
    ClampEdge,
    /// Columns wrap around (ERP longitude), rows clamp.
    WrapLongitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleSpec {
    pub kernel: Kernel,
    pub out_of_bounds: OutOfBounds,
}

impl SampleSpec {
    pub fn new(kernel: Kernel, out_of_bounds: OutOfBounds) -> Self {
        Self {
            kernel,
            out_of_bounds,
        }
    }

    pub fn bicubic(out_of_bounds: OutOfBounds) -> Self {
        Self::new(Kernel::BicubicAntialiased, out_of_bounds)
    }

    pub fn bilinear(out_of_bounds: OutOfBounds) -> Self {
        Self::new(Kernel::Bilinear, out_of_bounds)
    }
}

/// Keys cubic convolution kernel with `a = −0.5`.
#[inline]
pub fn cubic_weight(x: f64) -> f64 {
    let a = BICUBIC_A;
    let x = x.abs();
    if x < 1.0 {
        ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0
    } else if x < 2.0 {
        (((x - 5.0) * x + 8.0) * x - 4.0) * a
    } else {
        0.0
    }
}

#[inline]
fn resolve_row(idx: isize, len: usize, policy: OutOfBounds) -> Option<usize> {
    if (0..len as isize).contains(&idx) {
        return Some(idx as usize);
    }
    match policy {
        OutOfBounds::Zero => None,
        OutOfBounds::ClampEdge | OutOfBounds::WrapLongitude => {
            Some(idx.clamp(0, len as isize - 1) as usize)
        }
    }
}

#[inline]
fn resolve_col(idx: isize, len: usize, policy: OutOfBounds) -> Option<usize> {
    if (0..len as isize).contains(&idx) {
        return Some(idx as usize);
    }
    match policy {
        OutOfBounds::Zero => None,
        OutOfBounds::ClampEdge => Some(idx.clamp(0, len as isize - 1) as usize),
        OutOfBounds::WrapLongitude => Some(idx.rem_euclid(len as isize) as usize),
    }
}

/// Tap offsets and weights along one axis.
#[inline]
fn axis_taps(pos: f64, kernel: Kernel) -> (isize, [f64; 4], usize) {
    let base = pos.floor();
    let t = pos - base;
    match kernel {
        Kernel::Bilinear => (base as isize, [1.0 - t, t, 0.0, 0.0], 2),
        Kernel::BicubicAntialiased => (
            base as isize - 1,
            [
                cubic_weight(1.0 + t),
                cubic_weight(t),
                cubic_weight(1.0 - t),
                cubic_weight(2.0 - t),
            ],
            4,
        ),
    }
}

/// Smallest kept-weight fraction accepted when a source mask drops taps.
const MIN_MASKED_WEIGHT: f64 = 0.25;

/// Samples `img` at `(x, y)` into `out`.
///
/// With a source mask, taps on invalid pixels are dropped and the remaining
/// weights renormalized; the sample is rejected (returns `false`, `out`
/// zeroed) when too little weight survives.
pub(crate) fn sample_into(
    img: &ImageGrid,
    mask: Option<&ValidityMask>,
    x: f64,
    y: f64,
    spec: SampleSpec,
    out: &mut [f64],
) -> bool {
    let channels = img.channels();
    out.fill(0.0);
    let (r0, wy, ny) = axis_taps(y, spec.kernel);
    let (c0, wx, nx) = axis_taps(x, spec.kernel);
    let mut kept = 0.0;
    for (i, &wr) in wy[..ny].iter().enumerate() {
        if wr == 0.0 {
            continue;
        }
        let row = resolve_row(r0 + i as isize, img.height(), spec.out_of_bounds);
        for (j, &wc) in wx[..nx].iter().enumerate() {
            if wc == 0.0 {
                continue;
            }
            let w = wr * wc;
            let col = resolve_col(c0 + j as isize, img.width(), spec.out_of_bounds);
            match (row, col) {
                (Some(r), Some(c)) => {
                    if let Some(m) = mask {
                        if !m.get(r, c) {
                            continue;
                        }
                    }
                    kept += w;
                    for (o, v) in out.iter_mut().zip(img.pixel(r, c)) {
                        *o += w * v;
                    }
                }
                // zero padding contributes weight but no value
                _ => kept += w,
            }
        }
    }
    if mask.is_some() {
        if kept < MIN_MASKED_WEIGHT {
            out[..channels].fill(0.0);
            return false;
        }
        if kept != 1.0 {
            out.iter_mut().for_each(|o| *o /= kept);
        }
    }
    true
}

/// Four-neighbour bilinear blend at fractional index `(x, y)`.
pub fn bilinear_sample(img: &ImageGrid, x: f64, y: f64, oob: OutOfBounds) -> Vec<f64> {
    let mut out = vec![0.0; img.channels()];
    sample_into(img, None, x, y, SampleSpec::bilinear(oob), &mut out);
    out
}

/// Sixteen-tap bicubic blend (`a = −0.5`) at fractional index `(x, y)`.
pub fn bicubic_sample(img: &ImageGrid, x: f64, y: f64, oob: OutOfBounds) -> Vec<f64> {
    let mut out = vec![0.0; img.channels()];
    sample_into(img, None, x, y, SampleSpec::bicubic(oob), &mut out);
    out
}

/// Normalized contribution window of one output sample.
#[derive(Debug, Clone)]
struct Taps {
    start: usize,
    weights: Vec<f64>,
}

/// Width-scaled bicubic weights, mirroring the anti-aliased resampler:
/// support grows with the downscale factor and weights are renormalized
/// after clipping to the input.
fn resize_taps(in_size: usize, out_size: usize) -> Vec<Taps> {
    let scale = in_size as f64 / out_size as f64;
    let filterscale = scale.max(1.0);
    let support = 2.0 * filterscale;
    let inv = 1.0 / filterscale;
    (0..out_size)
        .map(|xx| {
            let center = (xx as f64 + 0.5) * scale;
            // truncation toward zero, as the reference resampler's integer cast
            let xmin = ((center - support + 0.5) as isize).max(0) as usize;
            let xmax = ((center + support + 0.5) as isize).min(in_size as isize) as usize;
            let mut weights: Vec<f64> = (xmin..xmax)
                .map(|x| cubic_weight((x as f64 - center + 0.5) * inv))
                .collect();
            let total: f64 = weights.iter().sum();
            if total != 0.0 {
                weights.iter_mut().for_each(|w| *w /= total);
            }
            Taps {
                start: xmin,
                weights,
            }
        })
        .collect()
}

/// Anti-aliased separable bicubic rescale to `out_h × out_w`.
pub fn resize_antialiased(img: &ImageGrid, out_h: usize, out_w: usize) -> Result<ImageGrid> {
    if out_h == 0 || out_w == 0 {
        return Err(Error::Domain(format!("target size {out_h}x{out_w} is empty")));
    }
    if img.height() == 0 || img.width() == 0 {
        return Err(Error::TooSmall("cannot resize an empty image".into()));
    }
    let ch = img.channels();
    let (in_h, in_w) = (img.height(), img.width());

    let col_taps = resize_taps(in_w, out_w);
    let mut horiz = vec![0.0; in_h * out_w * ch];
    horiz
        .par_chunks_mut(out_w * ch)
        .enumerate()
        .for_each(|(m, row_out)| {
            let row = img.row(m);
            for (n, taps) in col_taps.iter().enumerate() {
                let out = &mut row_out[n * ch..(n + 1) * ch];
                for (k, &w) in taps.weights.iter().enumerate() {
                    let src = &row[(taps.start + k) * ch..(taps.start + k + 1) * ch];
                    for (o, v) in out.iter_mut().zip(src) {
                        *o += w * v;
                    }
                }
            }
        });

    let row_taps = resize_taps(in_h, out_h);
    let mut data = vec![0.0; out_h * out_w * ch];
    let stride = out_w * ch;
    data.par_chunks_mut(stride)
        .zip(row_taps.par_iter())
        .for_each(|(row_out, taps)| {
            for (k, &w) in taps.weights.iter().enumerate() {
                let src = &horiz[(taps.start + k) * stride..(taps.start + k + 1) * stride];
                for (o, v) in row_out.iter_mut().zip(src) {
                    *o += w * v;
                }
            }
        });
    ImageGrid::new(out_h, out_w, ch, data)
}

fn check_raster(img: &ImageGrid, spec: &ProjectionSpec, what: &str) -> Result<()> {
    spec.validate()?;
    if img.height() != spec.height || img.width() != spec.width {
        return Err(Error::IncompatibleSpecs(format!(
            "{what} raster {}x{} does not match its spec {}x{}",
            img.height(),
            img.width(),
            spec.height,
            spec.width
        )));
    }
    Ok(())
}

/// Re-projects `src` onto `dst_spec` by inverse mapping every destination
/// pixel centre through the sphere.
///
/// Destination pixels with no source preimage are masked false and zero.
pub fn warp(
    src: &ImageGrid,
    src_spec: &ProjectionSpec,
    dst_spec: &ProjectionSpec,
    sample: SampleSpec,
) -> Result<(ImageGrid, ValidityMask)> {
    warp_masked(src, None, src_spec, dst_spec, sample)
}

/// [`warp`] reading only source pixels flagged valid in `src_mask`.
pub fn warp_masked(
    src: &ImageGrid,
    src_mask: Option<&ValidityMask>,
    src_spec: &ProjectionSpec,
    dst_spec: &ProjectionSpec,
    sample: SampleSpec,
) -> Result<(ImageGrid, ValidityMask)> {
    check_raster(src, src_spec, "source")?;
    dst_spec.validate()?;
    if sample.out_of_bounds == OutOfBounds::WrapLongitude
        && !matches!(src_spec.projection, Projection::Erp)
    {
        return Err(Error::IncompatibleSpecs(
            "longitude wrap requires an ERP source".into(),
        ));
    }
    if let Some(m) = src_mask {
        if m.height() != src.height() || m.width() != src.width() {
            return Err(Error::ShapeMismatch("source mask does not match source".into()));
        }
    }
    let ch = src.channels();
    let (h, w) = (dst_spec.height, dst_spec.width);
    let mut data = vec![0.0; h * w * ch];
    let mut valid = vec![false; h * w];
    data.par_chunks_mut(w * ch)
        .zip(valid.par_chunks_mut(w))
        .enumerate()
        .for_each(|(m, (row, row_valid))| {
            for n in 0..w {
                let target = dst_spec
                    .sphere_from_pixel(m as f64, n as f64)
                    .and_then(|s| src_spec.pixel_from_sphere(s));
                if let Ok((y, x)) = target {
                    let out = &mut row[n * ch..(n + 1) * ch];
                    row_valid[n] = sample_into(src, src_mask, x, y, sample, out);
                }
            }
        });
    Ok((
        ImageGrid::new(h, w, ch, data)?,
        ValidityMask::new(h, w, valid)?,
    ))
}
