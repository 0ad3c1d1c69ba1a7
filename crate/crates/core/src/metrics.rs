//! PSNR, SSIM and their spherically weighted variants.
//!
//! Multi-channel inputs are reduced to the mean of their channels; call the
//! metric on [`ImageGrid::channel`] slices for per-channel figures.

use crate::error::{Error, Result};
use crate::grid::ImageGrid;

/// PSNR reported for identical images.
pub const PSNR_CAP_DB: f64 = 99.0;

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_C1: f64 = 0.01 * 0.01;
const SSIM_C2: f64 = 0.03 * 0.03;

/// Non-negative per-pixel weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMap {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl WeightMap {
    /// ERP weights `cos(((m + 0.5)/M − 0.5)·π)`, constant along each row.
    pub fn erp(height: usize, width: usize) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for m in 0..height {
            let w = (((m as f64 + 0.5) / height as f64 - 0.5) * std::f64::consts::PI).cos();
            data.extend(std::iter::repeat(w).take(width));
        }
        Self {
            height,
            width,
            data,
        }
    }

    pub fn constant(height: usize, width: usize, value: f64) -> Self {
        Self {
            height,
            width,
            data: vec![value; height * width],
        }
    }

    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != height * width {
            return Err(Error::ShapeMismatch(format!(
                "weight map length {} != {height}x{width}",
                data.len()
            )));
        }
        if data.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Domain("weights must be finite and non-negative".into()));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }
}

fn check_pair(a: &ImageGrid, b: &ImageGrid) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "{:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

fn check_weights(a: &ImageGrid, w: &WeightMap) -> Result<()> {
    if (w.height, w.width) != (a.height(), a.width()) {
        return Err(Error::ShapeMismatch(format!(
            "weights {}x{} vs image {}x{}",
            w.height,
            w.width,
            a.height(),
            a.width()
        )));
    }
    Ok(())
}

fn psnr_from_mse(mse: f64) -> f64 {
    if mse <= 0.0 {
        return PSNR_CAP_DB;
    }
    (10.0 * (1.0 / mse).log10()).min(PSNR_CAP_DB)
}

pub fn mse(a: &ImageGrid, b: &ImageGrid) -> Result<f64> {
    check_pair(a, b)?;
    let (a, b) = (a.luma(), b.luma());
    let sum: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.data().len() as f64)
}

pub fn weighted_mse(a: &ImageGrid, b: &ImageGrid, w: &WeightMap) -> Result<f64> {
    check_pair(a, b)?;
    check_weights(a, w)?;
    let (a, b) = (a.luma(), b.luma());
    let (mut num, mut den) = (0.0, 0.0);
    for ((x, y), wt) in a.data().iter().zip(b.data()).zip(&w.data) {
        num += wt * (x - y) * (x - y);
        den += wt;
    }
    if den <= 0.0 {
        return Err(Error::Domain("weights sum to zero".into()));
    }
    Ok(num / den)
}

/// `10·log10(1/MSE)` on unit-range intensities, capped at [`PSNR_CAP_DB`].
pub fn psnr(a: &ImageGrid, b: &ImageGrid) -> Result<f64> {
    mse(a, b).map(psnr_from_mse)
}

pub fn ws_psnr(a: &ImageGrid, b: &ImageGrid, w: &WeightMap) -> Result<f64> {
    weighted_mse(a, b, w).map(psnr_from_mse)
}

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut g = [0.0; SSIM_WINDOW];
    let half = (SSIM_WINDOW / 2) as f64;
    for (i, v) in g.iter_mut().enumerate() {
        let d = i as f64 - half;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let total: f64 = g.iter().sum();
    g.iter_mut().for_each(|v| *v /= total);
    g
}

/// Valid-region separable Gaussian filter of a single-channel plane.
fn filter_valid(src: &[f64], height: usize, width: usize, g: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = width - SSIM_WINDOW + 1;
    let oh = height - SSIM_WINDOW + 1;
    let mut horiz = vec![0.0; height * ow];
    for m in 0..height {
        for n in 0..ow {
            horiz[m * ow + n] = g
                .iter()
                .enumerate()
                .map(|(k, w)| w * src[m * width + n + k])
                .sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for m in 0..oh {
        for n in 0..ow {
            out[m * ow + n] = g
                .iter()
                .enumerate()
                .map(|(k, w)| w * horiz[(m + k) * ow + n])
                .sum();
        }
    }
    out
}

/// Per-pixel SSIM over the valid region; entry `(i, j)` belongs to image
/// pixel `(i + 5, j + 5)`.
pub fn ssim_map(a: &ImageGrid, b: &ImageGrid) -> Result<(usize, usize, Vec<f64>)> {
    check_pair(a, b)?;
    if a.height() < SSIM_WINDOW || a.width() < SSIM_WINDOW {
        return Err(Error::TooSmall(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {}x{}",
            a.height(),
            a.width()
        )));
    }
    let (a, b) = (a.luma(), b.luma());
    let (h, w) = (a.height(), a.width());
    let g = gaussian_window();
    let (x, y) = (a.data(), b.data());
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(p, q)| p * q).collect();
    let mu_x = filter_valid(x, h, w, &g);
    let mu_y = filter_valid(y, h, w, &g);
    let e_xx = filter_valid(&xx, h, w, &g);
    let e_yy = filter_valid(&yy, h, w, &g);
    let e_xy = filter_valid(&xy, h, w, &g);
    let map = (0..mu_x.len())
        .map(|i| {
            let (mx, my) = (mu_x[i], mu_y[i]);
            let sxx = e_xx[i] - mx * mx;
            let syy = e_yy[i] - my * my;
            let sxy = e_xy[i] - mx * my;
            ((2.0 * mx * my + SSIM_C1) * (2.0 * sxy + SSIM_C2))
                / ((mx * mx + my * my + SSIM_C1) * (sxx + syy + SSIM_C2))
        })
        .collect();
    Ok((h - SSIM_WINDOW + 1, w - SSIM_WINDOW + 1, map))
}

/// Single-scale SSIM (11×11 Gaussian, σ = 1.5), mean-pooled over the valid region.
pub fn ssim(a: &ImageGrid, b: &ImageGrid) -> Result<f64> {
    let (_, _, map) = ssim_map(a, b)?;
    Ok(map.iter().sum::<f64>() / map.len() as f64)
}

/// SSIM map pooled with the weights of each window's centre pixel.
pub fn ws_ssim(a: &ImageGrid, b: &ImageGrid, w: &WeightMap) -> Result<f64> {
    check_weights(a, w)?;
    let (oh, ow, map) = ssim_map(a, b)?;
    let off = SSIM_WINDOW / 2;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..oh {
        for j in 0..ow {
            let wt = w.get(i + off, j + off);
            num += wt * map[i * ow + j];
            den += wt;
        }
    }
    if den <= 0.0 {
        return Err(Error::Domain("weights sum to zero".into()));
    }
    Ok(num / den)
}

/// All four figures for one image pair.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MetricSet {
    pub psnr: f64,
    pub ssim: f64,
    pub ws_psnr: f64,
    pub ws_ssim: f64,
}

impl MetricSet {
    /// Evaluates every metric, using ERP weights for the spherical variants.
    pub fn evaluate(reference: &ImageGrid, candidate: &ImageGrid) -> Result<Self> {
        let w = WeightMap::erp(reference.height(), reference.width());
        Ok(Self {
            psnr: psnr(reference, candidate)?,
            ssim: ssim(reference, candidate)?,
            ws_psnr: ws_psnr(reference, candidate, &w)?,
            ws_ssim: ws_ssim(reference, candidate, &w)?,
        })
    }

    pub fn mean(sets: &[MetricSet]) -> Option<Self> {
        if sets.is_empty() {
            return None;
        }
        let n = sets.len() as f64;
        let sum = |f: fn(&MetricSet) -> f64| sets.iter().map(f).sum::<f64>() / n;
        Some(Self {
            psnr: sum(|s| s.psnr),
            ssim: sum(|s| s.ssim),
            ws_psnr: sum(|s| s.ws_psnr),
            ws_ssim: sum(|s| s.ws_ssim),
        })
    }
}
