//! Pseudo-ERP patch synthesis from plain images.
//!
//! Each image is split into three vertical strips assigned base latitudes
//! φ_h = −30°, 0°, +30°. Square windows slide over each strip; every window
//! gets a latitude jitter z₀ cycling through (−15°, 0°, +15°), is treated as
//! a 90° perspective view centred at Φ_p = φ_h + z₀, projected onto an ERP
//! canvas, and cropped to the largest rectangle free of unmapped pixels.

use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PerspectiveParams, ProjectionSpec};
use crate::grid::{ImageGrid, ValidityMask};
use crate::io::{read_image, write_png};
use crate::resample::{warp, OutOfBounds, SampleSpec};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentConfig {
    /// Perspective field of view, radians.
    pub fov: f64,
    /// Base latitude of each strip, left to right, degrees.
    pub phi_h_deg: [f64; 3],
    /// Latitude jitter cycle, degrees.
    pub z0_deg: [f64; 3],
    /// Window side in source pixels; defaults to the strip width.
    pub window: Option<usize>,
    /// Window stride; defaults to the window side.
    pub stride: Option<usize>,
    /// Patches with a shorter side are dropped.
    pub min_patch: usize,
    /// ERP canvas height; the canvas is twice as wide.
    pub erp_canvas: usize,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            fov: FRAC_PI_2,
            phi_h_deg: [-30.0, 0.0, 30.0],
            z0_deg: [-15.0, 0.0, 15.0],
            window: None,
            stride: None,
            min_patch: 256,
            erp_canvas: 1024,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fov > 0.0 && self.fov < std::f64::consts::PI) {
            return Err(Error::Config(format!("fov {} outside (0, π)", self.fov)));
        }
        if self.min_patch == 0 {
            return Err(Error::Config("min_patch must be at least 1".into()));
        }
        if self.window == Some(0) || self.stride == Some(0) {
            return Err(Error::Config("window and stride must be at least 1".into()));
        }
        if self.erp_canvas == 0 {
            return Err(Error::Config("ERP canvas height must be positive".into()));
        }
        Ok(())
    }
}

/// One emitted patch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchRecord {
    pub source_id: String,
    pub sub_image: usize,
    /// `[row, col]` of the window's top-left corner inside its strip.
    pub window_origin: [usize; 2],
    pub phi_p_deg: f64,
    /// `[height, width]` of the written patch.
    pub patch_size: [usize; 2],
    pub file_name: String,
}

/// Splits an image into three strips of equal width; the last strip takes
/// the remainder columns.
pub fn split_three(img: &ImageGrid) -> Result<[ImageGrid; 3]> {
    if img.width() < 3 || img.height() == 0 {
        return Err(Error::TooSmall(format!(
            "need at least 3 columns to split, got {}x{}",
            img.height(),
            img.width()
        )));
    }
    let base = img.width() / 3;
    let widths = [base, base, img.width() - 2 * base];
    let h = img.height();
    Ok([
        img.crop(0, 0, h, widths[0])?,
        img.crop(0, base, h, widths[1])?,
        img.crop(0, 2 * base, h, widths[2])?,
    ])
}

/// Projects a plain patch, treated as a perspective view centred at
/// latitude `phi_p`, onto the ERP canvas.
pub fn perspective_patch_to_erp(
    patch: &ImageGrid,
    phi_p: f64,
    cfg: &AugmentConfig,
) -> Result<(ImageGrid, ValidityMask)> {
    cfg.validate()?;
    // touching the pole on the frustum boundary is allowed
    if phi_p.abs() + cfg.fov / 2.0 > FRAC_PI_2 + 1e-12 {
        return Err(Error::PoleOverlap {
            phi_deg: phi_p.to_degrees(),
            fov_deg: cfg.fov.to_degrees(),
        });
    }
    let src = ProjectionSpec::perspective(
        patch.height(),
        patch.width(),
        PerspectiveParams::new(cfg.fov, 0.0, phi_p),
    );
    let dst = ProjectionSpec::erp(cfg.erp_canvas);
    warp(patch, &src, &dst, SampleSpec::bicubic(OutOfBounds::ClampEdge))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

impl Rect {
    pub fn area(&self) -> usize {
        self.height * self.width
    }

    // larger area first, then topmost, leftmost, widest
    fn better_than(&self, other: &Rect) -> bool {
        (self.area(), std::cmp::Reverse(self.top), std::cmp::Reverse(self.left), self.width)
            > (other.area(), std::cmp::Reverse(other.top), std::cmp::Reverse(other.left), other.width)
    }
}

/// Largest all-true axis-aligned rectangle; ties go to the topmost, then
/// leftmost, then widest candidate.
pub fn maximal_rectangle(mask: &ValidityMask) -> Option<Rect> {
    let (h, w) = (mask.height(), mask.width());
    let mut heights = vec![0usize; w];
    let mut left = vec![0usize; w];
    let mut right = vec![0usize; w];
    let mut stack: Vec<usize> = Vec::with_capacity(w);
    let mut best: Option<Rect> = None;
    for m in 0..h {
        for (n, hn) in heights.iter_mut().enumerate() {
            *hn = if mask.get(m, n) { *hn + 1 } else { 0 };
        }
        // nearest strictly lower bar on each side
        stack.clear();
        for n in 0..w {
            while stack.last().is_some_and(|&s| heights[s] >= heights[n]) {
                stack.pop();
            }
            left[n] = stack.last().map_or(0, |&s| s + 1);
            stack.push(n);
        }
        stack.clear();
        for n in (0..w).rev() {
            while stack.last().is_some_and(|&s| heights[s] >= heights[n]) {
                stack.pop();
            }
            right[n] = stack.last().copied().unwrap_or(w);
            stack.push(n);
        }
        for n in 0..w {
            if heights[n] == 0 {
                continue;
            }
            let cand = Rect {
                top: m + 1 - heights[n],
                left: left[n],
                height: heights[n],
                width: right[n] - left[n],
            };
            if best.map_or(true, |b| cand.better_than(&b)) {
                best = Some(cand);
            }
        }
    }
    best
}

/// Crops to the largest rectangle in which every pixel is mask-true.
pub fn crop_black_border(img: &ImageGrid, mask: &ValidityMask) -> Result<ImageGrid> {
    if (mask.height(), mask.width()) != (img.height(), img.width()) {
        return Err(Error::ShapeMismatch("mask does not match image".into()));
    }
    let r = maximal_rectangle(mask).ok_or(Error::EmptyMask)?;
    img.crop(r.top, r.left, r.height, r.width)
}

/// Window origins `(row, col)` over a strip, in raster order.
pub fn window_origins(strip_h: usize, strip_w: usize, cfg: &AugmentConfig) -> (usize, Vec<(usize, usize)>) {
    let window = cfg.window.unwrap_or(strip_w);
    let stride = cfg.stride.unwrap_or(window);
    if window == 0 || window > strip_h || window > strip_w {
        return (window, Vec::new());
    }
    let rows = (0..=strip_h - window).step_by(stride);
    let origins = rows
        .flat_map(|r| (0..=strip_w - window).step_by(stride).map(move |c| (r, c)))
        .collect();
    (window, origins)
}

/// A synthesized patch before it is written.
#[derive(Debug, Clone)]
pub struct Patch {
    pub record: PatchRecord,
    pub image: ImageGrid,
}

/// Runs the whole recipe on one in-memory image.
pub fn synthesize_image(img: &ImageGrid, source_id: &str, cfg: &AugmentConfig) -> Result<Vec<Patch>> {
    cfg.validate()?;
    let strips = split_three(img)?;
    let mut counter = 0usize;
    let mut patches = Vec::new();
    for (sub, strip) in strips.iter().enumerate() {
        let (window, origins) = window_origins(strip.height(), strip.width(), cfg);
        for (idx, &(r, c)) in origins.iter().enumerate() {
            let z0 = cfg.z0_deg[counter % cfg.z0_deg.len()];
            counter += 1;
            let phi_p_deg = cfg.phi_h_deg[sub] + z0;
            let view = strip.crop(r, c, window, window)?;
            let (canvas, mask) = perspective_patch_to_erp(&view, phi_p_deg.to_radians(), cfg)?;
            let patch = match crop_black_border(&canvas, &mask) {
                Ok(p) => p,
                Err(Error::EmptyMask) => continue,
                Err(e) => return Err(e),
            };
            if patch.height().min(patch.width()) < cfg.min_patch {
                continue;
            }
            patches.push(Patch {
                record: PatchRecord {
                    source_id: source_id.to_string(),
                    sub_image: sub,
                    window_origin: [r, c],
                    phi_p_deg,
                    patch_size: [patch.height(), patch.width()],
                    file_name: format!("{source_id}_s{sub}_w{idx:03}.png"),
                },
                image: patch,
            });
        }
    }
    Ok(patches)
}

#[derive(Debug, Default)]
pub struct SynthesisReport {
    pub records: Vec<PatchRecord>,
    pub sources: usize,
    /// Files that could not be processed, with the reason.
    pub failures: Vec<(PathBuf, String)>,
}

fn is_raster(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg"))
        .unwrap_or(false)
}

/// Lists PNG/JPEG files of a directory in sorted order.
pub fn list_sources(source_dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(source_dir).map_err(|source| Error::Io {
        path: source_dir.to_path_buf(),
        source,
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_raster(p))
        .collect();
    files.sort();
    Ok(files)
}

fn process_file(path: &Path, cfg: &AugmentConfig, out_dir: &Path, deep: bool) -> Result<Vec<PatchRecord>> {
    let img = read_image(path)?;
    let id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("image")
        .to_string();
    let patches = synthesize_image(&img, &id, cfg)?;
    patches
        .into_iter()
        .map(|p| {
            write_png(&out_dir.join(&p.record.file_name), &p.image, deep)?;
            Ok(p.record)
        })
        .collect()
}

/// Synthesizes patches for every image in `source_dir`, writes them and
/// `manifest.json` to `out_dir`. Unreadable files are reported and skipped.
pub fn synthesize_dataset(source_dir: &Path, cfg: &AugmentConfig, out_dir: &Path, deep: bool) -> Result<SynthesisReport> {
    cfg.validate()?;
    let sources = list_sources(source_dir)?;
    fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let results: Vec<(PathBuf, Result<Vec<PatchRecord>>)> = sources
        .par_iter()
        .map(|p| (p.clone(), process_file(p, cfg, out_dir, deep)))
        .collect();
    let mut report = SynthesisReport {
        sources: sources.len(),
        ..SynthesisReport::default()
    };
    for (path, result) in results {
        match result {
            Ok(records) => report.records.extend(records),
            Err(e) => report.failures.push((path, e.to_string())),
        }
    }
    let manifest = serde_json::to_string_pretty(&report.records)?;
    let manifest_path = out_dir.join(MANIFEST_FILE);
    fs::write(&manifest_path, manifest + "\n").map_err(|source| Error::Io {
        path: manifest_path,
        source,
    })?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn split_widths() {
        for (w, expect) in [(300, [100, 100, 100]), (301, [100, 100, 101]), (3, [1, 1, 1])] {
            let img = ImageGrid::from_fn(2, w, 1, |m, n, _| (m * w + n) as f64);
            let parts = split_three(&img).unwrap();
            assert_eq!(parts.each_ref().map(|p| p.width()), expect);
            // concatenation reproduces the input
            let mut n0 = 0;
            for p in &parts {
                for m in 0..2 {
                    for n in 0..p.width() {
                        assert_eq!(p.get(m, n, 0), img.get(m, n0 + n, 0));
                    }
                }
                n0 += p.width();
            }
        }
        assert!(matches!(split_three(&ImageGrid::zeros(4, 2, 1)), Err(Error::TooSmall(_))));
    }

    #[test]
    fn crop_examples() {
        let img = ImageGrid::from_fn(4, 5, 1, |m, n, _| (m * 5 + n) as f64);
        let all = ValidityMask::filled(4, 5, true);
        assert_eq!(crop_black_border(&img, &all).unwrap(), img);
        let mut one = ValidityMask::filled(4, 5, false);
        one.set(2, 3, true);
        let c = crop_black_border(&img, &one).unwrap();
        assert_eq!(c.shape(), (1, 1, 1));
        assert_eq!(c.get(0, 0, 0), 13.0);
        assert!(matches!(
            crop_black_border(&img, &ValidityMask::filled(4, 5, false)),
            Err(Error::EmptyMask)
        ));
    }

    #[test]
    fn ties_prefer_topmost_then_leftmost() {
        // two disjoint 2x2 blocks of equal area
        let mask = ValidityMask::from_fn(6, 6, |m, n| (m >= 4 && n < 2) || (m < 2 && n >= 4));
        assert_eq!(
            maximal_rectangle(&mask),
            Some(Rect { top: 0, left: 4, height: 2, width: 2 })
        );
        let mask = ValidityMask::from_fn(3, 7, |m, n| m == 1 && n != 3);
        assert_eq!(
            maximal_rectangle(&mask),
            Some(Rect { top: 1, left: 0, height: 1, width: 3 })
        );
    }

    fn brute_force(mask: &ValidityMask) -> Option<Rect> {
        let (h, w) = (mask.height(), mask.width());
        let mut best: Option<Rect> = None;
        for top in 0..h {
            for left in 0..w {
                for bottom in top..h {
                    for right in left..w {
                        let ok = (top..=bottom).all(|m| (left..=right).all(|n| mask.get(m, n)));
                        if !ok {
                            continue;
                        }
                        let r = Rect { top, left, height: bottom - top + 1, width: right - left + 1 };
                        if best.map_or(true, |b| r.better_than(&b)) {
                            best = Some(r);
                        }
                    }
                }
            }
        }
        best
    }

    #[test]
    fn maximal_rectangle_matches_enumeration_on_small_masks() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..40 {
            let (h, w) = (rng.gen_range(1..9), rng.gen_range(1..9));
            let p: f64 = rng.gen_range(0.3..0.9);
            let mask = ValidityMask::from_fn(h, w, |_, _| rng.gen_bool(p));
            assert_eq!(maximal_rectangle(&mask), brute_force(&mask));
        }
    }

    #[test]
    fn pole_overlap_is_rejected() {
        let cfg = AugmentConfig { erp_canvas: 32, ..AugmentConfig::default() };
        let patch = ImageGrid::filled(8, 8, 1, 1.0);
        assert!(matches!(
            perspective_patch_to_erp(&patch, 50f64.to_radians(), &cfg),
            Err(Error::PoleOverlap { .. })
        ));
        assert!(perspective_patch_to_erp(&patch, 45f64.to_radians(), &cfg).is_ok());
    }

    #[test]
    fn equatorial_patch_is_symmetric() {
        let cfg = AugmentConfig { erp_canvas: 128, ..AugmentConfig::default() };
        let patch = ImageGrid::filled(32, 32, 1, 0.8);
        let (canvas, mask) = perspective_patch_to_erp(&patch, 0.0, &cfg).unwrap();
        assert!(mask.count() > 0);
        for m in 0..128 {
            for n in 0..256 {
                assert_eq!(mask.get(m, n), mask.get(127 - m, n));
                if mask.get(m, n) {
                    assert!((canvas.get(m, n, 0) - 0.8).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn window_plan() {
        let cfg = AugmentConfig::default();
        let (win, origins) = window_origins(1356, 680, &cfg);
        assert_eq!(win, 680);
        assert_eq!(origins, vec![(0, 0)]);
        let cfg = AugmentConfig { window: Some(100), stride: Some(60), ..AugmentConfig::default() };
        let (_, origins) = window_origins(220, 160, &cfg);
        assert_eq!(origins, vec![(0, 0), (0, 60), (60, 0), (60, 60), (120, 0), (120, 60)]);
    }
}
