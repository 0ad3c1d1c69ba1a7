use super::tensor::FeatureMap;
use crate::error::{Error, Result};
use crate::grid::ImageGrid;

/// One sampled reference point and where its offset moves it, as `(row, col)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetPoint {
    pub reference: (f64, f64),
    pub displaced: (f64, f64),
    pub magnitude: f64,
}

#[derive(Debug, Clone)]
pub struct OffsetHeatmap {
    pub points: Vec<OffsetPoint>,
    /// RGB raster: red marks reference points, green the displaced points,
    /// blue the displacement magnitude (normalized to the largest) at the reference.
    pub image: ImageGrid,
}

/// Renders the `(Δy, Δx)` pair of kernel tap `tap` every `stride` pixels.
pub fn offsets_heatmap(field: &FeatureMap, tap: usize, stride: usize) -> Result<OffsetHeatmap> {
    if stride == 0 {
        return Err(Error::Domain("stride must be positive".into()));
    }
    if field.channels() % 2 != 0 || 2 * tap + 2 > field.channels() {
        return Err(Error::ShapeMismatch(format!(
            "tap {tap} not present in a {}-channel offset field",
            field.channels()
        )));
    }
    let (h, w) = (field.height(), field.width());
    let mut points = Vec::new();
    for m in (0..h).step_by(stride) {
        for n in (0..w).step_by(stride) {
            let dy = field.get(2 * tap, m, n);
            let dx = field.get(2 * tap + 1, m, n);
            points.push(OffsetPoint {
                reference: (m as f64, n as f64),
                displaced: (m as f64 + dy, n as f64 + dx),
                magnitude: dy.hypot(dx),
            });
        }
    }
    let max = points.iter().map(|p| p.magnitude).fold(0.0, f64::max);
    let mut image = ImageGrid::zeros(h, w, 3);
    for p in &points {
        let (m, n) = (p.reference.0 as usize, p.reference.1 as usize);
        image.set(m, n, 0, 1.0);
        image.set(m, n, 2, if max > 0.0 { p.magnitude / max } else { 0.0 });
    }
    for p in &points {
        let (y, x) = (p.displaced.0.round(), p.displaced.1.round());
        if (0.0..h as f64).contains(&y) && (0.0..w as f64).contains(&x) {
            image.set(y as usize, x as usize, 1, 1.0);
        }
    }
    Ok(OffsetHeatmap { points, image })
}
