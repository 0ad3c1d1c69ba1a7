use std::f64::consts::PI;

use super::tensor::FeatureMap;
use crate::error::{Error, Result};

/// Latitude distortion map and window position encoding of one raster size.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionMaps {
    /// `1 × H × W`, row `m` holds `cos((m + 0.5 − H/2)/H · π)`.
    pub c_d: FeatureMap,
    /// `2 × H × W`, (row, column) position inside the attention window in `[−1, 1]`.
    pub c_w: FeatureMap,
}

impl ConditionMaps {
    pub fn new(height: usize, width: usize, window: usize) -> Result<Self> {
        Ok(Self {
            c_d: build_cd(height, width),
            c_w: build_cw(height, width, window)?,
        })
    }

    pub fn height(&self) -> usize {
        self.c_d.height()
    }

    pub fn width(&self) -> usize {
        self.c_d.width()
    }

    /// `concat(c_d, c_w)`, the DAAB offset-network input.
    pub fn stacked(&self) -> Result<FeatureMap> {
        FeatureMap::concat(&[&self.c_d, &self.c_w])
    }
}

pub fn build_cd(rows: usize, cols: usize) -> FeatureMap {
    let m_total = rows as f64;
    FeatureMap::from_fn(1, rows, cols, |_, m, _| {
        ((m as f64 + 0.5 - m_total / 2.0) / m_total * PI).cos()
    })
}

fn window_coord(k: usize, window: usize) -> f64 {
    if window == 1 {
        0.0
    } else {
        -1.0 + 2.0 * k as f64 / (window - 1) as f64
    }
}

pub fn build_cw(height: usize, width: usize, window: usize) -> Result<FeatureMap> {
    if window == 0 || height % window != 0 || width % window != 0 {
        return Err(Error::IndivisibleWindow {
            window,
            height,
            width,
        });
    }
    Ok(FeatureMap::from_fn(2, height, width, |c, m, n| {
        if c == 0 {
            window_coord(m % window, window)
        } else {
            window_coord(n % window, window)
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cd_examples() {
        let cd = build_cd(2, 3);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((cd.get(0, 0, 0) - r).abs() < 1e-15 && (cd.get(0, 1, 2) - r).abs() < 1e-15);
        let cd = build_cd(4, 1);
        assert!((cd.get(0, 1, 0) - 0.923_879_532_511_286_7).abs() < 1e-15);
        let cd = build_cd(37, 2);
        for m in 0..37 {
            assert_eq!(cd.get(0, m, 0), cd.get(0, 36 - m, 1));
            assert!(cd.get(0, m, 0) > 0.0 && cd.get(0, m, 0) <= 1.0);
        }
    }

    #[test]
    fn cw_examples() {
        let cw = build_cw(4, 6, 2).unwrap();
        for m in 0..4 {
            for n in 0..6 {
                let row = cw.get(0, m, n);
                assert_eq!(row, if m % 2 == 0 { -1.0 } else { 1.0 });
                if m + 2 < 4 {
                    assert_eq!(cw.get(0, m + 2, n), row);
                    assert_eq!(cw.get(1, m + 2, n), cw.get(1, m, n));
                }
            }
        }
        assert!(build_cw(3, 3, 1).unwrap().data().iter().all(|&v| v == 0.0));
        assert!(matches!(build_cw(4, 5, 2), Err(Error::IndivisibleWindow { .. })));
        let cw = build_cw(8, 8, 4).unwrap();
        assert!((cw.get(1, 0, 1) + 1.0 / 3.0).abs() < 1e-15);
    }
}
