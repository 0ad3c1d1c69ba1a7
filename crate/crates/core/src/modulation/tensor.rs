use crate::error::{Error, Result};
use crate::resample::OutOfBounds;

/// Channel-major `C × H × W` feature tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl FeatureMap {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != channels * height * width {
            return Err(Error::ShapeMismatch(format!(
                "feature data length {} != {channels}x{height}x{width}",
                data.len()
            )));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self {
            channels,
            height,
            width,
            data: vec![0.0; channels * height * width],
        }
    }

    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(channels * height * width);
        for c in 0..channels {
            for m in 0..height {
                for n in 0..width {
                    data.push(f(c, m, n));
                }
            }
        }
        Self {
            channels,
            height,
            width,
            data,
        }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, c: usize, m: usize, n: usize) -> f64 {
        self.data[(c * self.height + m) * self.width + n]
    }

    #[inline]
    pub fn set(&mut self, c: usize, m: usize, n: usize, v: f64) {
        self.data[(c * self.height + m) * self.width + n] = v;
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        let len = self.height * self.width;
        &self.data[c * len..(c + 1) * len]
    }

    /// Stacks maps of equal spatial size along the channel axis.
    pub fn concat(maps: &[&FeatureMap]) -> Result<Self> {
        let first = maps
            .first()
            .ok_or_else(|| Error::ShapeMismatch("nothing to concatenate".into()))?;
        let (h, w) = (first.height, first.width);
        if maps.iter().any(|m| (m.height, m.width) != (h, w)) {
            return Err(Error::ShapeMismatch("spatial sizes differ".into()));
        }
        let channels = maps.iter().map(|m| m.channels).sum();
        let data = maps.iter().flat_map(|m| m.data.iter().copied()).collect();
        Self::new(channels, h, w, data)
    }

    /// Bilinear read of channel `c` at fractional `(y, x)`.
    pub fn sample(&self, c: usize, y: f64, x: f64, oob: OutOfBounds) -> f64 {
        let (y0, x0) = (y.floor(), x.floor());
        let (fy, fx) = (y - y0, x - x0);
        let (y0, x0) = (y0 as isize, x0 as isize);
        let mut acc = 0.0;
        for (dy, wy) in [(0, 1.0 - fy), (1, fy)] {
            if wy == 0.0 {
                continue;
            }
            for (dx, wx) in [(0, 1.0 - fx), (1, fx)] {
                if wx == 0.0 {
                    continue;
                }
                if let Some(v) = self.tap(c, y0 + dy, x0 + dx, oob) {
                    acc += wy * wx * v;
                }
            }
        }
        acc
    }

    fn tap(&self, c: usize, m: isize, n: isize, oob: OutOfBounds) -> Option<f64> {
        let (h, w) = (self.height as isize, self.width as isize);
        let inside = (0..h).contains(&m) && (0..w).contains(&n);
        let (m, n) = match oob {
            OutOfBounds::Zero if !inside => return None,
            OutOfBounds::Zero => (m, n),
            OutOfBounds::ClampEdge => (m.clamp(0, h - 1), n.clamp(0, w - 1)),
            OutOfBounds::WrapLongitude => (m.clamp(0, h - 1), n.rem_euclid(w)),
        };
        Some(self.get(c, m as usize, n as usize))
    }
}

/// Dense row-major `rows × cols` matrix stored in single precision.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f32>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "matrix data length {} != {rows}x{cols}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite weight".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j] as f64
    }
}
