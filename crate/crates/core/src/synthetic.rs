//! Band-limited synthetic panoramas built from real spherical harmonics.

use crate::geometry::{ProjectionSpec, SphericalCoord};
use crate::grid::ImageGrid;

/// `0.5 + Σ c·Y_l^m(θ, φ)` with Schmidt semi-normalized harmonics, one
/// coefficient set per channel. Coefficients are scaled so values stay in `[0.05, 0.95]`.
#[derive(Debug, Clone)]
pub struct SphericalHarmonicField {
    max_degree: usize,
    // per channel: (l, m, coefficient)
    terms: Vec<Vec<(usize, isize, f64)>>,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SphericalHarmonicField {
    pub fn new(max_degree: usize, channels: usize, seed: u64) -> Self {
        let mut state = seed;
        let terms = (0..channels)
            .map(|_| {
                let mut t = Vec::new();
                for l in 1..=max_degree {
                    for m in -(l as isize)..=(l as isize) {
                        let u = (splitmix64(&mut state) >> 11) as f64 / (1u64 << 53) as f64;
                        t.push((l, m, (2.0 * u - 1.0) / (l as f64).sqrt()));
                    }
                }
                // |Y| ≤ 1 for every Schmidt-normalized term
                let total: f64 = t.iter().map(|(_, _, c)| c.abs()).sum();
                let scale = if total > 0.0 { 0.45 / total } else { 0.0 };
                t.iter_mut().for_each(|(_, _, c)| *c *= scale);
                t
            })
            .collect();
        Self { max_degree, terms }
    }

    pub fn channels(&self) -> usize {
        self.terms.len()
    }

    pub fn eval(&self, s: SphericalCoord) -> Vec<f64> {
        let legendre = schmidt_legendre(self.max_degree, s.phi().sin());
        self.terms
            .iter()
            .map(|terms| {
                0.5 + terms
                    .iter()
                    .map(|&(l, m, c)| {
                        let p = legendre[l][m.unsigned_abs()];
                        let az = if m >= 0 {
                            (m as f64 * s.theta()).cos()
                        } else {
                            (-m as f64 * s.theta()).sin()
                        };
                        c * p * az
                    })
                    .sum::<f64>()
            })
            .collect()
    }

    /// Rasterizes the field at the pixel centres of an ERP of the given height.
    pub fn render_erp(&self, height: usize) -> ImageGrid {
        let spec = ProjectionSpec::erp(height);
        let mut img = ImageGrid::zeros(height, 2 * height, self.channels());
        for m in 0..height {
            for n in 0..2 * height {
                let s = spec.sphere_from_pixel(m as f64, n as f64).expect("ERP centre");
                for (c, v) in self.eval(s).into_iter().enumerate() {
                    img.set(m, n, c, v);
                }
            }
        }
        img
    }
}

/// Schmidt semi-normalized associated Legendre values `P[l][m]` at `x`.
fn schmidt_legendre(max_degree: usize, x: f64) -> Vec<Vec<f64>> {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut p = vec![vec![0.0; max_degree + 1]; max_degree + 1];
    p[0][0] = 1.0;
    for l in 1..=max_degree {
        // sectoral term
        let lf = l as f64;
        let f = if l == 1 { 1.0 } else { ((2.0 * lf - 1.0) / (2.0 * lf)).sqrt() };
        p[l][l] = f * s * p[l - 1][l - 1];
    }
    for m in 0..=max_degree {
        for l in (m + 1)..=max_degree {
            let (lf, mf) = (l as f64, m as f64);
            let a = (2.0 * lf - 1.0) / ((lf * lf - mf * mf).sqrt());
            let prev2 = if l >= m + 2 { p[l - 2][m] } else { 0.0 };
            let b = if l >= m + 2 {
                (((lf - 1.0) * (lf - 1.0) - mf * mf).sqrt()) / ((lf * lf - mf * mf).sqrt())
            } else {
                0.0
            };
            p[l][m] = a * x * p[l - 1][m] - b * prev2;
        }
    }
    p
}
