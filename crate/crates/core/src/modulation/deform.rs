use super::offset::{offset_net_forward, OffsetNetWeights};
use super::tensor::FeatureMap;
use crate::error::{Error, Result};
use crate::resample::OutOfBounds;

/// 3×3 filter bank `out × in × 3 × 3` plus bias.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvWeights {
    pub out_channels: usize,
    pub in_channels: usize,
    pub filter: Vec<f32>,
    pub bias: Vec<f32>,
}

impl ConvWeights {
    pub fn new(out_channels: usize, in_channels: usize, filter: Vec<f32>, bias: Vec<f32>) -> Result<Self> {
        if filter.len() != out_channels * in_channels * 9 || bias.len() != out_channels {
            return Err(Error::ShapeMismatch(format!(
                "conv weights do not match {out_channels}x{in_channels}x3x3"
            )));
        }
        if filter.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite conv weight".into()));
        }
        Ok(Self {
            out_channels,
            in_channels,
            filter,
            bias,
        })
    }

    #[inline]
    pub fn tap(&self, o: usize, c: usize, ky: usize, kx: usize) -> f64 {
        self.filter[((o * self.in_channels + c) * 3 + ky) * 3 + kx] as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DacbWeights {
    /// `1 → hidden → hidden → 18` network over `c_d`.
    pub offset: OffsetNetWeights,
    pub conv: ConvWeights,
}

/// Distortion-aware convolution block: deformable 3×3 convolution whose
/// offsets come from `c_d` alone. Samples outside the map read as zero.
pub fn dacb_forward(features: &FeatureMap, c_d: &FeatureMap, weights: &DacbWeights) -> Result<FeatureMap> {
    let conv = &weights.conv;
    if features.channels() != conv.in_channels {
        return Err(Error::ShapeMismatch(format!(
            "conv expects {} input channels, got {}",
            conv.in_channels,
            features.channels()
        )));
    }
    if c_d.channels() != 1 || (c_d.height(), c_d.width()) != (features.height(), features.width()) {
        return Err(Error::ShapeMismatch("c_d must be 1×H×W matching the features".into()));
    }
    if weights.offset.outputs() != super::DACB_OFFSET_CHANNELS {
        return Err(Error::ShapeMismatch(format!(
            "DACB offset network must emit {} channels",
            super::DACB_OFFSET_CHANNELS
        )));
    }
    let offsets = offset_net_forward(c_d, &weights.offset)?;
    let (h, w) = (features.height(), features.width());
    let mut out = FeatureMap::zeros(conv.out_channels, h, w);
    let mut sampled = vec![0.0; 9 * conv.in_channels];
    for m in 0..h {
        for n in 0..w {
            for k in 0..9 {
                let (ky, kx) = (k / 3, k % 3);
                let y = m as f64 + ky as f64 - 1.0 + offsets.get(2 * k, m, n);
                let x = n as f64 + kx as f64 - 1.0 + offsets.get(2 * k + 1, m, n);
                for c in 0..conv.in_channels {
                    sampled[k * conv.in_channels + c] = features.sample(c, y, x, OutOfBounds::Zero);
                }
            }
            for o in 0..conv.out_channels {
                let mut acc = conv.bias[o] as f64;
                for k in 0..9 {
                    for c in 0..conv.in_channels {
                        acc += conv.tap(o, c, k / 3, k % 3) * sampled[k * conv.in_channels + c];
                    }
                }
                out.set(o, m, n, acc);
            }
        }
    }
    Ok(out)
}
