use super::condition::ConditionMaps;
use super::offset::{offset_net_forward, OffsetNetWeights};
use super::tensor::{FeatureMap, Matrix};
use crate::error::{Error, Result};
use crate::resample::OutOfBounds;

/// Query/key/value projections; a token row vector `x` maps to `x · W`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionWeights {
    pub wq: Matrix,
    pub wk: Matrix,
    pub wv: Matrix,
}

impl AttentionWeights {
    pub fn channels(&self) -> usize {
        self.wq.rows
    }

    fn validate(&self, channels: usize) -> Result<()> {
        for m in [&self.wq, &self.wk, &self.wv] {
            if m.rows != channels || m.cols != channels {
                return Err(Error::ShapeMismatch(format!(
                    "projection is {}x{}, features have {channels} channels",
                    m.rows, m.cols
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DaabWeights {
    /// `3 → hidden → hidden → 2` network over `concat(c_d, c_w)`.
    pub offset: OffsetNetWeights,
    pub attention: AttentionWeights,
}

pub(crate) fn softmax_in_place(scores: &mut [f64]) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for s in scores.iter_mut() {
        *s = (*s - max).exp();
        total += *s;
    }
    scores.iter_mut().for_each(|s| *s /= total);
}

fn project(tokens: &[Vec<f64>], w: &Matrix) -> Vec<Vec<f64>> {
    tokens
        .iter()
        .map(|x| {
            (0..w.cols)
                .map(|j| x.iter().enumerate().map(|(i, xi)| xi * w.get(i, j)).sum())
                .collect()
        })
        .collect()
}

fn check_window(f: &FeatureMap, window: usize, heads: usize) -> Result<()> {
    if window == 0 || f.height() % window != 0 || f.width() % window != 0 {
        return Err(Error::IndivisibleWindow {
            window,
            height: f.height(),
            width: f.width(),
        });
    }
    if heads == 0 || f.channels() % heads != 0 {
        return Err(Error::ShapeMismatch(format!(
            "{} channels cannot split into {heads} heads",
            f.channels()
        )));
    }
    Ok(())
}

/// Non-overlapping window multi-head attention with queries from `queries`
/// and keys/values from `context`. Scores are scaled by `1/√(C/heads)`.
pub fn window_attention(
    queries: &FeatureMap,
    context: &FeatureMap,
    weights: &AttentionWeights,
    window: usize,
    heads: usize,
) -> Result<FeatureMap> {
    check_window(queries, window, heads)?;
    if (queries.channels(), queries.height(), queries.width())
        != (context.channels(), context.height(), context.width())
    {
        return Err(Error::ShapeMismatch("query and context maps differ in shape".into()));
    }
    weights.validate(queries.channels())?;
    let c = queries.channels();
    let d = c / heads;
    let scale = 1.0 / (d as f64).sqrt();
    let mut out = FeatureMap::zeros(c, queries.height(), queries.width());
    let tokens_of = |f: &FeatureMap, top: usize, left: usize| -> Vec<Vec<f64>> {
        let mut t = Vec::with_capacity(window * window);
        for m in top..top + window {
            for n in left..left + window {
                t.push((0..c).map(|ch| f.get(ch, m, n)).collect());
            }
        }
        t
    };
    let mut scores = vec![0.0; window * window];
    for top in (0..queries.height()).step_by(window) {
        for left in (0..queries.width()).step_by(window) {
            let q = project(&tokens_of(queries, top, left), &weights.wq);
            let ctx = tokens_of(context, top, left);
            let k = project(&ctx, &weights.wk);
            let v = project(&ctx, &weights.wv);
            for (t, qt) in q.iter().enumerate() {
                let (m, n) = (top + t / window, left + t % window);
                for h in 0..heads {
                    let span = h * d..(h + 1) * d;
                    for (u, ku) in k.iter().enumerate() {
                        scores[u] = qt[span.clone()]
                            .iter()
                            .zip(&ku[span.clone()])
                            .map(|(a, b)| a * b)
                            .sum::<f64>()
                            * scale;
                    }
                    softmax_in_place(&mut scores);
                    for j in span {
                        let val: f64 = scores.iter().zip(&v).map(|(a, vu)| a * vu[j]).sum();
                        out.set(j, m, n, val);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Bilinear warp of every channel by a shared `(Δy, Δx)` field, zero outside.
pub(crate) fn warp_features(features: &FeatureMap, offsets: &FeatureMap) -> FeatureMap {
    FeatureMap::from_fn(features.channels(), features.height(), features.width(), |c, m, n| {
        let y = m as f64 + offsets.get(0, m, n);
        let x = n as f64 + offsets.get(1, m, n);
        features.sample(c, y, x, OutOfBounds::Zero)
    })
}

/// Distortion-aware attention block.
///
/// Offsets come from `concat(c_d, c_w)` alone; the features are warped once
/// and every head reads keys and values from the same warped map.
pub fn daab_forward(
    features: &FeatureMap,
    cond: &ConditionMaps,
    weights: &DaabWeights,
    window: usize,
    heads: usize,
) -> Result<FeatureMap> {
    check_window(features, window, heads)?;
    if (cond.height(), cond.width()) != (features.height(), features.width()) {
        return Err(Error::ShapeMismatch("condition maps do not match features".into()));
    }
    if weights.offset.outputs() != super::DAAB_OFFSET_CHANNELS {
        return Err(Error::ShapeMismatch(format!(
            "DAAB offset network must emit {} channels",
            super::DAAB_OFFSET_CHANNELS
        )));
    }
    let offsets = offset_net_forward(&cond.stacked()?, &weights.offset)?;
    let warped = warp_features(features, &offsets);
    window_attention(features, &warped, &weights.attention, window, heads)
}
