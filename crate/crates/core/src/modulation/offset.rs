use super::tensor::{FeatureMap, Matrix};
use crate::error::{Error, Result};

/// Hidden width of the offset network.
pub const DEFAULT_HIDDEN: usize = 32;

/// Pointwise three-stage network `in → hidden → hidden → out` with ReLU between stages.
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetNetWeights {
    pub w1: Matrix,
    pub b1: Vec<f32>,
    pub w2: Matrix,
    pub b2: Vec<f32>,
    pub w3: Matrix,
    pub b3: Vec<f32>,
}

impl OffsetNetWeights {
    pub fn new(
        w1: Matrix,
        b1: Vec<f32>,
        w2: Matrix,
        b2: Vec<f32>,
        w3: Matrix,
        b3: Vec<f32>,
    ) -> Result<Self> {
        let hidden = w1.rows;
        let ok = b1.len() == hidden
            && w2.rows == hidden
            && w2.cols == hidden
            && b2.len() == hidden
            && w3.cols == hidden
            && b3.len() == w3.rows;
        if !ok {
            return Err(Error::ShapeMismatch("offset network stages do not chain".into()));
        }
        if [&b1, &b2, &b3].iter().any(|b| b.iter().any(|v| !v.is_finite())) {
            return Err(Error::Domain("non-finite bias".into()));
        }
        Ok(Self {
            w1,
            b1,
            w2,
            b2,
            w3,
            b3,
        })
    }

    pub fn zeros(inputs: usize, hidden: usize, outputs: usize) -> Self {
        Self::from_generator(inputs, hidden, outputs, &mut || 0.0)
    }

    /// Fills every parameter, in storage order, from `next`.
    pub fn from_generator(
        inputs: usize,
        hidden: usize,
        outputs: usize,
        next: &mut dyn FnMut() -> f32,
    ) -> Self {
        let w1 = Matrix::from_fn(hidden, inputs, |_, _| next());
        let b1 = (0..hidden).map(|_| next()).collect();
        let w2 = Matrix::from_fn(hidden, hidden, |_, _| next());
        let b2 = (0..hidden).map(|_| next()).collect();
        let w3 = Matrix::from_fn(outputs, hidden, |_, _| next());
        let b3 = (0..outputs).map(|_| next()).collect();
        Self {
            w1,
            b1,
            w2,
            b2,
            w3,
            b3,
        }
    }

    pub fn inputs(&self) -> usize {
        self.w1.cols
    }

    pub fn hidden(&self) -> usize {
        self.w1.rows
    }

    pub fn outputs(&self) -> usize {
        self.w3.rows
    }
}

fn affine(w: &Matrix, b: &[f32], x: &[f64], out: &mut [f64], relu: bool) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = b[i] as f64;
        for (j, xj) in x.iter().enumerate() {
            acc += w.get(i, j) * xj;
        }
        *o = if relu { acc.max(0.0) } else { acc };
    }
}

/// Evaluates the offset network at every pixel of the condition stack.
pub fn offset_net_forward(cond: &FeatureMap, weights: &OffsetNetWeights) -> Result<FeatureMap> {
    if cond.channels() != weights.inputs() {
        return Err(Error::ShapeMismatch(format!(
            "offset network expects {} condition channels, got {}",
            weights.inputs(),
            cond.channels()
        )));
    }
    let (h, w) = (cond.height(), cond.width());
    let hidden = weights.hidden();
    let mut out = FeatureMap::zeros(weights.outputs(), h, w);
    let mut x = vec![0.0; cond.channels()];
    let mut h1 = vec![0.0; hidden];
    let mut h2 = vec![0.0; hidden];
    let mut y = vec![0.0; weights.outputs()];
    for m in 0..h {
        for n in 0..w {
            for (c, v) in x.iter_mut().enumerate() {
                *v = cond.get(c, m, n);
            }
            affine(&weights.w1, &weights.b1, &x, &mut h1, true);
            affine(&weights.w2, &weights.b2, &h1, &mut h2, true);
            affine(&weights.w3, &weights.b3, &h2, &mut y, false);
            for (k, v) in y.iter().enumerate() {
                out.set(k, m, n, *v);
            }
        }
    }
    Ok(out)
}
