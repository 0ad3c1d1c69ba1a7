//! Block weight bundle and its on-disk form: a flat little-endian `f32`
//! blob plus a JSON sidecar naming each tensor's shape and element offset.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::attention::{AttentionWeights, DaabWeights};
use super::deform::{ConvWeights, DacbWeights};
use super::offset::OffsetNetWeights;
use super::tensor::Matrix;
use crate::error::{Error, Result};

/// One DAAB and one DACB worth of parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockWeights {
    pub daab: DaabWeights,
    pub dacb: DacbWeights,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    /// Offset in elements from the start of the data file.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format: String,
    pub data_file: String,
    pub tensors: Vec<TensorEntry>,
}

const FORMAT: &str = "f32-le";

impl BlockWeights {
    /// Builds a bundle for `channels` feature channels and a DACB emitting
    /// `out_channels`, drawing every parameter from `next` in storage order.
    pub fn from_generator(
        channels: usize,
        out_channels: usize,
        hidden: usize,
        next: &mut dyn FnMut() -> f32,
    ) -> Self {
        let offset = OffsetNetWeights::from_generator(3, hidden, super::DAAB_OFFSET_CHANNELS, next);
        let wq = Matrix::from_fn(channels, channels, |_, _| next());
        let wk = Matrix::from_fn(channels, channels, |_, _| next());
        let wv = Matrix::from_fn(channels, channels, |_, _| next());
        let dacb_offset = OffsetNetWeights::from_generator(1, hidden, super::DACB_OFFSET_CHANNELS, next);
        let filter = (0..out_channels * channels * 9).map(|_| next()).collect();
        let bias = (0..out_channels).map(|_| next()).collect();
        Self {
            daab: DaabWeights {
                offset,
                attention: AttentionWeights { wq, wk, wv },
            },
            dacb: DacbWeights {
                offset: dacb_offset,
                conv: ConvWeights {
                    out_channels,
                    in_channels: channels,
                    filter,
                    bias,
                },
            },
        }
    }

    pub fn zeros(channels: usize, out_channels: usize, hidden: usize) -> Self {
        Self::from_generator(channels, out_channels, hidden, &mut || 0.0)
    }

    fn tensors(&self) -> Vec<(String, Vec<usize>, &[f32])> {
        let mut out = Vec::new();
        for (prefix, w) in [("daab.offset", &self.daab.offset), ("dacb.offset", &self.dacb.offset)] {
            out.push((format!("{prefix}.w1"), vec![w.w1.rows, w.w1.cols], &w.w1.data[..]));
            out.push((format!("{prefix}.b1"), vec![w.b1.len()], &w.b1[..]));
            out.push((format!("{prefix}.w2"), vec![w.w2.rows, w.w2.cols], &w.w2.data[..]));
            out.push((format!("{prefix}.b2"), vec![w.b2.len()], &w.b2[..]));
            out.push((format!("{prefix}.w3"), vec![w.w3.rows, w.w3.cols], &w.w3.data[..]));
            out.push((format!("{prefix}.b3"), vec![w.b3.len()], &w.b3[..]));
        }
        let a = &self.daab.attention;
        for (name, m) in [("daab.attn.wq", &a.wq), ("daab.attn.wk", &a.wk), ("daab.attn.wv", &a.wv)] {
            out.push((name.to_string(), vec![m.rows, m.cols], &m.data[..]));
        }
        let c = &self.dacb.conv;
        out.push((
            "dacb.conv.weight".into(),
            vec![c.out_channels, c.in_channels, 3, 3],
            &c.filter[..],
        ));
        out.push(("dacb.conv.bias".into(), vec![c.out_channels], &c.bias[..]));
        out
    }

    /// Serializes to `(sidecar, blob)`; the sidecar names `data_file`.
    pub fn to_bytes(&self, data_file: &str) -> (Sidecar, Vec<u8>) {
        let mut blob = Vec::new();
        let mut entries = Vec::new();
        let mut offset = 0;
        for (name, shape, values) in self.tensors() {
            entries.push(TensorEntry {
                name,
                shape,
                offset,
            });
            offset += values.len();
            for v in values {
                blob.extend_from_slice(&v.to_le_bytes());
            }
        }
        (
            Sidecar {
                format: FORMAT.into(),
                data_file: data_file.into(),
                tensors: entries,
            },
            blob,
        )
    }

    pub fn from_bytes(sidecar: &Sidecar, blob: &[u8]) -> Result<Self> {
        if sidecar.format != FORMAT {
            return Err(Error::Config(format!("unsupported weight format {:?}", sidecar.format)));
        }
        if blob.len() % 4 != 0 {
            return Err(Error::ShapeMismatch("weight blob is not a whole number of f32".into()));
        }
        let values: Vec<f32> = blob
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        let fetch = |name: &str, rank: usize| -> Result<(Vec<usize>, Vec<f32>)> {
            let entry = sidecar
                .tensors
                .iter()
                .find(|t| t.name == name)
                .ok_or_else(|| Error::ShapeMismatch(format!("missing tensor {name}")))?;
            if entry.shape.len() != rank {
                return Err(Error::ShapeMismatch(format!("tensor {name} must have rank {rank}")));
            }
            let len: usize = entry.shape.iter().product();
            let data = values
                .get(entry.offset..entry.offset + len)
                .ok_or_else(|| Error::ShapeMismatch(format!("tensor {name} overruns the blob")))?;
            Ok((entry.shape.clone(), data.to_vec()))
        };
        let matrix = |name: &str| -> Result<Matrix> {
            let (shape, data) = fetch(name, 2)?;
            Matrix::new(shape[0], shape[1], data)
        };
        let vector = |name: &str| -> Result<Vec<f32>> { Ok(fetch(name, 1)?.1) };
        let net = |prefix: &str| -> Result<OffsetNetWeights> {
            OffsetNetWeights::new(
                matrix(&format!("{prefix}.w1"))?,
                vector(&format!("{prefix}.b1"))?,
                matrix(&format!("{prefix}.w2"))?,
                vector(&format!("{prefix}.b2"))?,
                matrix(&format!("{prefix}.w3"))?,
                vector(&format!("{prefix}.b3"))?,
            )
        };
        let (shape, filter) = fetch("dacb.conv.weight", 4)?;
        if shape[2] != 3 || shape[3] != 3 {
            return Err(Error::ShapeMismatch("DACB kernel must be 3x3".into()));
        }
        let conv = ConvWeights::new(shape[0], shape[1], filter, vector("dacb.conv.bias")?)?;
        Ok(Self {
            daab: DaabWeights {
                offset: net("daab.offset")?,
                attention: AttentionWeights {
                    wq: matrix("daab.attn.wq")?,
                    wk: matrix("daab.attn.wk")?,
                    wv: matrix("daab.attn.wv")?,
                },
            },
            dacb: DacbWeights {
                offset: net("dacb.offset")?,
                conv,
            },
        })
    }

    /// Writes the sidecar to `json_path` and the blob next to it (`.bin`).
    pub fn save(&self, json_path: &Path) -> Result<()> {
        let bin_path = json_path.with_extension("bin");
        let data_file = bin_path
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| Error::Config(format!("bad weight path {}", json_path.display())))?
            .to_string();
        let (sidecar, blob) = self.to_bytes(&data_file);
        fs::write(&bin_path, blob).map_err(|source| Error::Io {
            path: bin_path.clone(),
            source,
        })?;
        let json = serde_json::to_string_pretty(&sidecar)?;
        fs::write(json_path, json + "\n").map_err(|source| Error::Io {
            path: json_path.to_path_buf(),
            source,
        })
    }

    pub fn load(json_path: &Path) -> Result<Self> {
        let read = |p: &Path| {
            fs::read(p).map_err(|source| Error::Io {
                path: p.to_path_buf(),
                source,
            })
        };
        let sidecar: Sidecar = serde_json::from_slice(&read(json_path)?)?;
        let dir = json_path.parent().map(Path::to_path_buf).unwrap_or_else(PathBuf::new);
        let blob = read(&dir.join(&sidecar.data_file))?;
        Self::from_bytes(&sidecar, &blob)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_weights() -> BlockWeights {
        let mut state = 7u32;
        BlockWeights::from_generator(4, 3, 5, &mut || {
            state = state.wrapping_mul(1_664_525).wrapping_add(1_013_904_223);
            (state >> 8) as f32 / (1u32 << 24) as f32 - 0.5
        })
    }

    #[test]
    fn file_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("block.json");
        let w = sample_weights();
        w.save(&path).unwrap();
        let loaded = BlockWeights::load(&path).unwrap();
        assert_eq!(loaded, w);
        let first = fs::read(dir.path().join("block.bin")).unwrap();
        loaded.save(&path).unwrap();
        assert_eq!(fs::read(dir.path().join("block.bin")).unwrap(), first);
    }

    #[test]
    fn sidecar_lists_shapes() {
        let (sidecar, blob) = sample_weights().to_bytes("x.bin");
        let conv = sidecar.tensors.iter().find(|t| t.name == "dacb.conv.weight").unwrap();
        assert_eq!(conv.shape, vec![3, 4, 3, 3]);
        let total: usize = sidecar.tensors.iter().map(|t| t.shape.iter().product::<usize>()).sum();
        assert_eq!(total * 4, blob.len());
    }

    #[test]
    fn truncated_blob_is_rejected() {
        let (sidecar, blob) = sample_weights().to_bytes("x.bin");
        assert!(BlockWeights::from_bytes(&sidecar, &blob[..blob.len() - 4]).is_err());
        assert!(BlockWeights::from_bytes(&sidecar, &blob[..blob.len() - 1]).is_err());
    }
}
