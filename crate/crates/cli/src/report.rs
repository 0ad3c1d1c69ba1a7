//! JSON documents read and written by the `metric` command.

use std::path::PathBuf;

use odikit::metrics::MetricSet;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PairSpec {
    Tuple(PathBuf, PathBuf),
    Named { reference: PathBuf, candidate: PathBuf },
}

impl PairSpec {
    pub fn paths(self) -> (PathBuf, PathBuf) {
        match self {
            PairSpec::Tuple(r, c) => (r, c),
            PairSpec::Named { reference, candidate } => (reference, candidate),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairReport {
    pub reference: PathBuf,
    pub candidate: PathBuf,
    #[serde(flatten)]
    pub metrics: MetricSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channels: Option<Vec<MetricSet>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub pairs: Vec<PairReport>,
    /// Mean over pairs; absent when there are none.
    pub mean: Option<MetricSet>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_file_accepts_both_forms() {
        let specs: Vec<PairSpec> =
            serde_json::from_str(r#"[["a.png", "b.png"], {"reference": "c.png", "candidate": "d.png"}]"#).unwrap();
        let paths: Vec<_> = specs.into_iter().map(PairSpec::paths).collect();
        assert_eq!(paths[0], (PathBuf::from("a.png"), PathBuf::from("b.png")));
        assert_eq!(paths[1], (PathBuf::from("c.png"), PathBuf::from("d.png")));
        assert!(serde_json::from_str::<Vec<PairSpec>>(r#"[["only-one.png"]]"#).is_err());
    }

    #[test]
    fn metrics_are_flattened_into_each_pair() {
        let report = PairReport {
            reference: "r.png".into(),
            candidate: "c.png".into(),
            metrics: MetricSet { psnr: 30.0, ssim: 0.9, ws_psnr: 31.0, ws_ssim: 0.91 },
            channels: None,
        };
        let v = serde_json::to_value(&report).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys.len(), 6);
        assert_eq!(v["ws_psnr"], 31.0);
        assert!(v.get("channels").is_none());
    }
}
