use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::Seq2Seq;
use super::train::TrainConfig;
use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;
const KIND: &str = "nusbench-seq2seq";

/// Structured-text checkpoint: config echo, vocabulary and named tensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub kind: String,
    pub config: TrainConfig,
    pub model: Seq2Seq,
}

impl Checkpoint {
    pub fn new(config: TrainConfig, model: Seq2Seq) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            kind: KIND.to_string(),
            config,
            model,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(text).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if ck.version != CHECKPOINT_VERSION || ck.kind != KIND {
            return Err(Error::Checkpoint(format!("unsupported checkpoint {} v{}", ck.kind, ck.version)));
        }
        let m = &ck.model;
        let shapes_ok = m.params.encoder.input() == m.dims.feature_dim
            && m.params.encoder.hidden() == m.dims.hidden
            && m.params.decoder.input() == m.dims.vocab + m.dims.bridge
            && m.params.out_w.rows == m.dims.vocab
            && m.vocab.len() == m.dims.vocab
            && m.params.tensors().iter().all(|t| t.data.len() == t.rows * t.cols);
        if !shapes_ok {
            return Err(Error::Checkpoint("tensor shapes disagree with model dimensions".into()));
        }
        if !m.params.is_finite() {
            return Err(Error::Checkpoint("non-finite parameter".into()));
        }
        Ok(ck)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
