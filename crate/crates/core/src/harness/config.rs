//! Run configuration and run-directory naming.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::abus::AbusConfig;
use crate::corpus::synth::SynthConfig;
use crate::error::{Error, Result};
use crate::nus::NusConfig;
use crate::seq2seq::TrainConfig;
use crate::system::{LearnerKind, MAX_TURNS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimulatorKind {
    Nus,
    Abus,
}

impl SimulatorKind {
    pub fn label(self) -> &'static str {
        match self {
            SimulatorKind::Nus => "NUS",
            SimulatorKind::Abus => "ABUS",
        }
    }
}

impl fmt::Display for SimulatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimulatorKind::Nus => "nus",
            SimulatorKind::Abus => "abus",
        })
    }
}

impl FromStr for SimulatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nus" => Ok(SimulatorKind::Nus),
            "abus" => Ok(SimulatorKind::Abus),
            other => Err(Error::Config(format!("unknown simulator `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_train")]
    pub n_train_dialogues: usize,
    #[serde(default = "default_test")]
    pub n_test_dialogues: usize,
    #[serde(default = "default_policy_seeds")]
    pub n_policy_seeds: usize,
    #[serde(default = "default_simulators")]
    pub simulators: Vec<SimulatorKind>,
    #[serde(default)]
    pub learner: LearnerKind,
    #[serde(default = "default_max_turns")]
    pub max_turns: usize,
    /// Initial exploration rate, annealed linearly to zero.
    #[serde(default = "default_explore")]
    pub explore: f64,
    /// Ontology document; the built-in toy ontology when absent.
    #[serde(default)]
    pub ontology: Option<PathBuf>,
    /// Decoder rule file; the built-in rules when absent.
    #[serde(default)]
    pub rules: Option<PathBuf>,
    /// Neural simulator checkpoint; trained from a synthetic corpus when absent.
    #[serde(default)]
    pub nus_checkpoint: Option<PathBuf>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub abus: AbusConfig,
    #[serde(default)]
    pub nus: NusConfig,
    #[serde(default)]
    pub corpus: SynthConfig,
    #[serde(default)]
    pub seq2seq: TrainConfig,
}

fn default_seed() -> u64 {
    1
}
fn default_train() -> usize {
    4000
}
fn default_test() -> usize {
    1000
}
fn default_policy_seeds() -> usize {
    5
}
fn default_simulators() -> Vec<SimulatorKind> {
    vec![SimulatorKind::Nus, SimulatorKind::Abus]
}
fn default_max_turns() -> usize {
    MAX_TURNS
}
fn default_explore() -> f64 {
    0.3
}
fn default_output() -> PathBuf {
    PathBuf::from("runs")
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_train_dialogues == 0 || self.n_test_dialogues == 0 || self.n_policy_seeds == 0 {
            return Err(Error::Config("dialogue and seed counts must be at least 1".into()));
        }
        if self.simulators.is_empty() {
            return Err(Error::Config("no simulators configured".into()));
        }
        if self.max_turns == 0 || self.max_turns > MAX_TURNS {
            return Err(Error::Config(format!("max_turns must be in 1..={MAX_TURNS}")));
        }
        if !(0.0..=1.0).contains(&self.explore) {
            return Err(Error::Config("explore must be in [0, 1]".into()));
        }
        self.seq2seq.validate()
    }

    /// First 12 hex digits of the SHA-256 of the canonical config document.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }

    pub fn run_dir(&self) -> PathBuf {
        self.output_dir.join(self.hash())
    }

    /// Exploration rate for training episode `e` of `n`.
    pub fn explore_at(&self, e: usize, n: usize) -> f64 {
        if n <= 1 {
            return 0.0;
        }
        self.explore * (1.0 - e as f64 / (n - 1) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::default();
        assert_eq!((c.n_train_dialogues, c.n_test_dialogues, c.n_policy_seeds), (4000, 1000, 5));
        assert_eq!(c.max_turns, 25);
        assert_eq!(c.explore_at(0, 4000), 0.3);
        assert_eq!(c.explore_at(3999, 4000), 0.0);
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 2;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 12);
    }

    #[test]
    fn zero_counts_are_rejected() {
        assert!(RunConfig::from_json(r#"{"n_test_dialogues": 0}"#).is_err());
        assert!(RunConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }
}
