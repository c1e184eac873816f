//! Desk-scale synthetic corpus: agenda-based users talking to a noisy
//! scripted system, user acts rendered through templates.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{RawDialogue, RawTurn};
use crate::abus::{Abus, AbusConfig};
use crate::acts::UserActType;
use crate::decoder::SemanticDecoder;
use crate::error::Result;
use crate::harness::dialogue::{run_dialogue_with, DialogueEnv};
use crate::ontology::{Constraints, Ontology};
use crate::render::render_user_acts;
use crate::rng::{domain, stream};
use crate::simulator::UserOutput;
use crate::system::ScriptedSystem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    #[serde(default = "default_n")]
    pub n_dialogues: usize,
    /// Per-turn probability that the scripted system takes a detour
    /// (confirmation, select, repeat, reqmore).
    #[serde(default = "default_noise")]
    pub system_noise: f64,
    #[serde(default)]
    pub abus: AbusConfig,
}

fn default_n() -> usize {
    2000
}
fn default_noise() -> f64 {
    0.15
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_dialogues: default_n(),
            system_noise: default_noise(),
            abus: AbusConfig::default(),
        }
    }
}

/// Generates `config.n_dialogues` dialogues; dialogue `k` depends only on
/// `(seed, k)`.
pub fn synthesize_corpus(ontology: &Ontology, config: &SynthConfig, seed: u64) -> Result<Vec<RawDialogue>> {
    let shared = Arc::new(ontology.clone());
    let decoder = SemanticDecoder::with_default_rules(ontology)?;
    let env = DialogueEnv::new(ontology, &decoder);
    let mut user = Abus::new(Arc::clone(&shared), config.abus.clone());
    let mut system = ScriptedSystem::with_noise(Arc::clone(&shared), config.system_noise);
    let mut out = Vec::with_capacity(config.n_dialogues);
    for k in 0..config.n_dialogues {
        let stream_id = domain::CORPUS + k as u64;
        let mut rng = stream(seed, stream_id);
        let record = run_dialogue_with(&env, &mut system, &mut user, &mut rng, seed, stream_id)?;
        let requests = record.goal.requests.clone();
        let mut labels = Constraints::new();
        let mut turns = Vec::with_capacity(record.turns.len());
        for t in &record.turns {
            let Some(UserOutput::Acts(acts)) = &t.user else { continue };
            for a in acts.iter().filter(|a| a.kind == UserActType::Inform) {
                for (s, v) in a.pairs() {
                    labels.insert(s.to_string(), v.to_string());
                }
            }
            turns.push(RawTurn {
                sys_acts: t.system_acts.clone(),
                user_text: render_user_acts(acts, &mut rng),
                constraints: labels.clone(),
                requests: requests.clone(),
            });
        }
        out.push(RawDialogue {
            id: format!("synth-{seed}-{k:05}"),
            turns,
        });
    }
    Ok(out)
}
