//! One dialogue between a system and a simulated user.

use serde::{Deserialize, Serialize};

use crate::acts::{SystemAct, SystemActType, UserAct, UserActType};
use crate::decoder::SemanticDecoder;
use crate::error::{Error, Result};
use crate::goal::{goal_satisfied, Goal};
use crate::ontology::Ontology;
use crate::render::render_system_acts;
use crate::rng::{stream, SimRng};
use crate::simulator::{UserOutput, UserSimulator};
use crate::system::{compute_reward, DialogueSystem, MAX_TURNS, SUCCESS_REWARD, TURN_PENALTY};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub system_acts: Vec<SystemAct>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system_text: Option<String>,
    /// Absent when the system closed the dialogue.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user: Option<UserOutput>,
    pub decoded: Vec<UserAct>,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogueRecord {
    pub turns: Vec<TurnRecord>,
    pub success: bool,
    pub initial_goal: Goal,
    /// Final goal, change history included.
    pub goal: Goal,
    pub seed: u64,
    pub stream: u64,
}

impl DialogueRecord {
    pub fn n_turns(&self) -> usize {
        self.turns.len()
    }

    pub fn total_reward(&self) -> f64 {
        self.turns.iter().map(|t| t.reward).sum()
    }

    pub fn system_turns(&self) -> impl Iterator<Item = &[SystemAct]> {
        self.turns.iter().map(|t| t.system_acts.as_slice())
    }

    /// Success recomputed from the transcript alone.
    pub fn offline_success(&self, ontology: &Ontology) -> bool {
        goal_satisfied(&self.goal, ontology, self.system_turns())
    }

    /// Overwrites the outcome (e.g. with a human verdict) and re-derives rewards.
    pub fn set_outcome(&mut self, success: bool) {
        self.success = success;
        let rewards = compute_reward(self.turns.len(), success);
        for (t, r) in self.turns.iter_mut().zip(rewards) {
            t.reward = r;
        }
    }

    /// Turn cap and the reward identity.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.turns.len();
        if n == 0 || n > MAX_TURNS {
            return Err(Error::Contract {
                turn: n,
                message: format!("dialogue has {n} turns"),
            });
        }
        let expected = SUCCESS_REWARD * f64::from(u8::from(self.success)) + TURN_PENALTY * n as f64;
        if (self.total_reward() - expected).abs() > 1e-9 {
            return Err(Error::Contract {
                turn: n,
                message: format!("total reward {} != {expected}", self.total_reward()),
            });
        }
        Ok(())
    }
}

pub struct DialogueEnv<'a> {
    pub ontology: &'a Ontology,
    pub decoder: &'a SemanticDecoder,
    pub max_turns: usize,
    /// Render system turns to text (needed for human-facing transcripts).
    pub render_system_text: bool,
}

impl<'a> DialogueEnv<'a> {
    pub fn new(ontology: &'a Ontology, decoder: &'a SemanticDecoder) -> Self {
        Self {
            ontology,
            decoder,
            max_turns: MAX_TURNS,
            render_system_text: false,
        }
    }
}

fn contract(turn: usize, e: Error) -> Error {
    match e {
        e @ Error::Contract { .. } => e,
        other => Error::Contract {
            turn,
            message: other.to_string(),
        },
    }
}

/// Runs one dialogue on the rng stream `(seed, stream_id)`.
pub fn run_dialogue(
    env: &DialogueEnv<'_>,
    system: &mut dyn DialogueSystem,
    user: &mut dyn UserSimulator,
    seed: u64,
    stream_id: u64,
) -> Result<DialogueRecord> {
    let mut rng = stream(seed, stream_id);
    run_dialogue_with(env, system, user, &mut rng, seed, stream_id)
}

pub fn run_dialogue_with(
    env: &DialogueEnv<'_>,
    system: &mut dyn DialogueSystem,
    user: &mut dyn UserSimulator,
    rng: &mut SimRng,
    seed: u64,
    stream_id: u64,
) -> Result<DialogueRecord> {
    user.reset(rng)?;
    let initial_goal = user.goal().ok_or(Error::NotReset)?.clone();
    let mut turns: Vec<TurnRecord> = Vec::new();
    let mut sys_acts = system.open();
    for k in 1..=env.max_turns {
        if sys_acts.is_empty() {
            return Err(contract(k, Error::InvalidAct("empty system turn".into())));
        }
        for a in &sys_acts {
            a.validate(env.ontology).map_err(|e| contract(k, e))?;
        }
        let system_text = if env.render_system_text {
            Some(render_system_acts(&sys_acts).map_err(|e| contract(k, e))?)
        } else {
            None
        };
        if sys_acts.iter().any(|a| a.kind == SystemActType::Bye) {
            turns.push(TurnRecord {
                system_acts: sys_acts,
                system_text,
                user: None,
                decoded: Vec::new(),
                reward: 0.0,
            });
            break;
        }
        let out = user.respond(&sys_acts, rng).map_err(|e| contract(k, e))?;
        let decoded = match &out {
            UserOutput::Text(t) => env.decoder.parse(t),
            UserOutput::Acts(a) => a.clone(),
        };
        let user_bye = decoded.iter().any(|a| a.kind == UserActType::Bye);
        turns.push(TurnRecord {
            system_acts: sys_acts,
            system_text,
            user: Some(out),
            decoded: decoded.clone(),
            reward: 0.0,
        });
        if user_bye || k == env.max_turns {
            break;
        }
        sys_acts = system.respond(&decoded, rng).map_err(|e| contract(k + 1, e))?;
    }
    let goal = user.goal().ok_or(Error::NotReset)?.clone();
    let mut record = DialogueRecord {
        success: false,
        initial_goal,
        goal,
        turns,
        seed,
        stream: stream_id,
    };
    let success = record.offline_success(env.ontology);
    record.set_outcome(success);
    Ok(record)
}
