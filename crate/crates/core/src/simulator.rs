//! The contract shared by every user simulator.

use serde::{Deserialize, Serialize};

use crate::acts::{SystemAct, UserAct};
use crate::error::Result;
use crate::goal::Goal;
use crate::rng::SimRng;

/// What a simulated user says: text for the neural simulator, acts for the
/// agenda-based one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UserOutput {
    Text(String),
    Acts(Vec<UserAct>),
}

impl UserOutput {
    pub fn text(&self) -> Option<&str> {
        match self {
            UserOutput::Text(t) => Some(t),
            UserOutput::Acts(_) => None,
        }
    }

    pub fn acts(&self) -> Option<&[UserAct]> {
        match self {
            UserOutput::Acts(a) => Some(a),
            UserOutput::Text(_) => None,
        }
    }
}

pub trait UserSimulator {
    /// Short label used in reports, e.g. `abus` or `nus`.
    fn name(&self) -> &str;

    /// Starts a dialogue: samples a goal and clears per-dialogue state.
    fn reset(&mut self, rng: &mut SimRng) -> Result<()>;

    /// Reacts to one system turn. Fails with `NotReset` before `reset`.
    fn respond(&mut self, acts: &[SystemAct], rng: &mut SimRng) -> Result<UserOutput>;

    /// The current goal, including its change history.
    fn goal(&self) -> Option<&Goal>;

    /// Named counters accumulated across dialogues, for run reports.
    fn counters(&self) -> Vec<(&'static str, usize)> {
        Vec::new()
    }
}
