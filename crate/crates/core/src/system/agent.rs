//! Dialogue managers: the learned policy wrapper and a scripted controller.

use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::Rng;

use super::belief::{observe_system, update_belief, BeliefState};
use super::learner::{Learner, PolicyLearner};
use super::summary::{action_mask, master_to_acts, MasterAction, SummaryState};
use crate::acts::{SlotValue, SystemAct, SystemActType, UserAct};
use crate::error::Result;
use crate::ontology::Ontology;
use crate::rng::SimRng;

pub trait DialogueSystem {
    /// Clears per-dialogue state and returns the opening turn.
    fn open(&mut self) -> Vec<SystemAct>;

    /// Reacts to the decoded user turn.
    fn respond(&mut self, user_acts: &[UserAct], rng: &mut SimRng) -> Result<Vec<SystemAct>>;

    fn belief(&self) -> &BeliefState;
}

/// One policy decision: summary-state index and master-action index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub state: usize,
    pub action: usize,
}

/// Runs the summary-state policy; records decisions for learning.
pub fn select_system_action(
    policy: &Learner,
    belief: &BeliefState,
    ontology: &Ontology,
    explore: f64,
    rng: &mut SimRng,
) -> Result<(Vec<SystemAct>, Decision)> {
    let state = SummaryState::from_belief(belief, ontology).index();
    let mask = action_mask(belief, ontology);
    let action = policy.select(state, &mask, explore, rng);
    let acts = master_to_acts(MasterAction::from_index(action, ontology), belief, ontology)?;
    Ok((acts, Decision { state, action }))
}

pub struct PolicySystem<'p> {
    policy: &'p Learner,
    ontology: Arc<Ontology>,
    explore: f64,
    belief: BeliefState,
    decisions: Vec<Decision>,
}

impl<'p> PolicySystem<'p> {
    pub fn new(policy: &'p Learner, ontology: Arc<Ontology>, explore: f64) -> Self {
        Self {
            policy,
            ontology,
            explore,
            belief: BeliefState::default(),
            decisions: Vec::new(),
        }
    }

    pub fn decisions(&self) -> &[Decision] {
        &self.decisions
    }
}

impl DialogueSystem for PolicySystem<'_> {
    fn open(&mut self) -> Vec<SystemAct> {
        self.belief = BeliefState::default();
        self.decisions.clear();
        vec![SystemAct::welcome()]
    }

    fn respond(&mut self, user_acts: &[UserAct], rng: &mut SimRng) -> Result<Vec<SystemAct>> {
        self.belief = update_belief(&self.belief, user_acts, &self.ontology);
        let (acts, decision) = select_system_action(self.policy, &self.belief, &self.ontology, self.explore, rng)?;
        self.belief = observe_system(&self.belief, &acts);
        self.decisions.push(decision);
        Ok(acts)
    }

    fn belief(&self) -> &BeliefState {
        &self.belief
    }
}

/// Hand-written controller: answer requests for the offered venue, else ask
/// for the first unknown slot, else offer. With `noise > 0` it sometimes
/// confirms, selects or repeats instead, which diversifies synthetic corpora.
pub struct ScriptedSystem {
    ontology: Arc<Ontology>,
    noise: f64,
    belief: BeliefState,
}

impl ScriptedSystem {
    pub fn new(ontology: Arc<Ontology>) -> Self {
        Self::with_noise(ontology, 0.0)
    }

    pub fn with_noise(ontology: Arc<Ontology>, noise: f64) -> Self {
        Self {
            ontology,
            noise,
            belief: BeliefState::default(),
        }
    }

    fn plan(&self) -> MasterAction {
        let b = &self.belief;
        if b.offered.is_some() && !b.requested.is_empty() {
            return MasterAction::InformRequested;
        }
        if let Some(i) = self.ontology.informable().iter().position(|s| !b.slots.contains_key(&s.name)) {
            return MasterAction::Request(i);
        }
        if b.offered.is_none() {
            return MasterAction::Offer;
        }
        MasterAction::InformRequested
    }

    fn detour(&self, rng: &mut SimRng) -> Option<Vec<SystemAct>> {
        let known: Vec<(&String, &String)> = self.belief.slots.iter().collect();
        match rng.random_range(0..5) {
            0 | 1 => {
                let (slot, value) = known.choose(rng)?;
                let kind = if rng.random::<bool>() { SystemActType::ExplConf } else { SystemActType::ImplConf };
                let value = if rng.random::<f64>() < 0.5 {
                    (*value).clone()
                } else {
                    self.ontology.values(slot)?.choose(rng)?.clone()
                };
                Some(vec![SystemAct::new(kind, vec![SlotValue::pair(*slot, value)])])
            }
            2 => {
                let slot = self.ontology.informable().choose(rng)?;
                let mut values: Vec<&String> = slot.values.iter().collect();
                values.sort_by_key(|_| rng.random::<u32>());
                let slots = values.iter().take(2).map(|v| SlotValue::pair(&slot.name, *v)).collect();
                Some(vec![SystemAct::new(SystemActType::Select, slots)])
            }
            3 => Some(vec![SystemAct::bare(SystemActType::Repeat)]),
            _ => Some(vec![SystemAct::bare(SystemActType::Reqmore)]),
        }
    }
}

impl DialogueSystem for ScriptedSystem {
    fn open(&mut self) -> Vec<SystemAct> {
        self.belief = BeliefState::default();
        vec![SystemAct::welcome()]
    }

    fn respond(&mut self, user_acts: &[UserAct], rng: &mut SimRng) -> Result<Vec<SystemAct>> {
        self.belief = update_belief(&self.belief, user_acts, &self.ontology);
        let detour = if self.noise > 0.0 && rng.random::<f64>() < self.noise {
            self.detour(rng)
        } else {
            None
        };
        let acts = match detour {
            Some(acts) => acts,
            None => {
                let action = self.plan();
                if action == MasterAction::InformRequested && self.belief.requested.is_empty() {
                    vec![SystemAct::bare(SystemActType::Reqmore)]
                } else {
                    master_to_acts(action, &self.belief, &self.ontology)?
                }
            }
        };
        self.belief = observe_system(&self.belief, &acts);
        Ok(acts)
    }

    fn belief(&self) -> &BeliefState {
        &self.belief
    }
}
