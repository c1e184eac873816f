//! Turn-at-a-time dialogue with a person typing the user side.

use serde::{Deserialize, Serialize};

use super::dialogue::{DialogueRecord, TurnRecord};
use crate::acts::{SystemAct, SystemActType, UserActType};
use crate::decoder::SemanticDecoder;
use crate::error::{Error, Result};
use crate::goal::{goal_satisfied, Goal};
use crate::ontology::Ontology;
use crate::render::render_system_acts;
use crate::rng::SimRng;
use crate::simulator::UserOutput;
use crate::system::{observe_system, replay_belief, select_system_action, update_belief, BeliefState, Learner, MAX_TURNS};

/// A dialogue in progress. The belief is derived from `turns`, so the
/// serialized form holds no redundant state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiveDialogue {
    pub goal: Goal,
    pub turns: Vec<TurnRecord>,
    /// System turn awaiting the user's reply.
    pub pending: Vec<SystemAct>,
    pub ended: bool,
    pub seed: u64,
    pub stream: u64,
}

impl LiveDialogue {
    /// Starts with the welcome turn and returns its text.
    pub fn open(goal: Goal, seed: u64, stream: u64) -> Result<(Self, String)> {
        let pending = vec![SystemAct::welcome()];
        let text = render_system_acts(&pending)?;
        Ok((
            Self {
                goal,
                turns: Vec::new(),
                pending,
                ended: false,
                seed,
                stream,
            },
            text,
        ))
    }

    pub fn belief(&self, ontology: &Ontology) -> BeliefState {
        let b = replay_belief(
            self.turns
                .iter()
                .map(|t| (t.system_acts.as_slice(), t.decoded.as_slice())),
            ontology,
        );
        observe_system(&b, &self.pending)
    }

    /// Records the user's reply and produces the next system turn. Returns the
    /// system text, or `None` once the dialogue has ended without one.
    pub fn user_turn(
        &mut self,
        text: &str,
        policy: &Learner,
        ontology: &Ontology,
        decoder: &SemanticDecoder,
        rng: &mut SimRng,
    ) -> Result<Option<String>> {
        if self.ended {
            return Err(Error::Contract {
                turn: self.turns.len(),
                message: "dialogue has ended".into(),
            });
        }
        let decoded = decoder.parse(text);
        let before = self.belief(ontology);
        let system_text = render_system_acts(&self.pending)?;
        self.turns.push(TurnRecord {
            system_acts: std::mem::take(&mut self.pending),
            system_text: Some(system_text),
            user: Some(UserOutput::Text(text.to_string())),
            decoded: decoded.clone(),
            reward: 0.0,
        });
        if decoded.iter().any(|a| a.kind == UserActType::Bye) || self.turns.len() >= MAX_TURNS {
            self.ended = true;
            return Ok(None);
        }
        let belief = update_belief(&before, &decoded, ontology);
        let (acts, _) = select_system_action(policy, &belief, ontology, 0.0, rng)?;
        let reply = render_system_acts(&acts)?;
        if acts.iter().any(|a| a.kind == SystemActType::Bye) {
            self.turns.push(TurnRecord {
                system_acts: acts,
                system_text: Some(reply.clone()),
                user: None,
                decoded: Vec::new(),
                reward: 0.0,
            });
            self.ended = true;
        } else {
            self.pending = acts;
        }
        Ok(Some(reply))
    }

    /// Whether the system objectively satisfied the goal.
    pub fn objective_success(&self, ontology: &Ontology) -> bool {
        goal_satisfied(&self.goal, ontology, self.turns.iter().map(|t| t.system_acts.as_slice()))
    }

    /// The finished record scored by the person's verdict.
    pub fn into_record(self, success: bool) -> Result<DialogueRecord> {
        if !self.ended {
            return Err(Error::Contract {
                turn: self.turns.len(),
                message: "dialogue has not ended".into(),
            });
        }
        let mut record = DialogueRecord {
            turns: self.turns,
            success,
            initial_goal: self.goal.clone(),
            goal: self.goal,
            seed: self.seed,
            stream: self.stream,
        };
        record.set_outcome(success);
        record.check_invariants()?;
        Ok(record)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::system::LearnerKind;
    use crate::testutil::toy_ontology;

    fn setup() -> (Ontology, SemanticDecoder, Learner, Goal) {
        let o = toy_ontology();
        let d = SemanticDecoder::with_default_rules(&o).unwrap();
        let l = crate::harness::train::new_learner(LearnerKind::GpSarsa, &o);
        let g = Goal::new([("food".to_string(), "spanish".to_string())].into_iter().collect(), vec!["phone".into()]);
        (o, d, l, g)
    }

    #[test]
    fn bye_ends_and_verdict_sets_reward() {
        let (o, d, l, g) = setup();
        let (mut live, text) = LiveDialogue::open(g, 1, 0).unwrap();
        assert!(!text.is_empty());
        let mut rng = seeded(0);
        assert!(live.user_turn("i want spanish food", &l, &o, &d, &mut rng).unwrap().is_some());
        assert!(!live.ended);
        live.user_turn("thank you goodbye", &l, &o, &d, &mut rng).unwrap();
        assert!(live.ended);
        assert!(live.user_turn("hello", &l, &o, &d, &mut rng).is_err());
        let rec = live.into_record(true).unwrap();
        assert_eq!(rec.n_turns(), 2);
        assert_eq!(rec.total_reward(), 18.0);
        assert_eq!(rec.turns.last().unwrap().reward, 19.0);
    }

    #[test]
    fn record_before_end_is_refused() {
        let (_, _, _, g) = setup();
        let (live, _) = LiveDialogue::open(g, 1, 0).unwrap();
        assert!(live.into_record(false).is_err());
    }

    #[test]
    fn serialized_state_round_trips() {
        let (o, d, l, g) = setup();
        let (mut live, _) = LiveDialogue::open(g, 1, 0).unwrap();
        live.user_turn("cheap spanish food please", &l, &o, &d, &mut seeded(0)).unwrap();
        let back: LiveDialogue = serde_json::from_str(&serde_json::to_string(&live).unwrap()).unwrap();
        assert_eq!(back, live);
        assert_eq!(back.belief(&o), live.belief(&o));
    }
}
