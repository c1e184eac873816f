//! Dialogue corpora: the normalized on-disk format, goal-label
//! transformation, delexicalisation, training-set construction, a DSTC2
//! importer and a synthetic generator.

pub mod build;
pub mod delex;
pub mod dstc2;
pub mod labels;
pub mod synth;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::acts::SystemAct;
use crate::error::{Error, Result};
use crate::goal::Goal;
use crate::ontology::Constraints;

pub use build::{build_training_set, examples, split_dialogues, turn_goals, CorpusStats, TrainingSet, TrainingTurn, DEFAULT_MAX_TURN_LEN};
pub use delex::{delexicalize_turn, lexicalize, Delexicalizer, Lexicalized};
pub use labels::{transform_goal_labels, transform_goal_labels_checked, LabelWarning};
pub use synth::{synthesize_corpus, SynthConfig};

/// One exchange: the system turn and the user's reply to it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTurn {
    pub sys_acts: Vec<SystemAct>,
    pub user_text: String,
    /// Cumulative constraint labels after this turn.
    pub constraints: Constraints,
    /// Requests of the final goal; identical on every turn of a dialogue.
    pub requests: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDialogue {
    pub id: String,
    pub turns: Vec<RawTurn>,
}

impl RawDialogue {
    pub fn final_constraints(&self) -> Constraints {
        self.turns.last().map(|t| t.constraints.clone()).unwrap_or_default()
    }

    pub fn final_requests(&self) -> Vec<String> {
        self.turns.last().map(|t| t.requests.clone()).unwrap_or_default()
    }

    pub fn final_goal(&self) -> Goal {
        Goal::new(self.final_constraints(), self.final_requests())
    }

    pub fn constraint_labels(&self) -> Vec<Constraints> {
        self.turns.iter().map(|t| t.constraints.clone()).collect()
    }

    /// Checks the structural invariants: at least one turn, constant requests.
    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.turns.first() else {
            return Err(Error::parse("dialogue", format!("{}: no turns", self.id)));
        };
        if self.turns.iter().any(|t| t.requests != first.requests) {
            return Err(Error::parse("dialogue", format!("{}: requests change between turns", self.id)));
        }
        Ok(())
    }
}

fn dialogue_id(index: usize) -> String {
    format!("d{index:05}")
}

/// Serializes dialogues to the normalized corpus document.
pub fn corpus_to_json(dialogues: &[RawDialogue]) -> String {
    let doc: Vec<&Vec<RawTurn>> = dialogues.iter().map(|d| &d.turns).collect();
    serde_json::to_string(&doc).expect("corpus serializes")
}

/// Parses a normalized corpus document. Dialogue ids are positional.
pub fn corpus_from_json(text: &str) -> Result<Vec<RawDialogue>> {
    let doc: Vec<Vec<RawTurn>> = serde_json::from_str(text).map_err(|e| Error::parse("corpus", e))?;
    let dialogues: Vec<RawDialogue> = doc
        .into_iter()
        .enumerate()
        .map(|(k, turns)| RawDialogue { id: dialogue_id(k), turns })
        .collect();
    for d in &dialogues {
        d.validate()?;
    }
    Ok(dialogues)
}

pub fn save_corpus(path: impl AsRef<Path>, dialogues: &[RawDialogue]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, corpus_to_json(dialogues)).map_err(|e| Error::io(path, e))
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<RawDialogue>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    corpus_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn turn(text: &str, c: &[(&str, &str)]) -> RawTurn {
        RawTurn {
            sys_acts: vec![SystemAct::welcome()],
            user_text: text.into(),
            constraints: c.iter().map(|(s, v)| (s.to_string(), v.to_string())).collect(),
            requests: vec!["phone".into()],
        }
    }

    #[test]
    fn normalized_format_round_trip() {
        let d = vec![RawDialogue {
            id: dialogue_id(0),
            turns: vec![turn("spanish food", &[("food", "spanish")]), turn("bye", &[("food", "spanish")])],
        }];
        let json = corpus_to_json(&d);
        assert!(json.starts_with("[[{\"sys_acts\":[{\"act\":\"welcomemsg\""));
        assert_eq!(corpus_from_json(&json).unwrap(), d);
    }

    #[test]
    fn empty_dialogue_is_rejected() {
        assert!(corpus_from_json("[[]]").is_err());
    }

    #[test]
    fn changing_requests_are_rejected() {
        let mut t2 = turn("bye", &[]);
        t2.requests = vec!["addr".into()];
        let d = RawDialogue { id: "x".into(), turns: vec![turn("hi", &[]), t2] };
        assert!(d.validate().is_err());
    }
}
