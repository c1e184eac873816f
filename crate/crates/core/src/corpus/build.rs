//! Turns raw dialogues into seq2seq training examples.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::delex::Delexicalizer;
use super::labels::transform_goal_labels;
use super::RawDialogue;
use crate::error::Result;
use crate::features::{extract, init_state, FeatureVector};
use crate::goal::Goal;
use crate::ontology::{Ontology, DONTCARE};
use crate::rng::{domain, stream};
use crate::seq2seq::{Example, Vocab};

/// Default cap on delexicalised utterance length (words, `<EOS>` excluded).
pub const DEFAULT_MAX_TURN_LEN: usize = 22;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingTurn {
    pub history: Vec<FeatureVector>,
    /// Delexicalised tokens ending in `<EOS>`.
    pub target: Vec<String>,
    pub dialogue_id: String,
    pub turn: usize,
}

impl TrainingTurn {
    pub fn to_example(&self, vocab: &Vocab) -> Example {
        Example {
            history: self.history.iter().map(FeatureVector::to_dense).collect(),
            target: vocab.encode(&self.target),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_dialogues: usize,
    pub n_turns: usize,
    pub max_turn_len: usize,
    pub max_dialogue_len: usize,
    pub vocab_size: usize,
    /// Turns dropped for exceeding the length cap.
    pub excluded_turns: usize,
}

#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub turns: Vec<TrainingTurn>,
    pub stats: CorpusStats,
    pub vocab: Vocab,
}

impl TrainingSet {
    pub fn examples(&self) -> Vec<Example> {
        examples(&self.turns, &self.vocab)
    }
}

pub fn examples(turns: &[TrainingTurn], vocab: &Vocab) -> Vec<Example> {
    turns.iter().map(|t| t.to_example(vocab)).collect()
}

/// Per-turn goals a simulator would hold: transformed labels without
/// `dontcare`, requests from the final goal.
pub fn turn_goals(dialogue: &RawDialogue) -> Vec<Goal> {
    let requests = dialogue.final_requests();
    transform_goal_labels(&dialogue.constraint_labels())
        .into_iter()
        .map(|mut c| {
            c.retain(|_, v| v != DONTCARE);
            Goal::new(c, requests.clone())
        })
        .collect()
}

/// Replays each dialogue through the feature extractor and delexicalises
/// the user side. The vocabulary covers exactly the kept targets.
pub fn build_training_set(dialogues: &[RawDialogue], ontology: &Ontology, max_turn_len: usize) -> Result<TrainingSet> {
    let delex = Delexicalizer::new(ontology);
    let mut turns = Vec::new();
    let mut stats = CorpusStats {
        n_dialogues: dialogues.len(),
        ..CorpusStats::default()
    };
    for dialogue in dialogues {
        dialogue.validate()?;
        let goals = turn_goals(dialogue);
        let mut state = init_state(&goals[0], ontology);
        let mut history = Vec::with_capacity(dialogue.turns.len());
        stats.max_dialogue_len = stats.max_dialogue_len.max(dialogue.turns.len());
        for (t, (raw, goal)) in dialogue.turns.iter().zip(&goals).enumerate() {
            let (fv, next) = extract(&state, &raw.sys_acts, goal, ontology)?;
            state = next;
            history.push(fv);
            let target = delex.delexicalize(&raw.user_text, &goal.constraints);
            let words = target.len() - 1;
            if words > max_turn_len {
                stats.excluded_turns += 1;
                continue;
            }
            stats.max_turn_len = stats.max_turn_len.max(words);
            turns.push(TrainingTurn {
                history: history.clone(),
                target,
                dialogue_id: dialogue.id.clone(),
                turn: t,
            });
        }
    }
    stats.n_turns = turns.len();
    let vocab = Vocab::build(turns.iter().map(|t| t.target.as_slice()));
    stats.vocab_size = if turns.is_empty() { 0 } else { vocab.len() };
    Ok(TrainingSet { turns, stats, vocab })
}

/// Seeded split by dialogue; `train_fraction` of the dialogues go first.
pub fn split_dialogues(dialogues: &[RawDialogue], seed: u64, train_fraction: f64) -> (Vec<RawDialogue>, Vec<RawDialogue>) {
    let mut order: Vec<usize> = (0..dialogues.len()).collect();
    order.shuffle(&mut stream(seed, domain::CORPUS - 1));
    let n_train = ((dialogues.len() as f64) * train_fraction).round() as usize;
    let (a, b) = order.split_at(n_train.min(dialogues.len()));
    let pick = |ix: &[usize]| {
        let mut ix = ix.to_vec();
        ix.sort_unstable();
        ix.into_iter().map(|k| dialogues[k].clone()).collect::<Vec<_>>()
    };
    (pick(a), pick(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acts::SystemAct;
    use crate::corpus::RawTurn;
    use crate::ontology::Constraints;
    use crate::testutil::toy_ontology;

    fn c(pairs: &[(&str, &str)]) -> Constraints {
        pairs.iter().map(|(s, v)| (s.to_string(), v.to_string())).collect()
    }

    fn dialogue(turns: &[(&str, &[(&str, &str)])]) -> RawDialogue {
        RawDialogue {
            id: "t".into(),
            turns: turns
                .iter()
                .map(|(text, pairs)| RawTurn {
                    sys_acts: vec![SystemAct::welcome()],
                    user_text: text.to_string(),
                    constraints: c(pairs),
                    requests: vec!["phone".into()],
                })
                .collect(),
        }
    }

    #[test]
    fn empty_corpus_has_zero_stats() {
        let set = build_training_set(&[], &toy_ontology(), DEFAULT_MAX_TURN_LEN).unwrap();
        assert!(set.turns.is_empty());
        assert_eq!(set.stats, CorpusStats::default());
    }

    #[test]
    fn one_turn_per_user_turn_with_growing_history() {
        let d = dialogue(&[("spanish food", &[("food", "spanish")]), ("in the north", &[("food", "spanish"), ("area", "north")])]);
        let set = build_training_set(&[d], &toy_ontology(), DEFAULT_MAX_TURN_LEN).unwrap();
        assert_eq!(set.turns.len(), 2);
        assert_eq!(set.turns[0].history.len(), 1);
        assert_eq!(set.turns[1].history.len(), 2);
        assert_eq!(set.turns[1].target, vec!["in", "the", "<value_area>", "<EOS>"]);
        // transformed labels: both slots present from the first turn on
        assert_eq!(set.turns[0].history[0].c, vec![1, 1, 0]);
        assert_eq!(set.stats.max_turn_len, 3);
        assert_eq!(set.stats.vocab_size, set.vocab.len());
    }

    #[test]
    fn over_long_turns_are_excluded() {
        let long = vec!["word"; 30].join(" ");
        let d = dialogue(&[(long.as_str(), &[("food", "spanish")]), ("bye", &[("food", "spanish")])]);
        let set = build_training_set(&[d], &toy_ontology(), DEFAULT_MAX_TURN_LEN).unwrap();
        assert_eq!(set.turns.len(), 1);
        assert_eq!(set.stats.excluded_turns, 1);
        // history still counts the dropped turn
        assert_eq!(set.turns[0].history.len(), 2);
    }

    #[test]
    fn dontcare_is_not_a_goal_constraint() {
        let d = dialogue(&[("any area", &[("area", "dontcare")]), ("spanish", &[("area", "dontcare"), ("food", "spanish")])]);
        let goals = turn_goals(&d);
        assert_eq!(goals[0].constraints, c(&[("food", "spanish")]));
    }

    #[test]
    fn split_is_deterministic_and_disjoint() {
        let ds: Vec<RawDialogue> = (0..20)
            .map(|k| RawDialogue { id: format!("d{k}"), ..dialogue(&[("hi", &[])]) })
            .collect();
        let (a, b) = split_dialogues(&ds, 4, 0.75);
        assert_eq!((a.len(), b.len()), (15, 5));
        assert!(a.iter().all(|x| b.iter().all(|y| x.id != y.id)));
        assert_eq!(split_dialogues(&ds, 4, 0.75).0, a);
    }
}
