//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashSet;

use nusbench::corpus::{build_training_set, synthesize_corpus, SynthConfig};
use nusbench::ontology::{Constraints, Ontology};
use nusbench::rng::seeded;
use nusbench::seq2seq::{Example, Seq2Seq, Vocab};
use rand::Rng;

pub fn constraints(pairs: &[(&str, &str)]) -> Constraints {
    pairs.iter().map(|(s, v)| (s.to_string(), v.to_string())).collect()
}

/// Per-turn cumulative labels of the worked goal-change dialogue.
pub fn table1_input() -> Vec<Constraints> {
    vec![
        constraints(&[("food", "eritrean")]),
        constraints(&[("area", "south"), ("food", "eritrean")]),
        constraints(&[("area", "south"), ("food", "spanish")]),
        constraints(&[("area", "south"), ("food", "spanish"), ("pricerange", "cheap")]),
    ]
}

pub fn table1_expected() -> Vec<Constraints> {
    vec![
        constraints(&[("area", "south"), ("food", "eritrean"), ("pricerange", "cheap")]),
        constraints(&[("area", "south"), ("food", "eritrean"), ("pricerange", "cheap")]),
        constraints(&[("area", "south"), ("food", "spanish"), ("pricerange", "cheap")]),
        constraints(&[("area", "south"), ("food", "spanish"), ("pricerange", "cheap")]),
    ]
}

/// Max relative error between backprop and central differences, per tensor.
/// Relative error is `|a - n| / max(|a|, |n|, floor)`.
pub fn gradient_check(seed: u64, floor: f64) -> Vec<(String, f64)> {
    let mut rng = seeded(seed);
    let feature_dim = 33;
    let words: Vec<String> = (0..17).map(|i| format!("w{i:02}")).collect();
    let vocab = Vocab::build([words.as_slice()]);
    assert_eq!(vocab.len(), 20);
    let mut model = Seq2Seq::new_random(feature_dim, 8, 6, vocab, &mut rng);
    model.params.scale(5.0);
    let examples: Vec<Example> = (0..2)
        .map(|_| Example {
            history: (0..3)
                .map(|_| (0..feature_dim).map(|_| f64::from(rng.random::<bool>())).collect())
                .collect(),
            target: (0..5).map(|_| rng.random_range(3..20)).chain([1]).collect(),
        })
        .collect();
    let (_, grads) = model.batch_loss(&examples).unwrap();
    let h = 1e-5;
    let loss = |m: &Seq2Seq| m.batch_loss(&examples).unwrap().0;
    let n_tensors = model.params.tensors().len();
    let mut out = Vec::new();
    for ti in 0..n_tensors {
        let name = model.params.tensors()[ti].name.clone();
        let len = model.params.tensors()[ti].data.len();
        let mut worst = 0.0f64;
        for k in 0..len {
            let orig = model.params.tensors()[ti].data[k];
            model.params.tensors_mut()[ti].data[k] = orig + h;
            let up = loss(&model);
            model.params.tensors_mut()[ti].data[k] = orig - h;
            let down = loss(&model);
            model.params.tensors_mut()[ti].data[k] = orig;
            let numeric = (up - down) / (2.0 * h);
            let analytic = grads.tensors()[ti].data[k];
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor);
            worst = worst.max(rel);
        }
        out.push((name, worst));
    }
    out
}

/// Up to `n` training turns from a synthetic corpus, keeping only the first
/// turn for any repeated context so that each context has one target.
pub fn distinct_context_turns(ontology: &Ontology, n: usize, seed: u64) -> (Vocab, Vec<Example>) {
    let cfg = SynthConfig {
        n_dialogues: 60,
        ..SynthConfig::default()
    };
    let dialogues = synthesize_corpus(ontology, &cfg, seed).unwrap();
    let set = build_training_set(&dialogues, ontology, 22).unwrap();
    let mut seen = HashSet::new();
    let turns: Vec<_> = set
        .turns
        .into_iter()
        .filter(|t| seen.insert(t.history.clone()))
        .take(n)
        .collect();
    assert_eq!(turns.len(), n, "corpus too small for {n} distinct contexts");
    let vocab = Vocab::build(turns.iter().map(|t| t.target.as_slice()));
    let examples = turns.iter().map(|t| t.to_example(&vocab)).collect();
    (vocab, examples)
}

/// Word-bounded containment, written independently of the simulator's check.
pub fn text_mentions(text: &str, value: &str) -> bool {
    let words: Vec<&str> = text.split_whitespace().collect();
    let target: Vec<&str> = value.split_whitespace().collect();
    !target.is_empty() && words.windows(target.len()).any(|w| w == target.as_slice())
}
