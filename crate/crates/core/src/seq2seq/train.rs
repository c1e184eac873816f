use std::path::Path;

use log::info;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::model::{Example, Seq2Seq};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub hidden: usize,
    pub bridge: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub max_decode_len: usize,
    /// Stop after this many optimizer steps, if set.
    pub max_steps: Option<usize>,
    pub init_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: 100,
            bridge: 100,
            learning_rate: 1e-3,
            batch_size: 32,
            epochs: 10,
            seed: 0,
            max_decode_len: 30,
            max_steps: None,
            init_scale: 0.08,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.bridge == 0 || self.batch_size == 0 || self.max_decode_len == 0 {
            return Err(Error::Config("model dimensions, batch size and decode length must be positive".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train_nats: f64,
    pub valid_nats: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochLoss>,
    pub best_epoch: usize,
    pub best_valid_nats: f64,
    pub steps: usize,
}

/// Mini-batch Adam with turn-level shuffling each epoch. The parameters with
/// the lowest validation loss (training loss when `valid` is empty) are
/// returned.
pub fn train(mut model: Seq2Seq, train_set: &[Example], valid_set: &[Example], config: &TrainConfig) -> Result<(Seq2Seq, TrainReport)> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut adam = Adam::new(&model.params, config.learning_rate);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut best_params = model.params.clone();
    let mut best_loss = f64::INFINITY;
    let mut best_epoch = 0;
    let mut epochs = Vec::new();
    let mut steps = 0usize;
    let budget = config.max_steps.unwrap_or(usize::MAX);

    for epoch in 0..config.epochs {
        if steps >= budget {
            break;
        }
        let mut shuffle_rng = rng::stream(config.seed, rng::domain::SEQ2SEQ + epoch as u64);
        order.shuffle(&mut shuffle_rng);
        let mut nll_sum = 0.0;
        let mut token_sum = 0usize;
        for chunk in order.chunks(config.batch_size) {
            if steps >= budget {
                break;
            }
            let batch: Vec<Example> = chunk.iter().map(|&i| train_set[i].clone()).collect();
            let tokens: usize = batch.iter().map(|e| e.target.len()).sum();
            let (loss, grads) = model.batch_loss(&batch)?;
            adam.update(&mut model.params, &grads);
            nll_sum += loss * tokens as f64;
            token_sum += tokens;
            steps += 1;
        }
        let train_nats = nll_sum / token_sum.max(1) as f64;
        let valid_nats = if valid_set.is_empty() {
            model.mean_token_nll(train_set)?
        } else {
            model.mean_token_nll(valid_set)?
        };
        info!("epoch {epoch}: train {train_nats:.4} nats, valid {valid_nats:.4} nats, {steps} steps");
        if valid_nats < best_loss {
            best_loss = valid_nats;
            best_params = model.params.clone();
            best_epoch = epoch;
        }
        epochs.push(EpochLoss {
            epoch,
            train_nats,
            valid_nats,
        });
    }
    if !best_params.is_finite() {
        return Err(Error::Checkpoint("training diverged to non-finite parameters".into()));
    }
    model.params = best_params;
    Ok((
        model,
        TrainReport {
            epochs,
            best_epoch,
            best_valid_nats: best_loss,
            steps,
        },
    ))
}

pub fn write_loss_csv(path: impl AsRef<Path>, report: &TrainReport) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(path.display().to_string(), e))?;
    for e in &report.epochs {
        w.serialize(e).map_err(|e| Error::parse(path.display().to_string(), e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::seq2seq::vocab::Vocab;

    fn tiny_corpus() -> (Vocab, Vec<Example>) {
        let sents = [vec!["a", "b"], vec!["c"], vec!["a", "c", "b"], vec!["b", "b"], vec!["c", "a"]];
        let targets: Vec<Vec<String>> = sents
            .iter()
            .map(|s| s.iter().map(|t| t.to_string()).chain(["<EOS>".to_string()]).collect())
            .collect();
        let vocab = Vocab::build(targets.iter().map(Vec::as_slice));
        let examples = targets
            .iter()
            .enumerate()
            .map(|(k, t)| Example {
                history: (0..=k % 3).map(|j| (0..4).map(|i| ((i + j + k) % 2) as f64).collect()).collect(),
                target: vocab.encode(t),
            })
            .collect();
        (vocab, examples)
    }

    #[test]
    fn loss_decreases_nearly_monotonically() {
        let (vocab, examples) = tiny_corpus();
        let mut model = Seq2Seq::new_random(4, 12, 8, vocab, &mut seeded(1));
        let mut adam = Adam::new(&model.params, 1e-2);
        let mut losses = Vec::new();
        for _ in 0..100 {
            let (loss, g) = model.batch_loss(&examples).unwrap();
            adam.update(&mut model.params, &g);
            losses.push(loss);
        }
        let rises = losses.windows(2).filter(|w| w[1] > w[0]).count();
        assert!(rises <= 5, "{rises} non-monotone steps");
        assert!(losses[99] < losses[0]);
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let (vocab, examples) = tiny_corpus();
        let cfg = TrainConfig {
            hidden: 6,
            bridge: 5,
            batch_size: 2,
            epochs: 3,
            seed: 4,
            ..TrainConfig::default()
        };
        let run = || {
            let m = Seq2Seq::new_random(4, 6, 5, vocab.clone(), &mut seeded(cfg.seed));
            train(m, &examples, &examples[..2], &cfg).unwrap()
        };
        let (a, ra) = run();
        let (b, rb) = run();
        assert_eq!(a.params.checksum(), b.params.checksum());
        assert_eq!(ra, rb);
        assert_eq!(ra.epochs.len(), 3);
        let min = ra.epochs.iter().map(|e| e.valid_nats).fold(f64::INFINITY, f64::min);
        assert_eq!(ra.best_valid_nats, min);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let (vocab, _) = tiny_corpus();
        let m = Seq2Seq::zeros(4, 3, 3, vocab);
        assert!(matches!(train(m, &[], &[], &TrainConfig::default()), Err(Error::EmptyCorpus)));
    }
}
