//! Decoding: greedy and beam search with per-beam sampling.
//!
//! In beam search with sampling each live beam proposes `n` successor words
//! drawn from its own next-word distribution (rather than its top `n`); the
//! `n` best candidates by cumulative log-probability survive. A beam that
//! emits `<EOS>` is finished and keeps competing on its score.

use rand::Rng;

use super::lstm::LstmState;
use super::model::Seq2Seq;
use super::vocab::Vocab;
use crate::error::Result;

/// Chooses successor words from a next-word distribution.
pub trait TokenPicker {
    fn pick(&mut self, probs: &[f64], n: usize) -> Vec<usize>;
}

/// Deterministic top-`n` (plain beam search; greedy with one beam).
#[derive(Debug, Default, Clone, Copy)]
pub struct ArgmaxPicker;

impl TokenPicker for ArgmaxPicker {
    fn pick(&mut self, probs: &[f64], n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..probs.len()).collect();
        idx.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
        idx.truncate(n);
        idx
    }
}

/// Draws `n` distinct words without replacement.
pub struct SamplingPicker<'a, R: Rng + ?Sized> {
    pub rng: &'a mut R,
}

impl<'a, R: Rng + ?Sized> SamplingPicker<'a, R> {
    pub fn new(rng: &'a mut R) -> Self {
        Self { rng }
    }
}

impl<R: Rng + ?Sized> TokenPicker for SamplingPicker<'_, R> {
    fn pick(&mut self, probs: &[f64], n: usize) -> Vec<usize> {
        let mut weights = probs.to_vec();
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let total: f64 = weights.iter().sum();
            if total <= 0.0 {
                break;
            }
            let mut u = self.rng.random::<f64>() * total;
            let mut chosen = None;
            for (i, &w) in weights.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                chosen = Some(i);
                if u < w {
                    break;
                }
                u -= w;
            }
            let Some(i) = chosen else { break };
            out.push(i);
            weights[i] = 0.0;
        }
        out
    }
}

#[derive(Debug, Clone)]
struct Beam {
    tokens: Vec<usize>,
    log_prob: f64,
    /// Decoder state after consuming every token but the last.
    state: LstmState,
    finished: bool,
}

/// Result of a decode: token ids (including the final `<EOS>` when reached).
#[derive(Debug, Clone, PartialEq)]
pub struct Generation {
    pub tokens: Vec<usize>,
    pub log_prob: f64,
    pub finished: bool,
}

/// Beam search where successors are chosen by `picker`.
pub fn beam_search<P: TokenPicker + ?Sized>(
    model: &Seq2Seq,
    p: &[f64],
    n_beams: usize,
    picker: &mut P,
    max_len: usize,
) -> Result<Generation> {
    let n_beams = n_beams.max(1);
    let ctx = model.decoder_context(p)?;
    let mut live = vec![Beam {
        tokens: Vec::new(),
        log_prob: 0.0,
        state: LstmState::zeros(model.dims.hidden),
        finished: false,
    }];
    let mut finished: Vec<Beam> = Vec::new();
    for _ in 0..max_len.max(1) {
        let mut pool: Vec<Beam> = finished.clone();
        for beam in &live {
            let last = beam.tokens.last().copied().unwrap_or(Vocab::SOS_ID);
            let (state, probs) = model.decoder_step(&ctx, &beam.state, last);
            for w in picker.pick(&probs, n_beams) {
                let mut tokens = beam.tokens.clone();
                tokens.push(w);
                pool.push(Beam {
                    tokens,
                    log_prob: beam.log_prob + probs[w].ln(),
                    state: state.clone(),
                    finished: w == Vocab::EOS_ID,
                });
            }
        }
        // stable: earlier pool entries win ties
        pool.sort_by(|a, b| b.log_prob.total_cmp(&a.log_prob));
        pool.truncate(n_beams);
        let (done, open): (Vec<Beam>, Vec<Beam>) = pool.into_iter().partition(|b| b.finished);
        finished = done;
        live = open;
        if live.is_empty() {
            break;
        }
    }
    let best = finished
        .into_iter()
        .max_by(|a, b| a.log_prob.total_cmp(&b.log_prob))
        .or_else(|| live.into_iter().max_by(|a, b| a.log_prob.total_cmp(&b.log_prob)))
        .expect("beam search always keeps at least one beam");
    Ok(Generation {
        finished: best.finished,
        log_prob: best.log_prob,
        tokens: best.tokens,
    })
}

/// Beam search with sampling driven by `rng`.
pub fn generate_beam_sample<R: Rng + ?Sized>(
    model: &Seq2Seq,
    p: &[f64],
    n_beams: usize,
    rng: &mut R,
    max_len: usize,
) -> Result<Generation> {
    beam_search(model, p, n_beams, &mut SamplingPicker::new(rng), max_len)
}

/// Independent argmax decoding loop, kept separate from the beam code.
pub fn greedy_decode(model: &Seq2Seq, p: &[f64], max_len: usize) -> Result<Generation> {
    let ctx = model.decoder_context(p)?;
    let mut state = LstmState::zeros(model.dims.hidden);
    let mut prev = Vocab::SOS_ID;
    let mut tokens = Vec::new();
    let mut log_prob = 0.0;
    for _ in 0..max_len.max(1) {
        let (next, probs) = model.decoder_step(&ctx, &state, prev);
        let mut best = 0;
        for (i, &q) in probs.iter().enumerate() {
            if q > probs[best] {
                best = i;
            }
        }
        log_prob += probs[best].ln();
        tokens.push(best);
        if best == Vocab::EOS_ID {
            return Ok(Generation { tokens, log_prob, finished: true });
        }
        state = next;
        prev = best;
    }
    Ok(Generation { tokens, log_prob, finished: false })
}
