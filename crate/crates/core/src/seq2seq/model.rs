//! Encoder–bridge–decoder network with hand-written backpropagation.
//!
//! The encoder LSTM reads one feature vector per dialogue turn. Its last
//! output goes through a linear bridge, `p = Wp h + bp`. The decoder LSTM
//! reads `[onehot(w_{t-1}); p]` and an affine output layer plus softmax
//! gives `P(w_t | w_{<t}, p)`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::lstm::{Lstm, LstmState, StepCache};
use super::tensor::{softmax, Tensor};
use super::vocab::{Vocab, SOS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    pub feature_dim: usize,
    pub hidden: usize,
    pub bridge: usize,
    pub vocab: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub encoder: Lstm,
    pub bridge_w: Tensor,
    pub bridge_b: Tensor,
    pub decoder: Lstm,
    pub out_w: Tensor,
    pub out_b: Tensor,
}

impl Params {
    pub fn zeros(d: &ModelDims) -> Self {
        Self {
            encoder: Lstm::zeros("encoder", d.feature_dim, d.hidden),
            bridge_w: Tensor::zeros("bridge.w", d.bridge, d.hidden),
            bridge_b: Tensor::zeros("bridge.b", d.bridge, 1),
            decoder: Lstm::zeros("decoder", d.vocab + d.bridge, d.hidden),
            out_w: Tensor::zeros("output.w", d.vocab, d.hidden),
            out_b: Tensor::zeros("output.b", d.vocab, 1),
        }
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for t in z.tensors_mut() {
            t.data.iter_mut().for_each(|v| *v = 0.0);
        }
        z
    }

    /// Fixed order used by the optimizer and checkpoints.
    pub fn tensors(&self) -> Vec<&Tensor> {
        let mut v: Vec<&Tensor> = self.encoder.tensors().into();
        v.push(&self.bridge_w);
        v.push(&self.bridge_b);
        v.extend(self.decoder.tensors());
        v.push(&self.out_w);
        v.push(&self.out_b);
        v
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut v: Vec<&mut Tensor> = self.encoder.tensors_mut().into();
        v.push(&mut self.bridge_w);
        v.push(&mut self.bridge_b);
        v.extend(self.decoder.tensors_mut());
        v.push(&mut self.out_w);
        v.push(&mut self.out_b);
        v
    }

    pub fn init_uniform<R: Rng + ?Sized>(&mut self, scale: f64, rng: &mut R) {
        for t in self.tensors_mut() {
            for v in &mut t.data {
                *v = rng.random_range(-scale..scale);
            }
        }
    }

    pub fn n_params(&self) -> usize {
        self.tensors().iter().map(|t| t.data.len()).sum()
    }

    pub fn scale(&mut self, s: f64) {
        for t in self.tensors_mut() {
            t.data.iter_mut().for_each(|v| *v *= s);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.is_finite())
    }

    /// SHA-256 over the bit patterns of every parameter.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        for t in self.tensors() {
            h.update(t.name.as_bytes());
            for v in &t.data {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// One training example in index form. `target` ends with `<EOS>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub history: Vec<Vec<f64>>,
    pub target: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seq2Seq {
    pub dims: ModelDims,
    pub params: Params,
    pub vocab: Vocab,
}

/// Decoder conditioning: the bridge output and its precomputed input term.
#[derive(Debug, Clone)]
pub struct DecoderContext {
    pub p: Vec<f64>,
    zp: Vec<f64>,
}

impl Seq2Seq {
    pub fn zeros(feature_dim: usize, hidden: usize, bridge: usize, vocab: Vocab) -> Self {
        let dims = ModelDims {
            feature_dim,
            hidden,
            bridge,
            vocab: vocab.len(),
        };
        Self {
            dims,
            params: Params::zeros(&dims),
            vocab,
        }
    }

    pub fn new_random<R: Rng + ?Sized>(feature_dim: usize, hidden: usize, bridge: usize, vocab: Vocab, rng: &mut R) -> Self {
        let mut m = Self::zeros(feature_dim, hidden, bridge, vocab);
        m.params.init_uniform(0.08, rng);
        m
    }

    fn check_feature(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dims.feature_dim {
            return Err(Error::DimensionMismatch {
                expected: self.dims.feature_dim,
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Advances the encoder by one dialogue turn.
    pub fn encoder_step(&self, state: &LstmState, feature: &[f64]) -> Result<LstmState> {
        self.check_feature(feature)?;
        let mut xin = vec![0.0; 4 * self.dims.hidden];
        self.params.encoder.wx.matvec_add(feature, &mut xin);
        Ok(self.params.encoder.step_preact(&xin, state).0)
    }

    pub fn bridge(&self, h: &[f64]) -> Vec<f64> {
        let mut p = self.params.bridge_b.data.clone();
        self.params.bridge_w.matvec_add(h, &mut p);
        p
    }

    /// `p = Wp h_E(T) + bp` for a whole feature history.
    pub fn encode_history(&self, history: &[Vec<f64>]) -> Result<Vec<f64>> {
        if history.is_empty() {
            return Err(Error::EmptyHistory);
        }
        let mut state = LstmState::zeros(self.dims.hidden);
        for v in history {
            state = self.encoder_step(&state, v)?;
        }
        Ok(self.bridge(&state.h))
    }

    pub fn decoder_context(&self, p: &[f64]) -> Result<DecoderContext> {
        if p.len() != self.dims.bridge {
            return Err(Error::DimensionMismatch {
                expected: self.dims.bridge,
                got: p.len(),
            });
        }
        let mut zp = vec![0.0; 4 * self.dims.hidden];
        self.params.decoder.wx.matvec_cols_add(self.dims.vocab, p, &mut zp);
        Ok(DecoderContext { p: p.to_vec(), zp })
    }

    fn decoder_preact(&self, ctx: &DecoderContext, token: usize) -> Vec<f64> {
        let wx = &self.params.decoder.wx;
        let mut xin = ctx.zp.clone();
        for (r, v) in xin.iter_mut().enumerate() {
            *v += wx.get(r, token);
        }
        xin
    }

    fn output_probs(&self, h: &[f64]) -> Vec<f64> {
        let mut logits = self.params.out_b.data.clone();
        self.params.out_w.matvec_add(h, &mut logits);
        softmax(&logits)
    }

    /// Feeds `token` to the decoder and returns the next state and the
    /// distribution over the following token.
    pub fn decoder_step(&self, ctx: &DecoderContext, state: &LstmState, token: usize) -> (LstmState, Vec<f64>) {
        let xin = self.decoder_preact(ctx, token);
        let (next, _) = self.params.decoder.step_preact(&xin, state);
        let probs = self.output_probs(&next.h);
        (next, probs)
    }

    /// `P(w_t | prefix, p)`. A leading `<SOS>` in `prefix` is optional.
    pub fn decoder_distribution(&self, p: &[f64], prefix: &[String]) -> Result<Vec<f64>> {
        let ctx = self.decoder_context(p)?;
        let body = match prefix.first() {
            Some(t) if t == SOS => &prefix[1..],
            _ => prefix,
        };
        let ids = body.iter().map(|t| self.vocab.require(t)).collect::<Result<Vec<_>>>()?;
        let mut state = LstmState::zeros(self.dims.hidden);
        let (mut next, mut probs) = self.decoder_step(&ctx, &state, Vocab::SOS_ID);
        for id in ids {
            state = next;
            (next, probs) = self.decoder_step(&ctx, &state, id);
        }
        Ok(probs)
    }

    /// `log P(tokens | p)` as a sum of stepwise log-probabilities.
    pub fn sequence_log_prob(&self, p: &[f64], tokens: &[usize]) -> Result<f64> {
        let ctx = self.decoder_context(p)?;
        let mut state = LstmState::zeros(self.dims.hidden);
        let mut prev = Vocab::SOS_ID;
        let mut total = 0.0;
        for &t in tokens {
            let (next, probs) = self.decoder_step(&ctx, &state, prev);
            total += probs[t].ln();
            state = next;
            prev = t;
        }
        Ok(total)
    }

    /// Summed token NLL of one example, no gradients.
    pub fn example_nll(&self, ex: &Example) -> Result<f64> {
        let p = self.encode_history(&ex.history)?;
        Ok(-self.sequence_log_prob(&p, &ex.target)?)
    }

    /// Summed token NLL of one example; accumulates `scale ×` its gradient.
    pub fn accumulate_gradient(&self, ex: &Example, scale: f64, grads: &mut Params) -> Result<f64> {
        if ex.history.is_empty() {
            return Err(Error::EmptyHistory);
        }
        let hd = self.dims.hidden;
        let vocab = self.dims.vocab;
        let prm = &self.params;

        // encoder forward
        let mut enc_caches: Vec<StepCache> = Vec::with_capacity(ex.history.len());
        let mut state = LstmState::zeros(hd);
        for v in &ex.history {
            self.check_feature(v)?;
            let mut xin = vec![0.0; 4 * hd];
            prm.encoder.wx.matvec_add(v, &mut xin);
            let (next, cache) = prm.encoder.step_preact(&xin, &state);
            enc_caches.push(cache);
            state = next;
        }
        let h_enc = state.h;
        let p = self.bridge(&h_enc);
        let ctx = self.decoder_context(&p)?;

        // decoder forward with teacher forcing
        let n = ex.target.len();
        let mut dec_caches: Vec<StepCache> = Vec::with_capacity(n);
        let mut dec_h: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut dec_probs: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut inputs: Vec<usize> = Vec::with_capacity(n);
        let mut state = LstmState::zeros(hd);
        let mut prev = Vocab::SOS_ID;
        let mut nll = 0.0;
        for &t in &ex.target {
            if t >= vocab {
                return Err(Error::UnknownToken(format!("id {t}")));
            }
            let xin = self.decoder_preact(&ctx, prev);
            let (next, cache) = prm.decoder.step_preact(&xin, &state);
            let probs = self.output_probs(&next.h);
            nll -= probs[t].ln();
            inputs.push(prev);
            dec_caches.push(cache);
            dec_h.push(next.h.clone());
            dec_probs.push(probs);
            state = next;
            prev = t;
        }

        // decoder backward
        let mut dh_next = vec![0.0; hd];
        let mut dc_next = vec![0.0; hd];
        let mut dzp_sum = vec![0.0; 4 * hd];
        for step in (0..n).rev() {
            let mut dlogits = dec_probs[step].clone();
            dlogits[ex.target[step]] -= 1.0;
            dlogits.iter_mut().for_each(|v| *v *= scale);
            grads.out_w.outer_add(&dlogits, &dec_h[step]);
            for (g, d) in grads.out_b.data.iter_mut().zip(&dlogits) {
                *g += d;
            }
            let mut dh = dh_next.clone();
            prm.out_w.matvec_t_add(&dlogits, &mut dh);
            let (dz, dh_prev, dc_prev) = prm.decoder.backward_step(&dec_caches[step], &dh, &dc_next, &mut grads.decoder);
            grads.decoder.wx.column_add(inputs[step], &dz);
            for (s, d) in dzp_sum.iter_mut().zip(&dz) {
                *s += d;
            }
            dh_next = dh_prev;
            dc_next = dc_prev;
        }
        grads.decoder.wx.outer_cols_add(vocab, &dzp_sum, &p);
        let mut dp = vec![0.0; self.dims.bridge];
        prm.decoder.wx.matvec_t_cols_add(vocab, &dzp_sum, &mut dp);

        // bridge backward
        grads.bridge_w.outer_add(&dp, &h_enc);
        for (g, d) in grads.bridge_b.data.iter_mut().zip(&dp) {
            *g += d;
        }
        let mut dh = vec![0.0; hd];
        prm.bridge_w.matvec_t_add(&dp, &mut dh);

        // encoder backward
        let mut dc = vec![0.0; hd];
        for (step, cache) in enc_caches.iter().enumerate().rev() {
            let (dz, dh_prev, dc_prev) = prm.encoder.backward_step(cache, &dh, &dc, &mut grads.encoder);
            grads.encoder.wx.outer_add(&dz, &ex.history[step]);
            dh = dh_prev;
            dc = dc_prev;
        }
        Ok(nll)
    }

    /// Mean per-token negative log-likelihood of a batch and its gradient.
    pub fn batch_loss(&self, batch: &[Example]) -> Result<(f64, Params)> {
        if batch.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let n_tokens: usize = batch.iter().map(|e| e.target.len()).sum();
        let scale = 1.0 / n_tokens.max(1) as f64;
        let mut grads = self.params.zeros_like();
        let mut total = 0.0;
        for ex in batch {
            total += self.accumulate_gradient(ex, scale, &mut grads)?;
        }
        Ok((total * scale, grads))
    }

    /// Mean per-token NLL over a set of examples.
    pub fn mean_token_nll(&self, examples: &[Example]) -> Result<f64> {
        let mut total = 0.0;
        let mut tokens = 0usize;
        for ex in examples {
            total += self.example_nll(ex)?;
            tokens += ex.target.len();
        }
        Ok(if tokens == 0 { 0.0 } else { total / tokens as f64 })
    }
}
