//! Episodic value learners over the discrete summary space.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;

pub const POLICY_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub state: usize,
    pub action: usize,
    pub reward: f64,
}

pub trait PolicyLearner {
    /// Picks an unmasked action; with probability `explore` an exploratory one.
    fn select(&self, state: usize, mask: &[bool], explore: f64, rng: &mut SimRng) -> usize;

    /// Highest-valued unmasked action; ties go to the lowest index.
    fn greedy(&self, state: usize, mask: &[bool]) -> usize;

    /// Learns from one complete episode.
    fn observe(&mut self, episode: &[Step]) -> Result<()>;
}

fn argmax_masked(values: &[f64], mask: &[bool]) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (a, (&v, &ok)) in values.iter().zip(mask).enumerate() {
        if ok && best.is_none_or(|(_, bv)| v > bv) {
            best = Some((a, v));
        }
    }
    best.map(|(a, _)| a).expect("mask allows at least one action")
}

fn random_legal(mask: &[bool], rng: &mut SimRng) -> usize {
    let legal: Vec<usize> = (0..mask.len()).filter(|&a| mask[a]).collect();
    legal[rng.random_range(0..legal.len())]
}

fn check_episode(episode: &[Step], n_states: usize, n_actions: usize) -> Result<()> {
    if episode.is_empty() {
        return Err(Error::IncompleteEpisode);
    }
    if episode.iter().any(|s| s.state >= n_states || s.action >= n_actions || !s.reward.is_finite()) {
        return Err(Error::Contract {
            turn: 0,
            message: "episode step outside the learner's state/action space".into(),
        });
    }
    Ok(())
}

/// Kronecker-delta-kernel GP-SARSA: a Gaussian posterior per (state, action)
/// updated by Kalman steps towards SARSA targets, swept backwards over each
/// episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpSarsa {
    pub n_states: usize,
    pub n_actions: usize,
    pub gamma: f64,
    pub prior_var: f64,
    pub noise_var: f64,
    /// Variance added after each update so the posterior never freezes.
    pub process_var: f64,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

impl GpSarsa {
    pub fn new(n_states: usize, n_actions: usize) -> Self {
        let prior_var = 400.0;
        Self {
            n_states,
            n_actions,
            gamma: 0.99,
            prior_var,
            noise_var: 1.0,
            process_var: 0.01,
            mean: vec![0.0; n_states * n_actions],
            var: vec![prior_var; n_states * n_actions],
        }
    }

    fn row(&self, s: usize) -> std::ops::Range<usize> {
        s * self.n_actions..(s + 1) * self.n_actions
    }
}

impl PolicyLearner for GpSarsa {
    fn select(&self, state: usize, mask: &[bool], explore: f64, rng: &mut SimRng) -> usize {
        if rng.random::<f64>() < explore {
            return random_legal(mask, rng);
        }
        self.greedy(state, mask)
    }

    fn greedy(&self, state: usize, mask: &[bool]) -> usize {
        argmax_masked(&self.mean[self.row(state)], mask)
    }

    fn observe(&mut self, episode: &[Step]) -> Result<()> {
        check_episode(episode, self.n_states, self.n_actions)?;
        for t in (0..episode.len()).rev() {
            let step = episode[t];
            let next = episode
                .get(t + 1)
                .map_or(0.0, |n| self.mean[n.state * self.n_actions + n.action]);
            let target = step.reward + self.gamma * next;
            let k = step.state * self.n_actions + step.action;
            let gain = self.var[k] / (self.var[k] + self.noise_var);
            self.mean[k] += gain * (target - self.mean[k]);
            self.var[k] = (1.0 - gain) * self.var[k] + self.process_var;
        }
        Ok(())
    }
}

/// Tabular SARSA(lambda) with replacing traces and epsilon-greedy exploration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SarsaLambda {
    pub n_states: usize,
    pub n_actions: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub q: Vec<f64>,
}

impl SarsaLambda {
    pub fn new(n_states: usize, n_actions: usize) -> Self {
        Self {
            n_states,
            n_actions,
            alpha: 0.1,
            gamma: 0.99,
            lambda: 0.9,
            q: vec![0.0; n_states * n_actions],
        }
    }
}

impl PolicyLearner for SarsaLambda {
    fn select(&self, state: usize, mask: &[bool], explore: f64, rng: &mut SimRng) -> usize {
        if rng.random::<f64>() < explore {
            return random_legal(mask, rng);
        }
        self.greedy(state, mask)
    }

    fn greedy(&self, state: usize, mask: &[bool]) -> usize {
        argmax_masked(&self.q[state * self.n_actions..(state + 1) * self.n_actions], mask)
    }

    fn observe(&mut self, episode: &[Step]) -> Result<()> {
        check_episode(episode, self.n_states, self.n_actions)?;
        let mut traces: Vec<(usize, f64)> = Vec::new();
        for t in 0..episode.len() {
            let step = episode[t];
            let k = step.state * self.n_actions + step.action;
            let next = episode.get(t + 1).map_or(0.0, |n| self.q[n.state * self.n_actions + n.action]);
            let delta = step.reward + self.gamma * next - self.q[k];
            match traces.iter_mut().find(|(i, _)| *i == k) {
                Some(e) => e.1 = 1.0,
                None => traces.push((k, 1.0)),
            }
            for (i, e) in traces.iter_mut() {
                self.q[*i] += self.alpha * delta * *e;
                *e *= self.gamma * self.lambda;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnerKind {
    #[default]
    GpSarsa,
    SarsaLambda,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "kebab-case")]
pub enum Learner {
    GpSarsa(GpSarsa),
    SarsaLambda(SarsaLambda),
}

impl Learner {
    pub fn new(kind: LearnerKind, n_states: usize, n_actions: usize) -> Self {
        match kind {
            LearnerKind::GpSarsa => Learner::GpSarsa(GpSarsa::new(n_states, n_actions)),
            LearnerKind::SarsaLambda => Learner::SarsaLambda(SarsaLambda::new(n_states, n_actions)),
        }
    }

    pub fn kind(&self) -> LearnerKind {
        match self {
            Learner::GpSarsa(_) => LearnerKind::GpSarsa,
            Learner::SarsaLambda(_) => LearnerKind::SarsaLambda,
        }
    }

    fn inner(&self) -> &dyn PolicyLearner {
        match self {
            Learner::GpSarsa(l) => l,
            Learner::SarsaLambda(l) => l,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn PolicyLearner {
        match self {
            Learner::GpSarsa(l) => l,
            Learner::SarsaLambda(l) => l,
        }
    }

    fn dims(&self) -> (usize, usize) {
        match self {
            Learner::GpSarsa(l) => (l.n_states, l.n_actions),
            Learner::SarsaLambda(l) => (l.n_states, l.n_actions),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&PolicyDoc {
            version: POLICY_VERSION,
            policy: self.clone(),
        })
        .expect("policy serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PolicyDoc = serde_json::from_str(text).map_err(|e| Error::Checkpoint(format!("policy: {e}")))?;
        if doc.version != POLICY_VERSION {
            return Err(Error::Checkpoint(format!("unsupported policy version {}", doc.version)));
        }
        let (s, a) = doc.policy.dims();
        let ok = match &doc.policy {
            Learner::GpSarsa(l) => l.mean.len() == s * a && l.var.len() == s * a,
            Learner::SarsaLambda(l) => l.q.len() == s * a,
        };
        if !ok {
            return Err(Error::Checkpoint("policy table has the wrong size".into()));
        }
        Ok(doc.policy)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct PolicyDoc {
    version: u32,
    policy: Learner,
}

impl PolicyLearner for Learner {
    fn select(&self, state: usize, mask: &[bool], explore: f64, rng: &mut SimRng) -> usize {
        self.inner().select(state, mask, explore, rng)
    }

    fn greedy(&self, state: usize, mask: &[bool]) -> usize {
        self.inner().greedy(state, mask)
    }

    fn observe(&mut self, episode: &[Step]) -> Result<()> {
        self.inner_mut().observe(episode)
    }
}
