//! User goals: sampling, canthelp-driven mutation and success judgement.

use std::collections::{BTreeMap, BTreeSet};

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::acts::{SystemAct, SystemActType};
use crate::error::{Error, Result};
use crate::ontology::{Constraints, Ontology};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalChange {
    pub turn: usize,
    pub previous: Constraints,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Goal {
    pub constraints: Constraints,
    /// Requestable slots, in ontology order. Never altered after sampling.
    pub requests: Vec<String>,
    #[serde(default)]
    pub history: Vec<GoalChange>,
}

impl Goal {
    pub fn new(constraints: Constraints, requests: Vec<String>) -> Self {
        Self {
            constraints,
            requests,
            history: Vec::new(),
        }
    }

    pub fn changed(&self) -> bool {
        !self.history.is_empty()
    }

    /// Human-readable description used by the live service.
    pub fn describe(&self) -> String {
        let c: Vec<String> = self.constraints.iter().map(|(s, v)| format!("{s}={v}")).collect();
        format!("find a restaurant with {} and ask for {}", c.join(", "), self.requests.join(", "))
    }
}

/// Presence probabilities for goal sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalConfig {
    /// Per informable slot; slots missing here use `default_constraint_prob`.
    #[serde(default = "default_constraint_probs")]
    pub constraint_probs: BTreeMap<String, f64>,
    #[serde(default = "default_prob")]
    pub default_constraint_prob: f64,
    /// Per requestable slot; slots missing here use `default_request_prob`.
    #[serde(default)]
    pub request_probs: BTreeMap<String, f64>,
    #[serde(default = "default_request_prob")]
    pub default_request_prob: f64,
}

fn default_constraint_probs() -> BTreeMap<String, f64> {
    [("food", 0.66), ("area", 0.62), ("pricerange", 0.58)]
        .into_iter()
        .map(|(s, p)| (s.to_string(), p))
        .collect()
}

fn default_prob() -> f64 {
    0.5
}

fn default_request_prob() -> f64 {
    0.4
}

impl Default for GoalConfig {
    fn default() -> Self {
        Self {
            constraint_probs: default_constraint_probs(),
            default_constraint_prob: default_prob(),
            request_probs: BTreeMap::new(),
            default_request_prob: default_request_prob(),
        }
    }
}

impl GoalConfig {
    pub fn constraint_prob(&self, slot: &str) -> f64 {
        self.constraint_probs.get(slot).copied().unwrap_or(self.default_constraint_prob)
    }

    pub fn request_prob(&self, slot: &str) -> f64 {
        self.request_probs.get(slot).copied().unwrap_or(self.default_request_prob)
    }

    /// Every presence probability set to `p`.
    pub fn uniform(ontology: &Ontology, p: f64) -> Self {
        Self {
            constraint_probs: ontology.informable().iter().map(|s| (s.name.clone(), p)).collect(),
            default_constraint_prob: p,
            request_probs: ontology.requestable().iter().map(|s| (s.clone(), p)).collect(),
            default_request_prob: p,
        }
    }

    /// Presence frequencies estimated from final goals of a corpus.
    pub fn estimate(ontology: &Ontology, goals: &[Goal]) -> Self {
        let n = goals.len().max(1) as f64;
        let constraint_probs = ontology
            .informable()
            .iter()
            .map(|s| {
                let k = goals.iter().filter(|g| g.constraints.contains_key(&s.name)).count();
                (s.name.clone(), k as f64 / n)
            })
            .collect();
        let request_probs = ontology
            .requestable()
            .iter()
            .map(|r| {
                let k = goals.iter().filter(|g| g.requests.contains(r)).count();
                (r.clone(), k as f64 / n)
            })
            .collect();
        Self {
            constraint_probs,
            request_probs,
            ..Self::default()
        }
    }
}

/// One pre-rejection presence draw over the informable slots, in ontology order.
pub fn draw_constraint_presence<R: Rng + ?Sized>(ontology: &Ontology, config: &GoalConfig, rng: &mut R) -> Vec<bool> {
    ontology
        .informable()
        .iter()
        .map(|s| rng.random::<f64>() < config.constraint_prob(&s.name))
        .collect()
}

/// Draw order: constraint presence (slot order, repeated until non-empty),
/// then values, then request presence (repeated until non-empty).
pub fn sample_goal<R: Rng + ?Sized>(ontology: &Ontology, config: &GoalConfig, rng: &mut R) -> Result<Goal> {
    if ontology.n_informable() == 0 {
        return Err(Error::NoInformableSlots);
    }
    if ontology.informable().iter().all(|s| config.constraint_prob(&s.name) <= 0.0) {
        return Err(Error::Config("every constraint presence probability is zero".into()));
    }
    if ontology.n_requestable() == 0 || ontology.requestable().iter().all(|r| config.request_prob(r) <= 0.0) {
        return Err(Error::Config("no request can ever be sampled".into()));
    }
    let presence = loop {
        let p = draw_constraint_presence(ontology, config, rng);
        if p.iter().any(|&b| b) {
            break p;
        }
    };
    let mut constraints = Constraints::new();
    for (slot, present) in ontology.informable().iter().zip(presence) {
        if present {
            let k = rng.random_range(0..slot.values.len());
            constraints.insert(slot.name.clone(), slot.values[k].clone());
        }
    }
    let requests = loop {
        let r: Vec<String> = ontology
            .requestable()
            .iter()
            .filter(|r| rng.random::<f64>() < config.request_prob(r))
            .cloned()
            .collect();
        if !r.is_empty() {
            break r;
        }
    };
    Ok(Goal::new(constraints, requests))
}

/// Samples until at least one venue satisfies the constraints.
pub fn sample_achievable_goal<R: Rng + ?Sized>(ontology: &Ontology, config: &GoalConfig, rng: &mut R) -> Result<Goal> {
    if ontology.venues().is_empty() {
        return Err(Error::Config("achievable goals need a non-empty venue database".into()));
    }
    loop {
        let g = sample_goal(ontology, config, rng)?;
        if !ontology.query_venues(&g.constraints)?.is_empty() {
            return Ok(g);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CanthelpOutcome {
    Changed { slot: String, old: String, new: String },
    /// The act names no pair matching a current constraint.
    NoMatchingSlot,
    /// The offending slot has no alternative value.
    NoAlternative { slot: String },
}

/// Re-samples the first (ontology-order) constrained slot named by `canthelp`.
pub fn apply_canthelp<R: Rng + ?Sized>(
    goal: &Goal,
    canthelp: &SystemAct,
    turn: usize,
    ontology: &Ontology,
    rng: &mut R,
) -> (Goal, CanthelpOutcome) {
    let offending = ontology.informable().iter().find(|slot| {
        goal.constraints
            .get(&slot.name)
            .is_some_and(|current| canthelp.pairs().any(|(s, v)| s == slot.name && v == current))
    });
    let Some(slot) = offending else {
        warn!("canthelp {canthelp} names no current constraint; goal unchanged");
        return (goal.clone(), CanthelpOutcome::NoMatchingSlot);
    };
    let old = goal.constraints[&slot.name].clone();
    let alternatives: Vec<&String> = slot.values.iter().filter(|v| **v != old).collect();
    if alternatives.is_empty() {
        warn!("slot {} has no alternative to {old}; goal unchanged", slot.name);
        return (goal.clone(), CanthelpOutcome::NoAlternative { slot: slot.name.clone() });
    }
    let new = alternatives[rng.random_range(0..alternatives.len())].clone();
    let mut next = goal.clone();
    next.history.push(GoalChange {
        turn,
        previous: goal.constraints.clone(),
    });
    next.constraints.insert(slot.name.clone(), new.clone());
    (
        next,
        CanthelpOutcome::Changed {
            slot: slot.name.clone(),
            old,
            new,
        },
    )
}

/// True iff some venue matching the final constraints was offered and every
/// requested slot was informed for it at or after that offer.
pub fn goal_satisfied<'a, I>(goal: &Goal, ontology: &Ontology, system_turns: I) -> bool
where
    I: IntoIterator<Item = &'a [SystemAct]>,
{
    let mut informed: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut focus: Option<String> = None;
    for acts in system_turns {
        for act in acts {
            if !matches!(act.kind, SystemActType::Offer | SystemActType::Inform) {
                continue;
            }
            if let Some(name) = act.value_of("name") {
                focus = Some(name.to_string());
                informed.entry(name.to_string()).or_default().insert("name".to_string());
            }
            let Some(venue) = focus.clone() else { continue };
            let entry = informed.entry(venue).or_default();
            for (slot, _) in act.pairs() {
                entry.insert(slot.to_string());
            }
        }
    }
    informed.iter().any(|(name, slots)| {
        ontology.venue(name).is_some_and(|v| {
            ontology.venue_matches(v, &goal.constraints).unwrap_or(false)
                && goal.requests.iter().all(|r| slots.contains(r))
        })
    })
}
