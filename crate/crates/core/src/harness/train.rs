//! Policy training against a simulated user.

use std::path::Path;
use std::sync::Arc;

use log::info;
use serde::{Deserialize, Serialize};

use super::config::SimulatorKind;
use super::dialogue::{run_dialogue, DialogueEnv, DialogueRecord};
use crate::abus::{Abus, AbusConfig};
use crate::error::{Error, Result};
use crate::nus::{Nus, NusConfig};
use crate::ontology::Ontology;
use crate::rng::domain;
use crate::seq2seq::Seq2Seq;
use crate::simulator::UserSimulator;
use crate::system::{Learner, LearnerKind, MasterAction, PolicyLearner, PolicySystem, Step, SummaryState};

/// Builds fresh simulators of either kind.
#[derive(Clone)]
pub struct Simulators {
    pub ontology: Arc<Ontology>,
    pub nus_model: Option<Arc<Seq2Seq>>,
    pub abus: AbusConfig,
    pub nus: NusConfig,
}

impl Simulators {
    pub fn build(&self, kind: SimulatorKind) -> Result<Box<dyn UserSimulator>> {
        match kind {
            SimulatorKind::Abus => Ok(Box::new(Abus::new(Arc::clone(&self.ontology), self.abus.clone()))),
            SimulatorKind::Nus => {
                let model = self
                    .nus_model
                    .clone()
                    .ok_or_else(|| Error::MissingModel("the neural simulator needs a trained checkpoint".into()))?;
                Ok(Box::new(Nus::new(model, Arc::clone(&self.ontology), self.nus.clone())?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub episode: usize,
    #[serde(rename = "return")]
    pub total_return: f64,
    pub success: bool,
    pub turns: usize,
    pub epsilon: f64,
}

#[derive(Debug, Clone)]
pub struct PolicyRun {
    pub learner: Learner,
    pub log: Vec<EpisodeLog>,
    /// Copies of the learner taken after the listed episode counts.
    pub snapshots: Vec<(usize, Learner)>,
}

impl PolicyRun {
    /// Success rate over the last `window` episodes, in percent.
    pub fn final_success_rate(&self, window: usize) -> f64 {
        let tail = &self.log[self.log.len().saturating_sub(window)..];
        100.0 * tail.iter().filter(|l| l.success).count() as f64 / tail.len().max(1) as f64
    }
}

pub fn new_learner(kind: LearnerKind, ontology: &Ontology) -> Learner {
    Learner::new(kind, SummaryState::n_states(ontology), MasterAction::n_actions(ontology))
}

/// The learning episode of a finished dialogue: one step per policy decision,
/// each paired with the reward of the turn it produced.
pub fn episode_steps(record: &DialogueRecord, decisions: &[crate::system::Decision]) -> Result<Vec<Step>> {
    if decisions.is_empty() {
        return Err(Error::IncompleteEpisode);
    }
    if decisions.len() + 1 != record.turns.len() {
        return Err(Error::Contract {
            turn: record.turns.len(),
            message: format!("{} decisions for {} turns", decisions.len(), record.turns.len()),
        });
    }
    Ok(decisions
        .iter()
        .zip(&record.turns[1..])
        .map(|(d, t)| Step {
            state: d.state,
            action: d.action,
            reward: t.reward,
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct TrainSpec {
    pub simulator: SimulatorKind,
    pub learner: LearnerKind,
    pub seed: u64,
    pub n_dialogues: usize,
    pub explore: f64,
    pub snapshot_at: Vec<usize>,
}

/// Runs `n_dialogues` training episodes with linearly annealed exploration.
pub fn train_policy_run(env: &DialogueEnv<'_>, sims: &Simulators, spec: &TrainSpec) -> Result<PolicyRun> {
    let mut user = sims.build(spec.simulator)?;
    let mut learner = new_learner(spec.learner, env.ontology);
    let ontology = Arc::clone(&sims.ontology);
    let mut log = Vec::with_capacity(spec.n_dialogues);
    let mut snapshots = Vec::new();
    let n = spec.n_dialogues;
    for e in 0..n {
        let epsilon = if n <= 1 { 0.0 } else { spec.explore * (1.0 - e as f64 / (n - 1) as f64) };
        let (record, steps) = {
            let mut system = PolicySystem::new(&learner, Arc::clone(&ontology), epsilon);
            let record = run_dialogue(env, &mut system, user.as_mut(), spec.seed, domain::TRAIN_DIALOGUE + e as u64)?;
            let steps = if system.decisions().is_empty() {
                Vec::new()
            } else {
                episode_steps(&record, system.decisions())?
            };
            (record, steps)
        };
        if !steps.is_empty() {
            learner.observe(&steps)?;
        }
        log.push(EpisodeLog {
            episode: e,
            total_return: record.total_reward(),
            success: record.success,
            turns: record.n_turns(),
            epsilon,
        });
        if spec.snapshot_at.contains(&(e + 1)) && e + 1 < n {
            snapshots.push((e + 1, learner.clone()));
        }
        if (e + 1) % 1000 == 0 {
            let tail = &log[log.len() - 500..];
            let sr = tail.iter().filter(|l| l.success).count() as f64 / 5.0;
            info!("{} policy seed {}: {} episodes, last-500 SR {sr:.1}%", spec.simulator, spec.seed, e + 1);
        }
    }
    Ok(PolicyRun { learner, log, snapshots })
}

pub fn write_training_log(path: impl AsRef<Path>, log: &[EpisodeLog]) -> Result<()> {
    let path = path.as_ref();
    let err = |e: csv::Error| Error::parse(path.display().to_string(), e);
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    for row in log {
        w.serialize(row).map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
