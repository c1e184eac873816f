//! Dialogue loop, policy training, evaluation and full runs.

pub mod config;
pub mod dialogue;
pub mod eval;
pub mod live;
pub mod pipeline;
pub mod train;

pub use config::{RunConfig, SimulatorKind};
pub use dialogue::{run_dialogue, run_dialogue_with, DialogueEnv, DialogueRecord, TurnRecord};
pub use live::LiveDialogue;
pub use eval::{cross_evaluate, evaluate_policy, Cell, CellMetrics, MetricsReport, TrainedPolicy};
pub use pipeline::{load_decoder, load_ontology, run, train_user_model, RunOutcome, UserModelOutcome};
pub use train::{train_policy_run, EpisodeLog, PolicyRun, Simulators, TrainSpec};
