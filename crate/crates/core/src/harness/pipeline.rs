//! End-to-end run: user model, policies for every simulator and seed, and
//! cross-evaluation. Artifacts go under the config's run directory.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::info;

use super::config::{RunConfig, SimulatorKind};
use super::dialogue::DialogueEnv;
use super::eval::{cross_evaluate, MetricsReport, TrainedPolicy};
use super::train::{train_policy_run, write_training_log, PolicyRun, Simulators, TrainSpec};
use crate::corpus::{build_training_set, save_corpus, split_dialogues, synthesize_corpus, CorpusStats, RawDialogue, DEFAULT_MAX_TURN_LEN};
use crate::decoder::SemanticDecoder;
use crate::error::{Error, Result};
use crate::features::FeatureLayout;
use crate::fixtures::toy_ontology;
use crate::ontology::Ontology;
use crate::rng::{child_seed, domain, stream};
use crate::seq2seq::{train, train::write_loss_csv, Checkpoint, Seq2Seq, TrainConfig, TrainReport};

/// Share of dialogues used for training; the rest is validation.
pub const TRAIN_FRACTION: f64 = 0.75;
/// Episode count whose snapshot gets its own evaluation.
pub const SNAPSHOT_EPISODES: usize = 1000;

#[derive(Debug, Clone)]
pub struct UserModelOutcome {
    pub model: Seq2Seq,
    pub report: TrainReport,
    pub train_stats: CorpusStats,
    pub valid_stats: CorpusStats,
}

/// Builds the training set (vocabulary from the training split only) and
/// fits the sequence-to-sequence model.
pub fn train_user_model(
    dialogues: &[RawDialogue],
    ontology: &Ontology,
    config: &TrainConfig,
    split_seed: u64,
) -> Result<UserModelOutcome> {
    let (train_d, valid_d) = split_dialogues(dialogues, split_seed, TRAIN_FRACTION);
    let train_set = build_training_set(&train_d, ontology, DEFAULT_MAX_TURN_LEN)?;
    let valid_set = build_training_set(&valid_d, ontology, DEFAULT_MAX_TURN_LEN)?;
    if train_set.turns.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let train_ex = train_set.examples();
    let valid_ex = crate::corpus::examples(&valid_set.turns, &train_set.vocab);
    let mut model = Seq2Seq::zeros(FeatureLayout::new(ontology).len(), config.hidden, config.bridge, train_set.vocab.clone());
    model.params.init_uniform(config.init_scale, &mut stream(config.seed, domain::SEQ2SEQ - 1));
    info!(
        "training user model on {} turns ({} validation), vocabulary {}",
        train_ex.len(),
        valid_ex.len(),
        train_set.vocab.len()
    );
    let (model, report) = train(model, &train_ex, &valid_ex, config)?;
    Ok(UserModelOutcome {
        model,
        report,
        train_stats: train_set.stats,
        valid_stats: valid_set.stats,
    })
}

pub fn load_ontology(path: Option<&Path>) -> Result<Ontology> {
    match path {
        Some(p) => Ontology::load(p),
        None => Ok(toy_ontology()),
    }
}

pub fn load_decoder(ontology: &Ontology, rules: Option<&Path>) -> Result<SemanticDecoder> {
    match rules {
        Some(p) => SemanticDecoder::from_file(ontology, p),
        None => SemanticDecoder::with_default_rules(ontology),
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub run_dir: PathBuf,
    pub report: MetricsReport,
    /// Evaluation of the policies after the first 1000 episodes, when the run
    /// is longer than that.
    pub snapshot_report: Option<MetricsReport>,
    pub user_model: Option<UserModelOutcome>,
    pub runs: Vec<(SimulatorKind, usize, PolicyRun)>,
}

fn mkdir(p: &Path) -> Result<()> {
    std::fs::create_dir_all(p).map_err(|e| Error::io(p, e))
}

/// Obtains the neural simulator model: from the checkpoint when configured,
/// otherwise trained on a synthetic corpus written into `run_dir`.
fn prepare_user_model(config: &RunConfig, ontology: &Ontology, run_dir: &Path) -> Result<(Seq2Seq, Option<UserModelOutcome>)> {
    if let Some(p) = &config.nus_checkpoint {
        let ck = Checkpoint::load(p)?;
        return Ok((ck.model, None));
    }
    let dialogues = synthesize_corpus(ontology, &config.corpus, config.seed)?;
    save_corpus(run_dir.join("corpus.json"), &dialogues)?;
    let outcome = train_user_model(&dialogues, ontology, &config.seq2seq, config.seed)?;
    Checkpoint::new(config.seq2seq.clone(), outcome.model.clone()).save(run_dir.join("nus_checkpoint.json"))?;
    write_loss_csv(run_dir.join("nus_loss.csv"), &outcome.report)?;
    Ok((outcome.model.clone(), Some(outcome)))
}

pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let run_dir = config.run_dir();
    for sub in ["policies", "logs"] {
        mkdir(&run_dir.join(sub))?;
    }
    let cfg_path = run_dir.join("config.json");
    std::fs::write(&cfg_path, config.to_json()).map_err(|e| Error::io(&cfg_path, e))?;

    let ontology = load_ontology(config.ontology.as_deref())?;
    let decoder = load_decoder(&ontology, config.rules.as_deref())?;
    let mut env = DialogueEnv::new(&ontology, &decoder);
    env.max_turns = config.max_turns;

    let needs_nus = config.simulators.contains(&SimulatorKind::Nus);
    let (nus_model, user_model) = if needs_nus {
        let (m, o) = prepare_user_model(config, &ontology, &run_dir)?;
        (Some(Arc::new(m)), o)
    } else {
        (None, None)
    };
    let sims = Simulators {
        ontology: Arc::new(ontology.clone()),
        nus_model,
        abus: config.abus.clone(),
        nus: config.nus.clone(),
    };

    let snapshot = config.n_train_dialogues > SNAPSHOT_EPISODES;
    let mut runs = Vec::new();
    for &kind in &config.simulators {
        for k in 0..config.n_policy_seeds {
            let spec = TrainSpec {
                simulator: kind,
                learner: config.learner,
                seed: child_seed(config.seed, k as u64),
                n_dialogues: config.n_train_dialogues,
                explore: config.explore,
                snapshot_at: if snapshot { vec![SNAPSHOT_EPISODES] } else { Vec::new() },
            };
            info!("training policy on {kind}, seed index {k}");
            let run = train_policy_run(&env, &sims, &spec)?;
            run.learner.save(run_dir.join("policies").join(format!("{kind}-{k}.json")))?;
            write_training_log(run_dir.join("logs").join(format!("{kind}-{k}.csv")), &run.log)?;
            runs.push((kind, k, run));
        }
    }

    let finals: Vec<TrainedPolicy> = runs
        .iter()
        .map(|(kind, k, r)| TrainedPolicy {
            simulator: *kind,
            seed_index: *k,
            learner: r.learner.clone(),
        })
        .collect();
    let report = cross_evaluate(&env, &sims, &finals, &config.simulators, config.seed, config.n_test_dialogues, config.n_train_dialogues)?;
    report.write(&run_dir, "report")?;
    info!("\n{}", report.to_table());

    let snapshot_report = if snapshot {
        let snaps: Vec<TrainedPolicy> = runs
            .iter()
            .filter_map(|(kind, k, r)| {
                r.snapshots.iter().find(|(n, _)| *n == SNAPSHOT_EPISODES).map(|(_, l)| TrainedPolicy {
                    simulator: *kind,
                    seed_index: *k,
                    learner: l.clone(),
                })
            })
            .collect();
        let rep = cross_evaluate(&env, &sims, &snaps, &config.simulators, config.seed, config.n_test_dialogues, SNAPSHOT_EPISODES)?;
        rep.write(&run_dir, "report_1000")?;
        info!("\n{}", rep.to_table());
        Some(rep)
    } else {
        None
    };

    Ok(RunOutcome {
        run_dir,
        report,
        snapshot_report,
        user_model,
        runs,
    })
}
