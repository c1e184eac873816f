//! Subcommands. Every run reads one JSON config document; flags override
//! single keys of it.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use log::info;

use nusbench::corpus::dstc2::{import_corpus, import_flist, parse_aliases, parse_corrections, ImportOptions};
use nusbench::corpus::{build_training_set, load_corpus, save_corpus, synthesize_corpus, DEFAULT_MAX_TURN_LEN};
use nusbench::goal::sample_achievable_goal;
use nusbench::harness::pipeline::{load_decoder, load_ontology, train_user_model};
use nusbench::harness::train::{train_policy_run, write_training_log, Simulators, TrainSpec};
use nusbench::harness::{run, DialogueEnv, LiveDialogue, RunConfig, SimulatorKind};
use nusbench::rng::{child_seed, domain, stream};
use nusbench::seq2seq::train::write_loss_csv;
use nusbench::seq2seq::Checkpoint;
use nusbench::system::Learner;
use nusbench::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "nusbench", version, about = "Neural and agenda-based user simulators for dialogue policy training")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Import a DSTC2-format corpus into the normalized corpus format.
    PrepareData(PrepareData),
    /// Generate a synthetic corpus with the agenda-based simulator.
    SynthCorpus(SynthCorpus),
    /// Train the neural user simulator.
    TrainUs(TrainUs),
    /// Train one dialogue policy against a simulator.
    TrainPolicy(TrainPolicy),
    /// Full run: user model, policies per simulator and seed, cross-evaluation.
    CrossEval(CrossEval),
    /// Serve the human-evaluation API.
    Serve(Serve),
    /// Talk to a policy in the terminal.
    Chat(Chat),
}

/// Config file plus per-key overrides.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON run config; built-in defaults when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_train_dialogues: Option<usize>,
    #[arg(long)]
    pub n_test_dialogues: Option<usize>,
    #[arg(long)]
    pub n_policy_seeds: Option<usize>,
    /// Comma-separated, e.g. `nus,abus`.
    #[arg(long, value_delimiter = ',')]
    pub simulators: Option<Vec<SimulatorKind>>,
    /// `gp-sarsa` or `sarsa-lambda`.
    #[arg(long)]
    pub learner: Option<String>,
    #[arg(long)]
    pub max_turns: Option<usize>,
    #[arg(long)]
    pub explore: Option<f64>,
    #[arg(long)]
    pub ontology: Option<PathBuf>,
    #[arg(long)]
    pub rules: Option<PathBuf>,
    #[arg(long)]
    pub nus_checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Any other key as a dotted path, e.g. `--set seq2seq.epochs=5`.
    #[arg(long = "set", value_name = "KEY=JSON")]
    pub set: Vec<String>,
}

fn set_path(doc: &mut serde_json::Value, key: &str, value: serde_json::Value) -> Result<()> {
    let mut cur = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("`{key}` does not name a config key")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(part.to_string()).or_insert_with(|| serde_json::json!({}));
    }
    Ok(())
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut doc: serde_json::Value = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
            }
            None => serde_json::to_value(RunConfig::default()).expect("config serializes"),
        };
        let mut put = |key: &str, v: serde_json::Value| set_path(&mut doc, key, v);
        if let Some(v) = self.seed {
            put("seed", v.into())?;
        }
        if let Some(v) = self.n_train_dialogues {
            put("n_train_dialogues", v.into())?;
        }
        if let Some(v) = self.n_test_dialogues {
            put("n_test_dialogues", v.into())?;
        }
        if let Some(v) = self.n_policy_seeds {
            put("n_policy_seeds", v.into())?;
        }
        if let Some(v) = &self.simulators {
            put("simulators", serde_json::to_value(v).expect("kinds serialize"))?;
        }
        if let Some(v) = &self.learner {
            put("learner", v.as_str().into())?;
        }
        if let Some(v) = self.max_turns {
            put("max_turns", v.into())?;
        }
        if let Some(v) = self.explore {
            put("explore", v.into())?;
        }
        for (key, v) in [
            ("ontology", &self.ontology),
            ("rules", &self.rules),
            ("nus_checkpoint", &self.nus_checkpoint),
            ("output_dir", &self.output_dir),
        ] {
            if let Some(p) = v {
                put(key, p.display().to_string().into())?;
            }
        }
        for item in &self.set {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("`--set {item}` is not KEY=VALUE")))?;
            // bare words are taken as strings
            let value = serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
            put(key, value)?;
        }
        RunConfig::from_json(&doc.to_string())
    }
}

#[derive(Debug, Args)]
pub struct PrepareData {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    /// Directory holding call logs (`log.json` + `label.json` per call).
    #[arg(long)]
    pub dstc2_root: PathBuf,
    /// Restrict to the calls listed in this file (paths relative to the root).
    #[arg(long)]
    pub flist: Option<PathBuf>,
    /// `wrong<TAB>right` transcription corrections.
    #[arg(long)]
    pub corrections: Option<PathBuf>,
    /// `act<TAB>target|-` system-act aliases.
    #[arg(long)]
    pub aliases: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthCorpus {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainUs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    /// Normalized corpus; a synthetic one is generated when absent.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-epoch losses as CSV.
    #[arg(long)]
    pub loss_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainPolicy {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    #[arg(long)]
    pub simulator: SimulatorKind,
    /// Index of the policy seed derived from the run seed.
    #[arg(long, default_value_t = 0)]
    pub seed_index: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-episode training log as CSV.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CrossEval {
    #[command(flatten)]
    pub cfg: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct Serve {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    /// `name=path` of a saved policy; repeat for several.
    #[arg(long = "policy", required = true)]
    pub policies: Vec<String>,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: String,
    #[arg(long, default_value = "sessions")]
    pub store: PathBuf,
    /// Static files (e.g. a built web client) served at `/`.
    #[arg(long)]
    pub assets: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Chat {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    #[arg(long)]
    pub policy: PathBuf,
}

fn read_opt(path: &Option<PathBuf>) -> Result<Option<String>> {
    path.as_ref()
        .map(|p| std::fs::read_to_string(p).map_err(|e| Error::io(p, e)))
        .transpose()
}

pub fn prepare_data(args: &PrepareData) -> Result<()> {
    let config = args.cfg.resolve()?;
    let ontology = load_ontology(config.ontology.as_deref())?;
    let mut options = ImportOptions::default();
    if let Some(text) = read_opt(&args.corrections)? {
        options.corrections = parse_corrections(&text)?;
    }
    if let Some(text) = read_opt(&args.aliases)? {
        options.aliases = parse_aliases(&text)?;
    }
    let report = match &args.flist {
        Some(f) => import_flist(&args.dstc2_root, f, &options)?,
        None => import_corpus(&args.dstc2_root, &options)?,
    };
    let stats = build_training_set(&report.dialogues, &ontology, usize::MAX)?.stats;
    save_corpus(&args.out, &report.dialogues)?;
    println!(
        "{} dialogues, {} turns, {} discarded, max delexicalized turn length {} (limit {DEFAULT_MAX_TURN_LEN})",
        report.dialogues.len(),
        report.n_turns(),
        report.discarded.len(),
        stats.max_turn_len
    );
    Ok(())
}

pub fn synth_corpus(args: &SynthCorpus) -> Result<()> {
    let config = args.cfg.resolve()?;
    let ontology = load_ontology(config.ontology.as_deref())?;
    let dialogues = synthesize_corpus(&ontology, &config.corpus, config.seed)?;
    save_corpus(&args.out, &dialogues)?;
    println!("{} dialogues written to {}", dialogues.len(), args.out.display());
    Ok(())
}

pub fn train_us(args: &TrainUs) -> Result<()> {
    let config = args.cfg.resolve()?;
    let ontology = load_ontology(config.ontology.as_deref())?;
    let dialogues = match &args.corpus {
        Some(p) => load_corpus(p)?,
        None => synthesize_corpus(&ontology, &config.corpus, config.seed)?,
    };
    let outcome = train_user_model(&dialogues, &ontology, &config.seq2seq, config.seed)?;
    Checkpoint::new(config.seq2seq.clone(), outcome.model).save(&args.out)?;
    if let Some(p) = &args.loss_csv {
        write_loss_csv(p, &outcome.report)?;
    }
    println!(
        "best epoch {} with validation loss {:.4} nats; checkpoint at {}",
        outcome.report.best_epoch,
        outcome.report.best_valid_nats,
        args.out.display()
    );
    Ok(())
}

fn simulators(config: &RunConfig, need_nus: bool) -> Result<Simulators> {
    let ontology = load_ontology(config.ontology.as_deref())?;
    let nus_model = match (&config.nus_checkpoint, need_nus) {
        (Some(p), true) => Some(Arc::new(Checkpoint::load(p)?.model)),
        (None, true) => return Err(Error::MissingModel("pass --nus-checkpoint (see `train-us`)".into())),
        (_, false) => None,
    };
    Ok(Simulators {
        ontology: Arc::new(ontology),
        nus_model,
        abus: config.abus.clone(),
        nus: config.nus.clone(),
    })
}

pub fn train_policy(args: &TrainPolicy) -> Result<()> {
    let config = args.cfg.resolve()?;
    let sims = simulators(&config, args.simulator == SimulatorKind::Nus)?;
    let decoder = load_decoder(&sims.ontology, config.rules.as_deref())?;
    let mut env = DialogueEnv::new(&sims.ontology, &decoder);
    env.max_turns = config.max_turns;
    let spec = TrainSpec {
        simulator: args.simulator,
        learner: config.learner,
        seed: child_seed(config.seed, args.seed_index),
        n_dialogues: config.n_train_dialogues,
        explore: config.explore,
        snapshot_at: Vec::new(),
    };
    let run = train_policy_run(&env, &sims, &spec)?;
    run.learner.save(&args.out)?;
    if let Some(p) = &args.log {
        write_training_log(p, &run.log)?;
    }
    println!("success rate over the last 500 episodes: {:.1}%", run.final_success_rate(500));
    Ok(())
}

pub fn cross_eval(args: &CrossEval) -> Result<()> {
    let config = args.cfg.resolve()?;
    let outcome = run(&config)?;
    println!("{}", outcome.report.to_table());
    if let Some(r) = &outcome.snapshot_report {
        println!("{}", r.to_table());
    }
    println!("reports written to {}", outcome.run_dir.display());
    Ok(())
}

pub fn parse_policy_arg(arg: &str) -> Result<(String, PathBuf)> {
    match arg.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok((name.to_string(), PathBuf::from(path))),
        _ => {
            let p = Path::new(arg);
            let name = p
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| Error::Config(format!("cannot name policy `{arg}`")))?;
            Ok((name.to_string(), p.to_path_buf()))
        }
    }
}

pub fn serve(args: &Serve) -> Result<()> {
    use crate::server::{router, Service, ServiceConfig};
    let config = args.cfg.resolve()?;
    let ontology = load_ontology(config.ontology.as_deref())?;
    let decoder = load_decoder(&ontology, config.rules.as_deref())?;
    let mut policies = Vec::new();
    for arg in &args.policies {
        let (name, path) = parse_policy_arg(arg)?;
        policies.push((name, Learner::load(&path)?));
    }
    let service = Arc::new(Service::new(ServiceConfig {
        ontology,
        decoder,
        policies,
        store: args.store.clone(),
        seed: config.seed,
        goals: config.abus.goals.clone(),
    })?);
    let app = router(service, args.assets.as_deref());
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Error::io("tokio runtime", e))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&args.addr)
            .await
            .map_err(|e| Error::io(&args.addr, e))?;
        info!("listening on {}", args.addr);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| Error::io(&args.addr, e))
    })
}

/// Runs a terminal dialogue; returns the person's verdict and the reward.
pub fn chat_session<R: BufRead, W: Write>(config: &RunConfig, policy: &Learner, input: &mut R, out: &mut W) -> Result<(bool, f64)> {
    let ontology = load_ontology(config.ontology.as_deref())?;
    let decoder = load_decoder(&ontology, config.rules.as_deref())?;
    let stream_id = domain::SESSION;
    let goal = sample_achievable_goal(&ontology, &config.abus.goals, &mut stream(config.seed, stream_id))?;
    let io = |e| Error::io("terminal", e);
    writeln!(out, "Your goal: {}", goal.describe()).map_err(io)?;
    let (mut live, text) = LiveDialogue::open(goal, config.seed, stream_id)?;
    writeln!(out, "system: {text}").map_err(io)?;
    let mut rng = stream(config.seed, domain::SYSTEM);
    let mut line = String::new();
    while !live.ended {
        write!(out, "you: ").map_err(io)?;
        out.flush().map_err(io)?;
        line.clear();
        if input.read_line(&mut line).map_err(io)? == 0 {
            // end of input counts as hanging up
            line = "bye".into();
        }
        if let Some(reply) = live.user_turn(line.trim(), policy, &ontology, &decoder, &mut rng)? {
            writeln!(out, "system: {reply}").map_err(io)?;
        }
    }
    write!(out, "Did the system find what you wanted? [y/n] ").map_err(io)?;
    out.flush().map_err(io)?;
    line.clear();
    input.read_line(&mut line).map_err(io)?;
    let success = line.trim().to_ascii_lowercase().starts_with('y');
    let record = live.into_record(success)?;
    writeln!(out, "reward {} over {} turns", record.total_reward(), record.n_turns()).map_err(io)?;
    Ok((success, record.total_reward()))
}

pub fn chat(args: &Chat) -> Result<()> {
    let config = args.cfg.resolve()?;
    let policy = Learner::load(&args.policy)?;
    let stdin = std::io::stdin();
    chat_session(&config, &policy, &mut stdin.lock(), &mut std::io::stdout())?;
    Ok(())
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::PrepareData(a) => prepare_data(a),
        Command::SynthCorpus(a) => synth_corpus(a),
        Command::TrainUs(a) => train_us(a),
        Command::TrainPolicy(a) => train_policy(a),
        Command::CrossEval(a) => cross_eval(a),
        Command::Serve(a) => serve(a),
        Command::Chat(a) => chat(a),
    }
}

