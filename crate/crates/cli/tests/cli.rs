use std::io::Cursor;
use std::path::Path;
use std::process::Command;

use clap::Parser;
use nusbench::harness::train::new_learner;
use nusbench::harness::{RunConfig, SimulatorKind};
use nusbench::system::LearnerKind;
use nusbench_cli::commands::{chat_session, parse_policy_arg, Cli, Command as Sub};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nusbench"))
}

fn tiny_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("run.json");
    let cfg = serde_json::json!({
        "seed": 7,
        "n_train_dialogues": 30,
        "n_test_dialogues": 10,
        "n_policy_seeds": 1,
        "output_dir": dir.join("runs"),
        "corpus": {"n_dialogues": 40},
        "seq2seq": {"hidden": 8, "bridge": 6, "epochs": 1}
    });
    std::fs::write(&path, cfg.to_string()).unwrap();
    path
}

#[test]
fn unknown_subcommand_exits_with_usage() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn missing_config_fails() {
    let out = bin().args(["cross-eval", "--config", "/definitely/not/here.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_flag_fails() {
    let out = bin().args(["cross-eval", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flags_override_config_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let cli = Cli::try_parse_from([
        "nusbench",
        "cross-eval",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "11",
        "--simulators",
        "abus",
        "--learner",
        "sarsa-lambda",
        "--set",
        "seq2seq.epochs=4",
        "--set",
        "nus.n_beams=3",
    ])
    .unwrap();
    let Sub::CrossEval(args) = cli.command else { panic!("wrong subcommand") };
    let c: RunConfig = args.cfg.resolve().unwrap();
    assert_eq!(c.seed, 11);
    assert_eq!(c.n_train_dialogues, 30);
    assert_eq!(c.simulators, vec![SimulatorKind::Abus]);
    assert_eq!(c.learner, LearnerKind::SarsaLambda);
    assert_eq!(c.seq2seq.epochs, 4);
    assert_eq!(c.seq2seq.hidden, 8);
    assert_eq!(c.nus.n_beams, 3);
}

#[test]
fn bad_override_is_rejected() {
    let cli = Cli::try_parse_from(["nusbench", "cross-eval", "--set", "no_such_key=1"]).unwrap();
    let Sub::CrossEval(args) = cli.command else { panic!("wrong subcommand") };
    assert!(args.cfg.resolve().is_err());
}

#[test]
fn train_us_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("ck{k}.json"));
        let status = bin()
            .args(["train-us", "--config", cfg.to_str().unwrap(), "--seed", "7", "--out", out.to_str().unwrap()])
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn cross_eval_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let out = bin().args(["cross-eval", "--config", cfg.to_str().unwrap()]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let c = RunConfig::load(&cfg).unwrap();
    let run_dir = c.run_dir();
    for f in ["report.txt", "report.csv", "report.json", "config.json", "nus_checkpoint.json", "corpus.json", "nus_loss.csv"] {
        assert!(run_dir.join(f).exists(), "{f} missing");
    }
    assert!(run_dir.join("policies").join("abus-0.json").exists());
    assert!(String::from_utf8_lossy(&out.stdout).contains("NUS-best"));
}

#[test]
fn synth_then_train_policy_on_abus() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let corpus = dir.path().join("corpus.json");
    assert!(bin()
        .args(["synth-corpus", "--config", cfg.to_str().unwrap(), "--out", corpus.to_str().unwrap()])
        .status()
        .unwrap()
        .success());
    assert_eq!(nusbench::corpus::load_corpus(&corpus).unwrap().len(), 40);
    let policy = dir.path().join("p.json");
    assert!(bin()
        .args(["train-policy", "--config", cfg.to_str().unwrap(), "--simulator", "abus", "--out", policy.to_str().unwrap()])
        .status()
        .unwrap()
        .success());
    assert!(nusbench::system::Learner::load(&policy).is_ok());
    // the neural simulator needs a checkpoint
    let out = bin()
        .args(["train-policy", "--config", cfg.to_str().unwrap(), "--simulator", "nus", "--out", policy.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn chat_reads_turns_and_verdict() {
    let config = RunConfig::default();
    let policy = new_learner(LearnerKind::GpSarsa, &nusbench::fixtures::toy_ontology());
    let mut input = Cursor::new("i want cheap food\nbye\ny\n");
    let mut out = Vec::new();
    let (success, reward) = chat_session(&config, &policy, &mut input, &mut out).unwrap();
    assert!(success);
    assert_eq!(reward, 18.0);
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("Your goal:"));
    assert!(text.contains("reward 18 over 2 turns"));
}

#[test]
fn policy_args_accept_names() {
    assert_eq!(parse_policy_arg("a=x/y.json").unwrap().0, "a");
    assert_eq!(parse_policy_arg("x/nus-0.json").unwrap().0, "nus-0");
}
