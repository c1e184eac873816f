//! Cross-model evaluation and its report.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::SimulatorKind;
use super::dialogue::{run_dialogue, DialogueEnv, DialogueRecord};
use super::train::Simulators;
use crate::error::{Error, Result};
use crate::rng::domain;
use crate::system::{Learner, PolicySystem, SUCCESS_REWARD};

#[derive(Debug, Clone)]
pub struct TrainedPolicy {
    pub simulator: SimulatorKind,
    pub seed_index: usize,
    pub learner: Learner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMetrics {
    pub policy_seed: usize,
    pub n_dialogues: usize,
    /// Percent.
    pub success_rate: f64,
    pub avg_reward: f64,
    pub avg_turns: f64,
}

impl CellMetrics {
    pub fn from_records(policy_seed: usize, records: &[DialogueRecord]) -> Self {
        let n = records.len().max(1) as f64;
        Self {
            policy_seed,
            n_dialogues: records.len(),
            success_rate: 100.0 * records.iter().filter(|r| r.success).count() as f64 / n,
            avg_reward: records.iter().map(DialogueRecord::total_reward).sum::<f64>() / n,
            avg_turns: records.iter().map(|r| r.n_turns() as f64).sum::<f64>() / n,
        }
    }

    /// |avg reward - (20 * SR - avg turns)|.
    pub fn identity_error(&self) -> f64 {
        (self.avg_reward - (SUCCESS_REWARD * self.success_rate / 100.0 - self.avg_turns)).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub train: SimulatorKind,
    pub eval: SimulatorKind,
    pub per_seed: Vec<CellMetrics>,
    /// The seed with the highest success rate (reward breaks ties).
    pub best: CellMetrics,
    /// Averages over seeds.
    pub mean: CellMetrics,
}

impl Cell {
    pub fn new(train: SimulatorKind, eval: SimulatorKind, per_seed: Vec<CellMetrics>) -> Self {
        let k = per_seed.len().max(1) as f64;
        let best = per_seed
            .iter()
            .max_by(|a, b| {
                a.success_rate
                    .total_cmp(&b.success_rate)
                    .then(a.avg_reward.total_cmp(&b.avg_reward))
                    .then(b.policy_seed.cmp(&a.policy_seed))
            })
            .cloned()
            .unwrap_or(CellMetrics {
                policy_seed: 0,
                n_dialogues: 0,
                success_rate: 0.0,
                avg_reward: 0.0,
                avg_turns: 0.0,
            });
        let mean = CellMetrics {
            policy_seed: usize::MAX,
            n_dialogues: per_seed.iter().map(|m| m.n_dialogues).sum(),
            success_rate: per_seed.iter().map(|m| m.success_rate).sum::<f64>() / k,
            avg_reward: per_seed.iter().map(|m| m.avg_reward).sum::<f64>() / k,
            avg_turns: per_seed.iter().map(|m| m.avg_turns).sum::<f64>() / k,
        };
        Self {
            train,
            eval,
            per_seed,
            best,
            mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n_train_dialogues: usize,
    pub n_test_dialogues: usize,
    pub cells: Vec<Cell>,
    /// Simulator counters gathered during testing, per evaluation simulator.
    #[serde(default)]
    pub counters: Vec<(SimulatorKind, Vec<(String, usize)>)>,
}

/// Published (reward, success %) for rows NUS-best, ABUS-best, NUS-avg,
/// ABUS-avg and columns NUS, ABUS.
fn reference(n_train: usize) -> Option<[[(f64, f64); 2]; 4]> {
    match n_train {
        4000 => Some([
            [(13.0, 98.0), (13.3, 99.8)],
            [(1.53, 71.5), (13.8, 99.9)],
            [(12.4, 96.6), (11.2, 94.0)],
            [(-7.6, 45.5), (13.5, 99.5)],
        ]),
        1000 => Some([
            [(12.2, 95.9), (13.9, 99.9)],
            [(-4.0, 54.8), (13.2, 99.0)],
            [(12.0, 95.4), (12.2, 97.3)],
            [(-9.48, 42.3), (12.8, 98.4)],
        ]),
        _ => None,
    }
}

impl MetricsReport {
    pub fn cell(&self, train: SimulatorKind, eval: SimulatorKind) -> Option<&Cell> {
        self.cells.iter().find(|c| c.train == train && c.eval == eval)
    }

    /// Largest reward/SR identity violation over every row of every cell.
    pub fn max_identity_error(&self) -> f64 {
        self.cells
            .iter()
            .flat_map(|c| c.per_seed.iter().chain([&c.best, &c.mean]))
            .map(CellMetrics::identity_error)
            .fold(0.0, f64::max)
    }

    fn kinds(&self) -> (Vec<SimulatorKind>, Vec<SimulatorKind>) {
        let mut train: Vec<SimulatorKind> = self.cells.iter().map(|c| c.train).collect();
        let mut eval: Vec<SimulatorKind> = self.cells.iter().map(|c| c.eval).collect();
        train.sort();
        train.dedup();
        eval.sort();
        eval.dedup();
        (train, eval)
    }

    /// Best and mean rows per training simulator, columns per evaluation
    /// simulator, with published figures alongside when available.
    pub fn to_table(&self) -> String {
        let (train, eval) = self.kinds();
        let refs = reference(self.n_train_dialogues);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "Policies trained for {} dialogues, tested for {} dialogues per cell",
            self.n_train_dialogues, self.n_test_dialogues
        );
        let mut header = format!("{:<12}", "Train. Sim.");
        for e in &eval {
            let _ = write!(header, "| {:^27} ", format!("Eval. {}", e.label()));
        }
        let _ = writeln!(out, "{header}");
        let mut sub = format!("{:<12}", "");
        for _ in &eval {
            let _ = write!(sub, "| {:>7} {:>6} {:>12} ", "Rew.", "Suc.", "(published)");
        }
        let _ = writeln!(out, "{sub}");
        let _ = writeln!(out, "{}", "-".repeat(sub.len()));
        for (is_mean, label) in [(false, "best"), (true, "avg")] {
            for t in &train {
                let mut line = format!("{:<12}", format!("{}-{label}", t.label()));
                for e in &eval {
                    let Some(c) = self.cell(*t, *e) else {
                        let _ = write!(line, "| {:>27} ", "-");
                        continue;
                    };
                    let m = if is_mean { &c.mean } else { &c.best };
                    let published = refs
                        .and_then(|r| {
                            let row = match (t, is_mean) {
                                (SimulatorKind::Nus, false) => 0,
                                (SimulatorKind::Abus, false) => 1,
                                (SimulatorKind::Nus, true) => 2,
                                (SimulatorKind::Abus, true) => 3,
                            };
                            let col = usize::from(*e == SimulatorKind::Abus);
                            r.get(row).map(|r| r[col])
                        })
                        .map(|(rw, sr)| format!("({rw}/{sr})"))
                        .unwrap_or_default();
                    let _ = write!(line, "| {:>7.2} {:>6.1} {:>12} ", m.avg_reward, m.success_rate, published);
                }
                let _ = writeln!(out, "{line}");
            }
        }
        for (kind, counters) in &self.counters {
            let parts: Vec<String> = counters.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let _ = writeln!(out, "{} counters: {}", kind.label(), parts.join(" "));
        }
        out
    }

    /// One row per (train, eval, row) with row = seed index, `best` or `mean`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::parse("report csv", e);
        w.write_record(["train_sim", "eval_sim", "row", "policy_seed", "n_dialogues", "success_rate", "avg_reward", "avg_turns"])
            .map_err(err)?;
        for c in &self.cells {
            let rows = c
                .per_seed
                .iter()
                .map(|m| (m.policy_seed.to_string(), m))
                .chain([("best".to_string(), &c.best), ("mean".to_string(), &c.mean)]);
            for (row, m) in rows {
                let seed = if m.policy_seed == usize::MAX { String::new() } else { m.policy_seed.to_string() };
                w.write_record([
                    c.train.to_string(),
                    c.eval.to_string(),
                    row,
                    seed,
                    m.n_dialogues.to_string(),
                    m.success_rate.to_string(),
                    m.avg_reward.to_string(),
                    m.avg_turns.to_string(),
                ])
                .map_err(err)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::parse("report csv", e))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write(&self, dir: impl AsRef<Path>, stem: &str) -> Result<()> {
        let dir = dir.as_ref();
        let put = |name: String, text: String| {
            let p = dir.join(name);
            std::fs::write(&p, text).map_err(|e| Error::io(&p, e))
        };
        put(format!("{stem}.txt"), self.to_table())?;
        put(format!("{stem}.csv"), self.to_csv()?)?;
        put(format!("{stem}.json"), serde_json::to_string_pretty(self).expect("report serializes"))
    }
}

/// Tests a frozen policy (no exploration) for `n` dialogues. Every policy
/// sees the same dialogue streams.
pub fn evaluate_policy(
    env: &DialogueEnv<'_>,
    sims: &Simulators,
    policy: &Learner,
    eval: SimulatorKind,
    seed: u64,
    n: usize,
) -> Result<(Vec<DialogueRecord>, Vec<(String, usize)>)> {
    let mut user = sims.build(eval)?;
    let mut records = Vec::with_capacity(n);
    for i in 0..n {
        let mut system = PolicySystem::new(policy, Arc::clone(&sims.ontology), 0.0);
        records.push(run_dialogue(env, &mut system, user.as_mut(), seed, domain::TEST_DIALOGUE + i as u64)?);
    }
    let counters = user.counters().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    Ok((records, counters))
}

/// Every policy against every evaluation simulator.
pub fn cross_evaluate(
    env: &DialogueEnv<'_>,
    sims: &Simulators,
    policies: &[TrainedPolicy],
    eval_sims: &[SimulatorKind],
    seed: u64,
    n_test: usize,
    n_train: usize,
) -> Result<MetricsReport> {
    let mut train_kinds: Vec<SimulatorKind> = policies.iter().map(|p| p.simulator).collect();
    train_kinds.sort();
    train_kinds.dedup();
    let mut cells = Vec::new();
    let mut totals: Vec<(SimulatorKind, Vec<(String, usize)>)> = Vec::new();
    for &t in &train_kinds {
        for &e in eval_sims {
            let mut per_seed = Vec::new();
            for p in policies.iter().filter(|p| p.simulator == t) {
                let (records, counters) = evaluate_policy(env, sims, &p.learner, e, seed, n_test)?;
                per_seed.push(CellMetrics::from_records(p.seed_index, &records));
                if !counters.is_empty() {
                    match totals.iter_mut().find(|(k, _)| *k == e) {
                        Some((_, acc)) => {
                            for ((_, a), (_, b)) in acc.iter_mut().zip(&counters) {
                                *a += b;
                            }
                        }
                        None => totals.push((e, counters)),
                    }
                }
            }
            cells.push(Cell::new(t, e, per_seed));
        }
    }
    Ok(MetricsReport {
        n_train_dialogues: n_train,
        n_test_dialogues: n_test,
        cells,
        counters: totals,
    })
}
