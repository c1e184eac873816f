//! Importer for DSTC2-layout call logs (`log.json` + `label.json` per call).

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use log::info;
use serde::Deserialize;
use serde_json::Value;

use super::{RawDialogue, RawTurn};
use crate::acts::{SlotValue, SystemAct, SystemActType};
use crate::error::{Error, Result};
use crate::ontology::{Constraints, DONTCARE};

#[derive(Debug, Clone)]
pub struct ImportOptions {
    /// Word-level spelling corrections, applied after lower-casing.
    pub corrections: HashMap<String, String>,
    /// Extra act names: `Some(kind)` renames, `None` drops the act.
    pub aliases: HashMap<String, Option<SystemActType>>,
    /// Dialogues whose newly labelled values are missing from the corrected
    /// transcription more often than this are discarded.
    pub max_missing_fraction: f64,
}

impl Default for ImportOptions {
    fn default() -> Self {
        Self {
            corrections: HashMap::new(),
            aliases: HashMap::new(),
            max_missing_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ImportReport {
    pub dialogues: Vec<RawDialogue>,
    pub discarded: Vec<String>,
}

impl ImportReport {
    pub fn n_turns(&self) -> usize {
        self.dialogues.iter().map(|d| d.turns.len()).sum()
    }
}

/// Parses a `wrong TAB right` correction file.
pub fn parse_corrections(text: &str) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (wrong, right) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse("correction map", format!("line {}: expected `wrong<TAB>right`", k + 1)))?;
        map.insert(wrong.trim().to_lowercase(), right.trim().to_lowercase());
    }
    Ok(map)
}

/// Parses an `act TAB target` alias file; target `-` drops the act.
pub fn parse_aliases(text: &str) -> Result<HashMap<String, Option<SystemActType>>> {
    let mut map = HashMap::new();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, target) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse("act aliases", format!("line {}: expected `act<TAB>target`", k + 1)))?;
        let target = match target.trim() {
            "-" => None,
            t => Some(t.parse()?),
        };
        map.insert(name.trim().to_string(), target);
    }
    Ok(map)
}

pub fn correct_transcription(text: &str, corrections: &HashMap<String, String>) -> String {
    text.to_lowercase()
        .split_whitespace()
        .map(|w| corrections.get(w).map(String::as_str).unwrap_or(w))
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Deserialize)]
struct LogDoc {
    #[serde(rename = "session-id", default)]
    session_id: Option<String>,
    turns: Vec<LogTurn>,
}

#[derive(Deserialize)]
struct LogTurn {
    output: LogOutput,
}

#[derive(Deserialize)]
struct LogOutput {
    #[serde(rename = "dialog-acts", default)]
    dialog_acts: Vec<DialogAct>,
}

#[derive(Deserialize)]
struct DialogAct {
    act: String,
    #[serde(default)]
    slots: Vec<Vec<Value>>,
}

#[derive(Deserialize)]
struct LabelDoc {
    #[serde(rename = "task-information", default)]
    task_information: Option<TaskInformation>,
    turns: Vec<LabelTurn>,
}

#[derive(Deserialize)]
struct TaskInformation {
    goal: TaskGoal,
}

#[derive(Deserialize)]
struct TaskGoal {
    #[serde(rename = "request-slots", default)]
    request_slots: Vec<String>,
}

#[derive(Deserialize)]
struct LabelTurn {
    #[serde(default)]
    transcription: String,
    #[serde(rename = "goal-labels", default)]
    goal_labels: HashMap<String, Value>,
}

fn value_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e))
}

fn convert_act(id: &str, act: &DialogAct, options: &ImportOptions) -> Result<Option<SystemAct>> {
    let kind = match options.aliases.get(&act.act) {
        Some(None) => return Ok(None),
        Some(Some(kind)) => *kind,
        None => act.act.parse().map_err(|_| Error::UnknownAct {
            dialogue: id.to_string(),
            act: act.act.clone(),
        })?,
    };
    let mut slots = Vec::new();
    for pair in &act.slots {
        match pair.as_slice() {
            [s, v] if kind == SystemActType::Request && s.as_str() == Some("slot") => slots.push(SlotValue::slot(value_text(v))),
            [s, v] => slots.push(SlotValue::pair(value_text(s), value_text(v))),
            [s] => slots.push(SlotValue::slot(value_text(s))),
            _ => return Err(Error::parse("log.json", format!("{id}: malformed slot list in `{}`", act.act))),
        }
    }
    Ok(Some(SystemAct::new(kind, slots)))
}

fn fraction_missing(turns: &[RawTurn]) -> f64 {
    let mut introduced = 0usize;
    let mut missing = 0usize;
    let mut prev = Constraints::new();
    for t in turns {
        let padded = format!(" {} ", t.user_text);
        for (slot, value) in &t.constraints {
            if value == DONTCARE || prev.get(slot) == Some(value) {
                continue;
            }
            introduced += 1;
            if !padded.contains(&format!(" {value} ")) {
                missing += 1;
            }
        }
        prev = t.constraints.clone();
    }
    if introduced == 0 {
        0.0
    } else {
        missing as f64 / introduced as f64
    }
}

/// Reads one call directory. Returns the dialogue and whether it passes cleaning.
pub fn import_call(dir: &Path, options: &ImportOptions) -> Result<(RawDialogue, bool)> {
    let log: LogDoc = read_json(&dir.join("log.json"))?;
    let label: LabelDoc = read_json(&dir.join("label.json"))?;
    let id = log
        .session_id
        .clone()
        .unwrap_or_else(|| dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
    if log.turns.len() != label.turns.len() {
        return Err(Error::parse("call", format!("{id}: {} log turns vs {} label turns", log.turns.len(), label.turns.len())));
    }
    let requests: Vec<String> = label.task_information.map(|t| t.goal.request_slots).unwrap_or_default();
    let mut turns = Vec::with_capacity(log.turns.len());
    for (lt, bt) in log.turns.iter().zip(&label.turns) {
        let mut sys_acts = Vec::new();
        for act in &lt.output.dialog_acts {
            if let Some(a) = convert_act(&id, act, options)? {
                sys_acts.push(a);
            }
        }
        turns.push(RawTurn {
            sys_acts,
            user_text: correct_transcription(&bt.transcription, &options.corrections),
            constraints: bt.goal_labels.iter().map(|(s, v)| (s.clone(), value_text(v))).collect(),
            requests: requests.clone(),
        });
    }
    if turns.is_empty() {
        return Err(Error::parse("call", format!("{id}: no turns")));
    }
    let keep = fraction_missing(&turns) <= options.max_missing_fraction;
    Ok((RawDialogue { id, turns }, keep))
}

fn find_calls(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    if dir.join("label.json").is_file() && dir.join("log.json").is_file() {
        out.push(dir.to_path_buf());
        return Ok(());
    }
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    entries.sort();
    for e in entries {
        find_calls(&e, out)?;
    }
    Ok(())
}

fn import_dirs(dirs: &[PathBuf], options: &ImportOptions) -> Result<ImportReport> {
    let mut report = ImportReport::default();
    for dir in dirs {
        let (dialogue, keep) = import_call(dir, options)?;
        if keep {
            report.dialogues.push(dialogue);
        } else {
            report.discarded.push(dialogue.id);
        }
    }
    info!("imported {} dialogues, discarded {}", report.dialogues.len(), report.discarded.len());
    Ok(report)
}

/// Imports every call directory found below `root`, in path order.
pub fn import_corpus(root: impl AsRef<Path>, options: &ImportOptions) -> Result<ImportReport> {
    let mut dirs = Vec::new();
    find_calls(root.as_ref(), &mut dirs)?;
    import_dirs(&dirs, options)
}

/// Imports the calls listed (relative to `root`) in a file list.
pub fn import_flist(root: impl AsRef<Path>, flist: impl AsRef<Path>, options: &ImportOptions) -> Result<ImportReport> {
    let flist = flist.as_ref();
    let text = std::fs::read_to_string(flist).map_err(|e| Error::io(flist, e))?;
    let dirs: Vec<PathBuf> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| root.as_ref().join(l))
        .collect();
    import_dirs(&dirs, options)
}
