use std::path::Path;

use serde_json::json;

use nusbench::acts::SystemActType;
use nusbench::corpus::dstc2::{import_corpus, import_flist, parse_aliases, parse_corrections, ImportOptions};
use nusbench::error::Error;

/// Writes one call; each turn is (system acts, transcription, goal labels).
fn write_call(dir: &Path, id: &str, turns: &[(serde_json::Value, &str, serde_json::Value)]) {
    let call = dir.join(id);
    std::fs::create_dir_all(&call).unwrap();
    let log = json!({
        "session-id": id,
        "turns": turns.iter().map(|(acts, _, _)| json!({"output": {"dialog-acts": acts}})).collect::<Vec<_>>(),
    });
    let label = json!({
        "task-information": {"goal": {"request-slots": ["phone"]}},
        "turns": turns.iter().map(|(_, text, goal)| json!({"transcription": text, "goal-labels": goal})).collect::<Vec<_>>(),
    });
    std::fs::write(call.join("log.json"), log.to_string()).unwrap();
    std::fs::write(call.join("label.json"), label.to_string()).unwrap();
}

fn welcome() -> serde_json::Value {
    json!([{"act": "welcomemsg", "slots": []}])
}

#[test]
fn imports_calls_with_corrections() {
    let tmp = tempfile::tempdir().unwrap();
    write_call(
        tmp.path(),
        "c1",
        &[
            (welcome(), "Spanish fod please", json!({"food": "spanish"})),
            (json!([{"act": "request", "slots": [["slot", "area"]]}]), "south", json!({"food": "spanish", "area": "south"})),
        ],
    );
    let options = ImportOptions {
        corrections: parse_corrections("fod\tfood\n").unwrap(),
        ..ImportOptions::default()
    };
    let report = import_corpus(tmp.path(), &options).unwrap();
    assert_eq!(report.dialogues.len(), 1);
    assert_eq!(report.n_turns(), 2);
    let d = &report.dialogues[0];
    assert_eq!(d.id, "c1");
    assert_eq!(d.turns[0].user_text, "spanish food please");
    assert_eq!(d.turns[1].sys_acts[0].to_string(), "request(area)");
    assert_eq!(d.final_requests(), vec!["phone".to_string()]);
}

#[test]
fn unknown_act_is_reported_with_its_dialogue() {
    let tmp = tempfile::tempdir().unwrap();
    write_call(tmp.path(), "bad", &[(json!([{"act": "frobnicate", "slots": []}]), "hello", json!({}))]);
    match import_corpus(tmp.path(), &ImportOptions::default()) {
        Err(Error::UnknownAct { dialogue, act }) => {
            assert_eq!(dialogue, "bad");
            assert_eq!(act, "frobnicate");
        }
        other => panic!("expected UnknownAct, got {other:?}"),
    }
}

#[test]
fn aliases_rename_and_drop_acts() {
    let tmp = tempfile::tempdir().unwrap();
    let acts = json!([
        {"act": "canthelp.exception", "slots": [["food", "eritrean"]]},
        {"act": "confirm-domain", "slots": []},
    ]);
    write_call(tmp.path(), "c1", &[(acts, "eritrean", json!({"food": "eritrean"}))]);
    let aliases = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/dstc2_act_aliases.tsv")).unwrap();
    let options = ImportOptions {
        aliases: parse_aliases(&aliases).unwrap(),
        ..ImportOptions::default()
    };
    let report = import_corpus(tmp.path(), &options).unwrap();
    let sys = &report.dialogues[0].turns[0].sys_acts;
    assert_eq!(sys.len(), 1);
    assert_eq!(sys[0].kind, SystemActType::Canthelp);
}

#[test]
fn dialogues_with_unspoken_values_are_discarded() {
    let tmp = tempfile::tempdir().unwrap();
    write_call(tmp.path(), "good", &[(welcome(), "cheap spanish", json!({"food": "spanish", "pricerange": "cheap"}))]);
    write_call(tmp.path(), "noisy", &[(welcome(), "um something", json!({"food": "spanish", "pricerange": "cheap"}))]);
    let report = import_corpus(tmp.path(), &ImportOptions::default()).unwrap();
    assert_eq!(report.dialogues.len(), 1);
    assert_eq!(report.dialogues[0].id, "good");
    assert_eq!(report.discarded, vec!["noisy".to_string()]);
}

#[test]
fn flist_selects_and_orders_calls() {
    let tmp = tempfile::tempdir().unwrap();
    for id in ["a", "b", "c"] {
        write_call(tmp.path(), id, &[(welcome(), "bye", json!({}))]);
    }
    let flist = tmp.path().join("list.flist");
    std::fs::write(&flist, "c\n\na\n").unwrap();
    let report = import_flist(tmp.path(), &flist, &ImportOptions::default()).unwrap();
    let ids: Vec<&str> = report.dialogues.iter().map(|d| d.id.as_str()).collect();
    assert_eq!(ids, ["c", "a"]);
}

#[test]
fn malformed_alias_and_correction_files_are_rejected() {
    assert!(parse_aliases("no-tab-here\n").is_err());
    assert!(parse_aliases("x\tnot-an-act\n").is_err());
    assert!(parse_corrections("oops\n").is_err());
}
