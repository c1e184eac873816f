mod common;

use nusbench::acts::{UserAct, UserActType};
use nusbench::corpus::{build_training_set, lexicalize, synthesize_corpus, Delexicalizer, RawDialogue, RawTurn, SynthConfig};
use nusbench::acts::SystemAct;
use nusbench::decoder::SemanticDecoder;
use nusbench::fixtures::toy_ontology;
use nusbench::render::{render_user_act_variant, user_variant_count};

#[test]
fn worked_example_yields_consistent_training_turns() {
    let o = toy_ontology();
    let labels = common::table1_input();
    let turns = labels
        .iter()
        .enumerate()
        .map(|(k, c)| RawTurn {
            sys_acts: vec![if k == 0 { SystemAct::welcome() } else { SystemAct::request("area") }],
            user_text: c.values().cloned().collect::<Vec<_>>().join(" "),
            constraints: c.clone(),
            requests: vec!["phone".into()],
        })
        .collect();
    let set = build_training_set(&[RawDialogue { id: "t1".into(), turns }], &o, usize::MAX).unwrap();
    assert_eq!(set.turns.len(), labels.len());
    for t in &set.turns {
        // every constraint of the transformed goal is consistent with nothing informed yet
        let last = t.history.last().unwrap().dump();
        let c = last.rsplit("c=").next().unwrap();
        assert!(c.chars().all(|b| b == '1'), "{last}");
    }
}

#[test]
fn synthetic_corpus_respects_the_length_cap() {
    let o = toy_ontology();
    let config = SynthConfig {
        n_dialogues: 200,
        ..SynthConfig::default()
    };
    let dialogues = synthesize_corpus(&o, &config, 1).unwrap();
    assert_eq!(dialogues.len(), 200);
    let set = build_training_set(&dialogues, &o, 22).unwrap();
    assert!(set.stats.max_turn_len <= 22);
    assert_eq!(set.stats.n_dialogues, 200);
    assert!(set.turns.iter().all(|t| t.target.last().map(String::as_str) == Some("<EOS>")));
}

#[test]
fn lexicalize_inverts_delexicalize_for_goal_values() {
    let o = toy_ontology();
    let delex = Delexicalizer::new(&o);
    for (slot, value) in o.all_values() {
        let goal = [(slot.to_string(), value.to_string())].into_iter().collect();
        let text = format!("i am looking for {value} please");
        let tokens = delex.delexicalize(&text, &goal);
        assert!(tokens.contains(&format!("<value_{slot}>")), "{tokens:?}");
        assert_eq!(lexicalize(&tokens, &goal, None).text, text);
    }
}

#[test]
fn decoder_parses_every_rendered_user_template() {
    let o = toy_ontology();
    let decoder = SemanticDecoder::with_default_rules(&o).unwrap();
    let mut acts: Vec<UserAct> = Vec::new();
    for (slot, value) in o.all_values() {
        acts.push(UserAct::inform(slot, value));
    }
    for slot in o.requestable() {
        acts.push(UserAct::request(slot));
    }
    for kind in [UserActType::Bye, UserActType::Reqalts] {
        acts.push(UserAct::bare(kind));
    }
    for act in &acts {
        for v in 0..user_variant_count(act) {
            let text = render_user_act_variant(act, v);
            let parsed = decoder.parse(&text);
            assert!(parsed.contains(act), "`{text}` parsed as {parsed:?}, want {act}");
        }
    }
}
