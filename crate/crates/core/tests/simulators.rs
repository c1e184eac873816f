use std::sync::Arc;

use nusbench::abus::{Abus, AbusConfig};
use nusbench::acts::{SystemActType, UserActType};
use nusbench::decoder::SemanticDecoder;
use nusbench::fixtures::toy_ontology;
use nusbench::harness::run_dialogue;
use nusbench::harness::train::new_learner;
use nusbench::harness::DialogueEnv;
use nusbench::rng::domain;
use nusbench::system::{LearnerKind, PolicySystem, ScriptedSystem, MAX_TURNS};

fn achievable_abus(o: &Arc<nusbench::ontology::Ontology>) -> Abus {
    Abus::new(
        Arc::clone(o),
        AbusConfig {
            achievable_goals: true,
            ..AbusConfig::default()
        },
    )
}

#[test]
fn scripted_system_satisfies_every_achievable_goal() {
    let o = Arc::new(toy_ontology());
    let decoder = SemanticDecoder::with_default_rules(&o).unwrap();
    let env = DialogueEnv::new(&o, &decoder);
    let mut user = achievable_abus(&o);
    for i in 0..300 {
        let mut system = ScriptedSystem::new(Arc::clone(&o));
        let rec = run_dialogue(&env, &mut system, &mut user, 5, domain::TEST_DIALOGUE + i).unwrap();
        assert!(rec.success, "dialogue {i} failed: {:#?}", rec.turns);
        assert!(rec.n_turns() <= MAX_TURNS);
        rec.check_invariants().unwrap();
    }
}

#[test]
fn random_policy_records_obey_cap_and_identity() {
    let o = Arc::new(toy_ontology());
    let decoder = SemanticDecoder::with_default_rules(&o).unwrap();
    let env = DialogueEnv::new(&o, &decoder);
    let policy = new_learner(LearnerKind::GpSarsa, &o);
    let mut user = Abus::new(Arc::clone(&o), AbusConfig::default());
    for i in 0..200 {
        let mut system = PolicySystem::new(&policy, Arc::clone(&o), 1.0);
        let rec = run_dialogue(&env, &mut system, &mut user, 9, domain::TEST_DIALOGUE + i).unwrap();
        rec.check_invariants().unwrap();
        assert_eq!(rec.success, rec.offline_success(&o));
        assert!(rec.n_turns() <= MAX_TURNS);
    }
}

#[test]
fn lowered_cap_truncates_dialogues() {
    let o = Arc::new(toy_ontology());
    let decoder = SemanticDecoder::with_default_rules(&o).unwrap();
    let mut env = DialogueEnv::new(&o, &decoder);
    env.max_turns = 4;
    let policy = new_learner(LearnerKind::GpSarsa, &o);
    let mut user = Abus::new(Arc::clone(&o), AbusConfig::default());
    let mut capped = 0;
    for i in 0..50 {
        let mut system = PolicySystem::new(&policy, Arc::clone(&o), 1.0);
        let rec = run_dialogue(&env, &mut system, &mut user, 9, domain::TEST_DIALOGUE + i).unwrap();
        assert!(rec.n_turns() <= 4);
        rec.check_invariants().unwrap();
        capped += usize::from(rec.n_turns() == 4);
    }
    assert!(capped > 0);
}

#[test]
fn dialogues_are_reproducible_from_seed_and_stream() {
    let o = Arc::new(toy_ontology());
    let decoder = SemanticDecoder::with_default_rules(&o).unwrap();
    let env = DialogueEnv::new(&o, &decoder);
    let policy = new_learner(LearnerKind::GpSarsa, &o);
    let run = |stream| {
        let mut user = Abus::new(Arc::clone(&o), AbusConfig::default());
        let mut system = PolicySystem::new(&policy, Arc::clone(&o), 0.5);
        run_dialogue(&env, &mut system, &mut user, 3, stream).unwrap()
    };
    for s in 0..20 {
        assert_eq!(run(domain::TEST_DIALOGUE + s), run(domain::TEST_DIALOGUE + s));
    }
    assert_ne!(run(domain::TEST_DIALOGUE), run(domain::TEST_DIALOGUE + 1));
}

#[test]
fn bye_appears_at_most_once_and_only_last() {
    let o = Arc::new(toy_ontology());
    let decoder = SemanticDecoder::with_default_rules(&o).unwrap();
    let env = DialogueEnv::new(&o, &decoder);
    let mut user = Abus::new(Arc::clone(&o), AbusConfig::default());
    for i in 0..200 {
        let mut system = ScriptedSystem::with_noise(Arc::clone(&o), 0.3);
        let rec = run_dialogue(&env, &mut system, &mut user, 13, domain::TEST_DIALOGUE + i).unwrap();
        let byes: Vec<usize> = rec
            .turns
            .iter()
            .enumerate()
            .filter(|(_, t)| t.decoded.iter().any(|a| a.kind == UserActType::Bye) || t.system_acts.iter().any(|a| a.kind == SystemActType::Bye))
            .map(|(k, _)| k)
            .collect();
        assert!(byes.len() <= 1, "dialogue {i}: bye at {byes:?}");
        if let Some(&k) = byes.first() {
            assert_eq!(k, rec.n_turns() - 1);
        }
    }
}
