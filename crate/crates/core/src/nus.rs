//! Neural user simulator: goal generator, feature extractor, seq2seq model
//! and lexicaliser composed behind the user-simulator contract.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::acts::{SystemAct, SystemActType, UserAct};
use crate::corpus::delex::lexicalize;
use crate::error::{Error, Result};
use crate::features::{extract, init_state, ExtractorState, FeatureVector};
use crate::goal::{apply_canthelp, sample_achievable_goal, sample_goal, CanthelpOutcome, Goal, GoalConfig};
use crate::ontology::Ontology;
use crate::render::render_user_acts_canonical;
use crate::rng::SimRng;
use crate::seq2seq::{generate_beam_sample, LstmState, Seq2Seq};
use crate::simulator::{UserOutput, UserSimulator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NusConfig {
    #[serde(default = "default_beams")]
    pub n_beams: usize,
    #[serde(default = "default_max_len")]
    pub max_len: usize,
    /// Extra generations allowed when a changed goal value goes unmentioned.
    #[serde(default = "default_regen")]
    pub regeneration_budget: usize,
    #[serde(default = "default_true")]
    pub mention_rule: bool,
    #[serde(default)]
    pub achievable_goals: bool,
    #[serde(default)]
    pub goals: GoalConfig,
}

fn default_beams() -> usize {
    2
}
fn default_max_len() -> usize {
    30
}
fn default_regen() -> usize {
    10
}
fn default_true() -> bool {
    true
}

impl Default for NusConfig {
    fn default() -> Self {
        Self {
            n_beams: default_beams(),
            max_len: default_max_len(),
            regeneration_budget: default_regen(),
            mention_rule: true,
            achievable_goals: false,
            goals: GoalConfig::default(),
        }
    }
}

/// Counters accumulated over every dialogue the simulator has run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NusStats {
    pub turns: usize,
    pub goal_change_turns: usize,
    pub regenerations: usize,
    pub template_fallbacks: usize,
    pub unconstrained_slot_tokens: usize,
    pub dropped_specials: usize,
    pub dropped_names: usize,
}

#[derive(Debug, Clone)]
struct NusState {
    goal: Goal,
    extractor: ExtractorState,
    history: Vec<FeatureVector>,
    encoder: LstmState,
    turn: usize,
}

pub struct Nus {
    model: Arc<Seq2Seq>,
    ontology: Arc<Ontology>,
    config: NusConfig,
    state: Option<NusState>,
    stats: NusStats,
}

/// True iff `value` occurs in `text` as a whole-word sequence.
pub fn mentions(text: &str, value: &str) -> bool {
    format!(" {text} ").contains(&format!(" {value} "))
}

impl Nus {
    pub fn new(model: Arc<Seq2Seq>, ontology: Arc<Ontology>, config: NusConfig) -> Result<Self> {
        let dim = crate::features::FeatureLayout::new(&ontology).len();
        if model.dims.feature_dim != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: model.dims.feature_dim,
            });
        }
        Ok(Self {
            model,
            ontology,
            config,
            state: None,
            stats: NusStats::default(),
        })
    }

    pub fn stats(&self) -> &NusStats {
        &self.stats
    }

    pub fn history(&self) -> &[FeatureVector] {
        self.state.as_ref().map_or(&[], |s| &s.history)
    }

    pub fn reset_with_goal(&mut self, goal: Goal) {
        self.state = Some(NusState {
            extractor: init_state(&goal, &self.ontology),
            goal,
            history: Vec::new(),
            encoder: LstmState::zeros(self.model.dims.hidden),
            turn: 0,
        });
    }

    fn generate(&mut self, p: &[f64], rng: &mut SimRng) -> Result<String> {
        let state = self.state.as_ref().ok_or(Error::NotReset)?;
        let gen = generate_beam_sample(&self.model, p, self.config.n_beams, rng, self.config.max_len)?;
        let tokens = self.model.vocab.decode(&gen.tokens);
        let lex = lexicalize(&tokens, &state.goal.constraints, state.extractor.accepted_venue.as_deref());
        self.stats.unconstrained_slot_tokens += lex.unconstrained_slots;
        self.stats.dropped_specials += lex.dropped_specials;
        self.stats.dropped_names += lex.dropped_names;
        Ok(lex.text)
    }
}

impl UserSimulator for Nus {
    fn name(&self) -> &str {
        "nus"
    }

    fn reset(&mut self, rng: &mut SimRng) -> Result<()> {
        let goal = if self.config.achievable_goals {
            sample_achievable_goal(&self.ontology, &self.config.goals, rng)?
        } else {
            sample_goal(&self.ontology, &self.config.goals, rng)?
        };
        self.reset_with_goal(goal);
        Ok(())
    }

    fn respond(&mut self, acts: &[SystemAct], rng: &mut SimRng) -> Result<UserOutput> {
        let ontology = Arc::clone(&self.ontology);
        let state = self.state.as_mut().ok_or(Error::NotReset)?;
        state.turn += 1;
        let mut changed: Option<(String, String)> = None;
        for act in acts.iter().filter(|a| a.kind == SystemActType::Canthelp) {
            let (goal, outcome) = apply_canthelp(&state.goal, act, state.turn, &ontology, rng);
            state.goal = goal;
            if let CanthelpOutcome::Changed { slot, new, .. } = outcome {
                changed = Some((slot, new));
            }
        }
        let (fv, next) = extract(&state.extractor, acts, &state.goal, &ontology)?;
        state.extractor = next;
        state.encoder = self.model.encoder_step(&state.encoder, &fv.to_dense())?;
        state.history.push(fv);
        let p = self.model.bridge(&state.encoder.h);

        self.stats.turns += 1;
        let mut text = self.generate(&p, rng)?;
        if let (Some((slot, new)), true) = (&changed, self.config.mention_rule) {
            self.stats.goal_change_turns += 1;
            let mut tries = 0;
            while !mentions(&text, new) && tries < self.config.regeneration_budget {
                tries += 1;
                self.stats.regenerations += 1;
                text = self.generate(&p, rng)?;
            }
            if !mentions(&text, new) {
                self.stats.template_fallbacks += 1;
                text = render_user_acts_canonical(&[UserAct::inform(slot, new)]);
            }
        }
        Ok(UserOutput::Text(text))
    }

    fn goal(&self) -> Option<&Goal> {
        self.state.as_ref().map(|s| &s.goal)
    }

    fn counters(&self) -> Vec<(&'static str, usize)> {
        let s = &self.stats;
        vec![
            ("turns", s.turns),
            ("goal_change_turns", s.goal_change_turns),
            ("regenerations", s.regenerations),
            ("template_fallbacks", s.template_fallbacks),
            ("unconstrained_slot_tokens", s.unconstrained_slot_tokens),
            ("dropped_specials", s.dropped_specials),
            ("dropped_names", s.dropped_names),
        ]
    }
}
