//! Agenda-based user simulator.
//!
//! The user's pending acts live on a stack. System acts push new items
//! (answers, corrections, re-requests); each turn the user pops one or two
//! acts off the top. `bye` sits at the bottom and is only said once
//! everything else has been said.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::acts::{SystemAct, SystemActType, UserAct, UserActType};
use crate::error::{Error, Result};
use crate::goal::{apply_canthelp, sample_achievable_goal, sample_goal, CanthelpOutcome, Goal, GoalConfig};
use crate::ontology::{Ontology, DONTCARE};
use crate::rng::SimRng;
use crate::simulator::{UserOutput, UserSimulator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbusConfig {
    /// Probability of popping two acts instead of one.
    #[serde(default = "default_pop2")]
    pub pop2_prob: f64,
    #[serde(default)]
    pub goals: GoalConfig,
    #[serde(default)]
    pub achievable_goals: bool,
}

fn default_pop2() -> f64 {
    0.3
}

impl Default for AbusConfig {
    fn default() -> Self {
        Self {
            pop2_prob: default_pop2(),
            goals: GoalConfig::default(),
            achievable_goals: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbusState {
    pub goal: Goal,
    /// Bottom first; the last element is said next.
    pub agenda: Vec<UserAct>,
    /// Requests already said but not yet answered.
    pub pending: BTreeSet<String>,
    /// Requestable slots informed for `venue`.
    pub answered: BTreeSet<String>,
    /// Venue the user accepted (it matches the goal).
    pub venue: Option<String>,
    pub turn: usize,
    pub finished: bool,
}

impl AbusState {
    /// Agenda bottom-up: bye, requests, then the informs in `inform_order`.
    pub fn new(goal: Goal, inform_order: &[(String, String)]) -> Self {
        let mut agenda = vec![UserAct::bare(UserActType::Bye)];
        for r in &goal.requests {
            agenda.push(UserAct::request(r));
        }
        for (s, v) in inform_order {
            agenda.push(UserAct::inform(s, v));
        }
        Self {
            goal,
            agenda,
            pending: BTreeSet::new(),
            answered: BTreeSet::new(),
            venue: None,
            turn: 0,
            finished: false,
        }
    }

    /// Agenda from top to bottom.
    pub fn agenda_top_down(&self) -> Vec<UserAct> {
        self.agenda.iter().rev().cloned().collect()
    }

    fn push(&mut self, act: UserAct) {
        self.agenda.retain(|a| a != &act);
        self.agenda.push(act);
    }

    /// Replaces any pending inform about `slot` by a fresh one on top.
    fn push_inform(&mut self, slot: &str, value: &str) {
        self.agenda
            .retain(|a| !(a.kind == UserActType::Inform && a.pairs().any(|(s, _)| s == slot)));
        self.agenda.push(UserAct::inform(slot, value));
    }

    fn remove_request(&mut self, slot: &str) {
        self.agenda.retain(|a| a.requested_slot() != Some(slot));
        self.pending.remove(slot);
    }

    fn wanted(&self, slot: &str) -> &str {
        self.goal.constraints.get(slot).map(String::as_str).unwrap_or(DONTCARE)
    }

    fn push_unanswered_requests(&mut self) {
        for r in self.goal.requests.clone().iter().rev() {
            let queued = self.agenda.iter().any(|a| a.requested_slot() == Some(r));
            if !self.answered.contains(r) && !queued {
                self.agenda.push(UserAct::request(r));
            }
        }
    }

    fn on_venue(&mut self, name: &str, ontology: &Ontology) {
        if self.venue.as_deref() == Some(name) {
            return;
        }
        let matches = ontology
            .venue(name)
            .is_some_and(|v| ontology.venue_matches(v, &self.goal.constraints).unwrap_or(false));
        if matches {
            self.venue = Some(name.to_string());
            self.answered = BTreeSet::from(["name".to_string()]);
            self.remove_request("name");
            self.pending.clear();
            self.push_unanswered_requests();
        } else {
            self.push(UserAct::bare(UserActType::Reqalts));
        }
    }

    fn on_confirm(&mut self, slot: &str, value: &str, explicit: bool) {
        match self.goal.constraints.get(slot).cloned() {
            Some(wanted) if wanted != value => {
                self.push_inform(slot, &wanted);
                self.push(UserAct::bare(UserActType::Negate));
            }
            // a correct value, or a slot the user has no preference on
            _ => {
                if explicit {
                    self.push(UserAct::bare(UserActType::Affirm));
                }
            }
        }
    }

    fn update(&mut self, acts: &[SystemAct], ontology: &Ontology, rng: &mut SimRng) {
        use SystemActType::*;
        for act in acts {
            match act.kind {
                Request => {
                    for sv in &act.slots {
                        if ontology.informable_index(&sv.slot).is_some() {
                            let v = self.wanted(&sv.slot).to_string();
                            self.push_inform(&sv.slot, &v);
                        }
                    }
                }
                Select => {
                    if let Some(slot) = act.slots.first().map(|sv| sv.slot.clone()) {
                        let wanted = self.wanted(&slot).to_string();
                        let offered = act.pairs().any(|(s, v)| s == slot && v == wanted);
                        self.push_inform(&slot, &wanted);
                        if !offered && self.goal.constraints.contains_key(&slot) {
                            self.push(UserAct::bare(UserActType::Negate));
                        }
                    }
                }
                ExplConf | ImplConf => {
                    let pairs: Vec<(String, String)> = act
                        .pairs()
                        .filter(|(s, _)| ontology.informable_index(s).is_some())
                        .map(|(s, v)| (s.to_string(), v.to_string()))
                        .collect();
                    for (s, v) in pairs {
                        self.on_confirm(&s, &v, act.kind == ExplConf);
                    }
                }
                Offer | Inform => {
                    if let Some(name) = act.value_of("name") {
                        self.on_venue(name, ontology);
                    }
                    if act.kind == Inform && self.venue.is_some() && act.value_of("name") == self.venue.as_deref() {
                        let slots: Vec<String> = act
                            .pairs()
                            .filter(|(s, _)| ontology.requestable_index(s).is_some() || *s == "name")
                            .map(|(s, _)| s.to_string())
                            .collect();
                        for s in slots {
                            self.answered.insert(s.clone());
                            self.remove_request(&s);
                        }
                    }
                }
                Canthelp => {
                    let (next, outcome) = apply_canthelp(&self.goal, act, self.turn, ontology, rng);
                    self.goal = next;
                    match outcome {
                        CanthelpOutcome::Changed { slot, new, .. } => {
                            let still_ok = self.venue.as_deref().and_then(|n| ontology.venue(n)).is_some_and(|v| {
                                ontology.venue_matches(v, &self.goal.constraints).unwrap_or(false)
                            });
                            if !still_ok {
                                self.venue = None;
                                self.answered.clear();
                            }
                            self.push_inform(&slot, &new);
                        }
                        CanthelpOutcome::NoMatchingSlot | CanthelpOutcome::NoAlternative { .. } => {
                            // correct whatever the system got wrong
                            let pairs: Vec<(String, String)> =
                                act.pairs().map(|(s, v)| (s.to_string(), v.to_string())).collect();
                            for (s, v) in pairs {
                                if ontology.informable_index(&s).is_some() && self.wanted(&s) != v {
                                    let w = self.wanted(&s).to_string();
                                    self.push_inform(&s, &w);
                                }
                            }
                        }
                    }
                }
                Welcomemsg | Reqmore | Bye | Repeat => {}
            }
        }
        if self.venue.is_some() {
            for r in self.pending.clone() {
                let queued = self.agenda.iter().any(|a| a.requested_slot() == Some(r.as_str()));
                if !self.answered.contains(&r) && !queued {
                    self.agenda.push(UserAct::request(&r));
                }
            }
        }
    }

    fn pop(&mut self, n: usize) -> Vec<UserAct> {
        let mut out: Vec<UserAct> = Vec::new();
        while out.len() < n {
            let Some(top) = self.agenda.last() else { break };
            if top.kind == UserActType::Bye {
                if self.agenda.len() == 1 && out.is_empty() {
                    out.push(self.agenda.pop().expect("non-empty"));
                    self.finished = true;
                }
                break;
            }
            let act = self.agenda.pop().expect("non-empty");
            if let Some(r) = act.requested_slot() {
                self.pending.insert(r.to_string());
            }
            if !out.contains(&act) {
                out.push(act);
            }
        }
        out
    }
}

pub struct Abus {
    ontology: Arc<Ontology>,
    config: AbusConfig,
    state: Option<AbusState>,
}

impl Abus {
    pub fn new(ontology: Arc<Ontology>, config: AbusConfig) -> Self {
        Self {
            ontology,
            config,
            state: None,
        }
    }

    pub fn state(&self) -> Option<&AbusState> {
        self.state.as_ref()
    }

    /// Starts a dialogue with a given goal (informs shuffled with `rng`).
    pub fn reset_with_goal(&mut self, goal: Goal, rng: &mut SimRng) {
        let mut informs: Vec<(String, String)> =
            goal.constraints.iter().map(|(s, v)| (s.clone(), v.clone())).collect();
        informs.shuffle(rng);
        self.state = Some(AbusState::new(goal, &informs));
    }
}

impl UserSimulator for Abus {
    fn name(&self) -> &str {
        "abus"
    }

    fn reset(&mut self, rng: &mut SimRng) -> Result<()> {
        let goal = if self.config.achievable_goals {
            sample_achievable_goal(&self.ontology, &self.config.goals, rng)?
        } else {
            sample_goal(&self.ontology, &self.config.goals, rng)?
        };
        self.reset_with_goal(goal, rng);
        Ok(())
    }

    fn respond(&mut self, acts: &[SystemAct], rng: &mut SimRng) -> Result<UserOutput> {
        let state = self.state.as_mut().ok_or(Error::NotReset)?;
        if state.finished {
            return Err(Error::Contract {
                turn: state.turn,
                message: "user already said bye".into(),
            });
        }
        state.turn += 1;
        state.update(acts, &self.ontology, rng);
        let n = if rng.random::<f64>() < self.config.pop2_prob { 2 } else { 1 };
        Ok(UserOutput::Acts(state.pop(n)))
    }

    fn goal(&self) -> Option<&Goal> {
        self.state.as_ref().map(|s| &s.goal)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::Constraints;
    use crate::rng::seeded;
    use crate::testutil::toy_ontology;

    fn goal(c: &[(&str, &str)], r: &[&str]) -> Goal {
        Goal::new(
            c.iter().map(|(s, v)| (s.to_string(), v.to_string())).collect::<Constraints>(),
            r.iter().map(|s| s.to_string()).collect(),
        )
    }

    fn abus(pop2: f64) -> Abus {
        Abus::new(
            Arc::new(toy_ontology()),
            AbusConfig {
                pop2_prob: pop2,
                ..AbusConfig::default()
            },
        )
    }

    fn acts(out: UserOutput) -> Vec<UserAct> {
        out.acts().unwrap().to_vec()
    }

    #[test]
    fn agenda_construction() {
        let mut u = abus(0.0);
        u.reset_with_goal(goal(&[("food", "spanish")], &["phone"]), &mut seeded(1));
        let st = u.state().unwrap();
        assert_eq!(
            st.agenda_top_down(),
            vec![UserAct::inform("food", "spanish"), UserAct::request("phone"), UserAct::bare(UserActType::Bye)]
        );
    }

    #[test]
    fn agenda_size_at_reset() {
        let mut u = abus(0.0);
        let mut rng = seeded(5);
        for _ in 0..50 {
            u.reset(&mut rng).unwrap();
            let st = u.state().unwrap();
            assert_eq!(st.agenda.len(), st.goal.constraints.len() + st.goal.requests.len() + 1);
            assert_eq!(st.agenda[0], UserAct::bare(UserActType::Bye));
        }
    }

    #[test]
    fn unconstrained_request_gives_dontcare() {
        let mut u = abus(0.0);
        let mut rng = seeded(1);
        u.reset_with_goal(goal(&[("food", "spanish")], &["phone"]), &mut rng);
        let out = acts(u.respond(&[SystemAct::request("area")], &mut rng).unwrap());
        assert_eq!(out, vec![UserAct::inform("area", "dontcare")]);
    }

    #[test]
    fn canthelp_makes_user_mention_new_value() {
        let mut u = abus(0.0);
        let mut rng = seeded(1);
        u.reset_with_goal(goal(&[("food", "eritrean"), ("area", "south")], &["phone"]), &mut rng);
        let ch: SystemAct = "canthelp(food=eritrean,area=south)".parse().unwrap();
        let out = acts(u.respond(&[ch], &mut rng).unwrap());
        let new = u.goal().unwrap().constraints["food"].clone();
        assert_ne!(new, "eritrean");
        assert_eq!(out, vec![UserAct::inform("food", &new)]);
    }

    #[test]
    fn answered_request_is_not_repeated() {
        let o = toy_ontology();
        let mut u = abus(0.0);
        let mut rng = seeded(1);
        u.reset_with_goal(goal(&[("food", "spanish")], &["phone"]), &mut rng);
        let _ = u.respond(&[SystemAct::welcome()], &mut rng).unwrap();
        let v = o.venue("the red lion").unwrap();
        let phone = o.venue_value(v, "phone").unwrap().to_string();
        let offer = vec![SystemAct::offer("the red lion")];
        let out = acts(u.respond(&offer, &mut rng).unwrap());
        assert_eq!(out, vec![UserAct::request("phone")]);
        let inform = SystemAct::inform(&[("name", "the red lion"), ("phone", &phone)]);
        let out = acts(u.respond(&[inform], &mut rng).unwrap());
        assert_eq!(out, vec![UserAct::bare(UserActType::Bye)]);
        assert!(u.respond(&[SystemAct::bare(SystemActType::Reqmore)], &mut rng).is_err());
    }

    #[test]
    fn non_matching_offer_gets_reqalts() {
        let mut u = abus(0.0);
        let mut rng = seeded(1);
        u.reset_with_goal(goal(&[("food", "chinese")], &["phone"]), &mut rng);
        let out = acts(u.respond(&[SystemAct::offer("the red lion")], &mut rng).unwrap());
        assert_eq!(out, vec![UserAct::bare(UserActType::Reqalts)]);
    }

    #[test]
    fn wrong_expl_conf_is_negated_and_corrected() {
        let mut u = abus(1.0);
        let mut rng = seeded(1);
        u.reset_with_goal(goal(&[("food", "chinese"), ("area", "north")], &["phone"]), &mut rng);
        let conf: SystemAct = "expl-conf(food=spanish)".parse().unwrap();
        let out = acts(u.respond(&[conf], &mut rng).unwrap());
        assert_eq!(out, vec![UserAct::bare(UserActType::Negate), UserAct::inform("food", "chinese")]);
        let conf: SystemAct = "expl-conf(area=north)".parse().unwrap();
        let out = acts(u.respond(&[conf], &mut rng).unwrap());
        assert_eq!(out[0], UserAct::bare(UserActType::Affirm));
    }

    #[test]
    fn respond_before_reset_fails() {
        let mut u = abus(0.0);
        assert!(matches!(u.respond(&[SystemAct::welcome()], &mut seeded(0)), Err(Error::NotReset)));
    }
}
