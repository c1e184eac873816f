//! Rule-based belief tracking over the decoded (noise-free) act channel.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::acts::{SystemAct, SystemActType, UserAct, UserActType};
use crate::ontology::{Constraints, Ontology, DONTCARE};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeliefState {
    /// Latest value per informable slot the user has mentioned (may be `dontcare`).
    pub slots: BTreeMap<String, String>,
    /// Requestable slots asked for and not yet answered.
    pub requested: BTreeSet<String>,
    pub offered: Option<String>,
    pub rejected: BTreeSet<String>,
    pub last_user_acts: Vec<UserActType>,
}

impl BeliefState {
    /// The tracked constraints, `dontcare` included.
    pub fn constraints(&self) -> Constraints {
        self.slots.clone()
    }

    /// Tracked constraints without `dontcare` entries.
    pub fn firm_constraints(&self) -> Constraints {
        self.slots.iter().filter(|(_, v)| *v != DONTCARE).map(|(s, v)| (s.clone(), v.clone())).collect()
    }

    /// Venues matching the tracked constraints, rejected ones excluded.
    pub fn candidates<'a>(&self, ontology: &'a Ontology) -> Vec<&'a crate::ontology::Venue> {
        ontology
            .query_venues(&self.slots)
            .unwrap_or_default()
            .into_iter()
            .filter(|v| !self.rejected.contains(&v.name))
            .collect()
    }

    fn offered_still_matches(&self, ontology: &Ontology) -> bool {
        self.offered
            .as_deref()
            .and_then(|n| ontology.venue(n))
            .is_some_and(|v| ontology.venue_matches(v, &self.slots).unwrap_or(false))
    }
}

/// Folds one user turn into the belief.
pub fn update_belief(belief: &BeliefState, acts: &[UserAct], ontology: &Ontology) -> BeliefState {
    let mut next = belief.clone();
    for act in acts {
        match act.kind {
            UserActType::Inform => {
                for (slot, value) in act.pairs() {
                    if ontology.informable_index(slot).is_some() && (value == DONTCARE || ontology.is_valid_value(slot, value)) {
                        next.slots.insert(slot.to_string(), value.to_string());
                    }
                }
            }
            UserActType::Request => {
                if let Some(slot) = act.requested_slot() {
                    if slot == "name" || ontology.requestable_index(slot).is_some() {
                        next.requested.insert(slot.to_string());
                    }
                }
            }
            UserActType::Reqalts => {
                if let Some(name) = next.offered.take() {
                    next.rejected.insert(name);
                }
            }
            UserActType::Negate | UserActType::Affirm | UserActType::Thankyou | UserActType::Bye | UserActType::Null => {}
        }
    }
    if next.offered.is_some() && !next.offered_still_matches(ontology) {
        next.offered = None;
    }
    next.last_user_acts = acts.iter().map(|a| a.kind).collect();
    next
}

/// Folds the system's own turn into the belief (offers, answered requests).
pub fn observe_system(belief: &BeliefState, acts: &[SystemAct]) -> BeliefState {
    let mut next = belief.clone();
    for act in acts {
        if !matches!(act.kind, SystemActType::Offer | SystemActType::Inform) {
            continue;
        }
        if let Some(name) = act.value_of("name") {
            if next.offered.as_deref() != Some(name) {
                next.offered = Some(name.to_string());
            }
            next.requested.remove("name");
            if act.kind == SystemActType::Inform {
                for (slot, _) in act.pairs() {
                    next.requested.remove(slot);
                }
            }
        }
    }
    next
}

/// Rebuilds a belief from a full history of (system turn, user turn) pairs.
pub fn replay_belief<'a, I>(turns: I, ontology: &Ontology) -> BeliefState
where
    I: IntoIterator<Item = (&'a [SystemAct], &'a [UserAct])>,
{
    let mut b = BeliefState::default();
    for (sys, user) in turns {
        b = observe_system(&b, sys);
        b = update_belief(&b, user, ontology);
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::toy_ontology;

    #[test]
    fn latest_inform_wins() {
        let o = toy_ontology();
        let b = update_belief(&BeliefState::default(), &[UserAct::inform("food", "chinese")], &o);
        let b = update_belief(&b, &[UserAct::inform("food", "spanish")], &o);
        assert_eq!(b.slots["food"], "spanish");
    }

    #[test]
    fn request_is_outstanding_until_answered() {
        let o = toy_ontology();
        let b = update_belief(&BeliefState::default(), &[UserAct::request("phone")], &o);
        assert!(b.requested.contains("phone"));
        let b = observe_system(&b, &[SystemAct::inform(&[("name", "pipasha"), ("phone", "x")])]);
        assert!(b.requested.is_empty());
        assert_eq!(b.offered.as_deref(), Some("pipasha"));
    }

    #[test]
    fn null_leaves_belief_unchanged_except_last_act() {
        let o = toy_ontology();
        let b = update_belief(&BeliefState::default(), &[UserAct::inform("area", "north")], &o);
        let n = update_belief(&b, &[UserAct::null()], &o);
        assert_eq!(n.slots, b.slots);
        assert_eq!(n.requested, b.requested);
        assert_eq!(n.last_user_acts, vec![UserActType::Null]);
    }

    #[test]
    fn reqalts_rejects_the_offer() {
        let o = toy_ontology();
        let b = observe_system(&BeliefState::default(), &[SystemAct::offer("pipasha")]);
        let b = update_belief(&b, &[UserAct::bare(UserActType::Reqalts)], &o);
        assert!(b.offered.is_none());
        assert!(b.rejected.contains("pipasha"));
    }

    #[test]
    fn changed_constraint_drops_stale_offer() {
        let o = toy_ontology();
        let b = update_belief(&BeliefState::default(), &[UserAct::inform("food", "spanish")], &o);
        let b = observe_system(&b, &[SystemAct::offer("pipasha")]);
        let b = update_belief(&b, &[UserAct::bare(UserActType::Negate), UserAct::inform("food", "chinese")], &o);
        assert!(b.offered.is_none());
        assert_eq!(b.slots["food"], "chinese");
    }
}
