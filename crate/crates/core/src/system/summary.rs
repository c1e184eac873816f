//! Discrete summary space and the master-action mapping.

use serde::{Deserialize, Serialize};

use super::belief::BeliefState;
use crate::acts::{SlotValue, SystemAct, SystemActType, UserActType};
use crate::error::{Error, Result};
use crate::ontology::{Ontology, Venue};

pub const N_COUNT_BUCKETS: usize = 4;
pub const N_LAST_ACT_CODES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SummaryState {
    pub known: Vec<bool>,
    /// Matching-venue count bucket: 0, 1, 2-4, 5+.
    pub count_bucket: usize,
    pub outstanding: bool,
    pub offered: bool,
    pub last_act: usize,
}

fn bucket(n: usize) -> usize {
    match n {
        0 => 0,
        1 => 1,
        2..=4 => 2,
        _ => 3,
    }
}

/// Code of the most salient act of the last user turn.
fn last_act_code(acts: &[UserActType]) -> usize {
    use UserActType::*;
    const PRIORITY: [UserActType; 7] = [Request, Reqalts, Negate, Inform, Affirm, Bye, Thankyou];
    PRIORITY
        .iter()
        .position(|k| acts.contains(k))
        .map_or(0, |p| p + 1)
}

impl SummaryState {
    pub fn from_belief(belief: &BeliefState, ontology: &Ontology) -> Self {
        Self {
            known: ontology.informable().iter().map(|s| belief.slots.contains_key(&s.name)).collect(),
            count_bucket: bucket(belief.candidates(ontology).len()),
            outstanding: !belief.requested.is_empty(),
            offered: belief.offered.is_some(),
            last_act: last_act_code(&belief.last_user_acts),
        }
    }

    pub fn n_states(ontology: &Ontology) -> usize {
        (1usize << ontology.n_informable()) * N_COUNT_BUCKETS * 2 * 2 * N_LAST_ACT_CODES
    }

    pub fn index(&self) -> usize {
        let known = self.known.iter().enumerate().fold(0usize, |acc, (k, b)| acc | (usize::from(*b) << k));
        let mut ix = known;
        ix = ix * N_COUNT_BUCKETS + self.count_bucket;
        ix = ix * 2 + usize::from(self.outstanding);
        ix = ix * 2 + usize::from(self.offered);
        ix * N_LAST_ACT_CODES + self.last_act
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MasterAction {
    /// Ask for the informable slot with this index.
    Request(usize),
    Offer,
    InformRequested,
    Bye,
}

impl MasterAction {
    pub fn n_actions(ontology: &Ontology) -> usize {
        ontology.n_informable() + 3
    }

    pub fn from_index(ix: usize, ontology: &Ontology) -> Self {
        let n = ontology.n_informable();
        match ix {
            i if i < n => MasterAction::Request(i),
            i if i == n => MasterAction::Offer,
            i if i == n + 1 => MasterAction::InformRequested,
            _ => MasterAction::Bye,
        }
    }

    pub fn index(self, ontology: &Ontology) -> usize {
        let n = ontology.n_informable();
        match self {
            MasterAction::Request(i) => i,
            MasterAction::Offer => n,
            MasterAction::InformRequested => n + 1,
            MasterAction::Bye => n + 2,
        }
    }
}

/// Legal master actions. `inform-requested` needs an offered venue and an
/// outstanding request; every other action is always legal (offering with
/// no matching venue becomes `canthelp`).
pub fn action_mask(belief: &BeliefState, ontology: &Ontology) -> Vec<bool> {
    let mut mask = vec![true; MasterAction::n_actions(ontology)];
    mask[MasterAction::InformRequested.index(ontology)] = belief.offered.is_some() && !belief.requested.is_empty();
    mask
}

fn offer_acts(venue: &Venue, ontology: &Ontology) -> Vec<SystemAct> {
    let mut details = vec![SlotValue::pair("name", &venue.name)];
    for (slot, value) in ontology.informable().iter().zip(&venue.informable) {
        details.push(SlotValue::pair(&slot.name, value));
    }
    vec![SystemAct::offer(&venue.name), SystemAct::new(SystemActType::Inform, details)]
}

/// Expands a master action into concrete system acts.
pub fn master_to_acts(action: MasterAction, belief: &BeliefState, ontology: &Ontology) -> Result<Vec<SystemAct>> {
    match action {
        MasterAction::Request(i) => {
            let slot = ontology
                .informable()
                .get(i)
                .ok_or_else(|| Error::InvalidAct(format!("no informable slot #{i}")))?;
            Ok(vec![SystemAct::request(&slot.name)])
        }
        MasterAction::Offer => {
            if let Some(v) = belief.candidates(ontology).first() {
                return Ok(offer_acts(v, ontology));
            }
            let firm = belief.firm_constraints();
            if firm.is_empty() {
                // every venue was rejected without any constraint; start over
                let v = ontology.venues().first().ok_or_else(|| Error::Config("empty venue database".into()))?;
                return Ok(offer_acts(v, ontology));
            }
            Ok(vec![SystemAct::canthelp(&firm)])
        }
        MasterAction::InformRequested => {
            let name = belief
                .offered
                .as_deref()
                .ok_or_else(|| Error::InvalidAct("inform-requested without an offered venue".into()))?;
            let venue = ontology.venue(name).ok_or_else(|| Error::UnknownValue {
                slot: "name".into(),
                value: name.into(),
            })?;
            let mut slots = vec![SlotValue::pair("name", name)];
            for r in ontology.requestable() {
                if belief.requested.contains(r) && r != "name" {
                    if let Some(v) = ontology.venue_value(venue, r) {
                        slots.push(SlotValue::pair(r, v));
                    }
                }
            }
            Ok(vec![SystemAct::new(SystemActType::Inform, slots)])
        }
        MasterAction::Bye => Ok(vec![SystemAct::bare(SystemActType::Bye)]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acts::UserAct;
    use crate::system::belief::{observe_system, update_belief};
    use crate::testutil::toy_ontology;

    #[test]
    fn toy_space_is_small_and_indices_are_dense() {
        let o = toy_ontology();
        let n = SummaryState::n_states(&o);
        assert!(n < 10_000);
        let s = SummaryState {
            known: vec![true; 3],
            count_bucket: 3,
            outstanding: true,
            offered: true,
            last_act: 7,
        };
        assert_eq!(s.index(), n - 1);
    }

    #[test]
    fn offer_without_matches_becomes_canthelp() {
        let o = toy_ontology();
        let b = update_belief(
            &BeliefState::default(),
            &[UserAct::inform("food", "eritrean"), UserAct::inform("area", "south")],
            &o,
        );
        assert!(b.candidates(&o).is_empty());
        let acts = master_to_acts(MasterAction::Offer, &b, &o).unwrap();
        assert_eq!(acts, vec!["canthelp(area=south,food=eritrean)".parse().unwrap()]);
    }

    #[test]
    fn inform_requested_uses_venue_values() {
        let o = toy_ontology();
        let b = update_belief(&BeliefState::default(), &[UserAct::inform("food", "spanish")], &o);
        let b = observe_system(&b, &[SystemAct::offer("the red lion")]);
        let b = update_belief(&b, &[UserAct::request("phone")], &o);
        assert!(action_mask(&b, &o)[MasterAction::InformRequested.index(&o)]);
        let acts = master_to_acts(MasterAction::InformRequested, &b, &o).unwrap();
        assert_eq!(acts, vec![SystemAct::inform(&[("name", "the red lion"), ("phone", "01223 301274")])]);
    }

    #[test]
    fn inform_requested_is_masked_without_request() {
        let o = toy_ontology();
        let b = observe_system(&BeliefState::default(), &[SystemAct::offer("the red lion")]);
        assert!(!action_mask(&b, &o)[MasterAction::InformRequested.index(&o)]);
        assert!(action_mask(&b, &o)[MasterAction::Bye.index(&o)]);
    }

    #[test]
    fn action_index_round_trip() {
        let o = toy_ontology();
        for ix in 0..MasterAction::n_actions(&o) {
            assert_eq!(MasterAction::from_index(ix, &o).index(&o), ix);
        }
    }
}
