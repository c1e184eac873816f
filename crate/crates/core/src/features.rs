//! Value-independent embedding of a system turn: `[a1 a2 r i c]`.
//!
//! * `a1`: which system act types occur in the turn (binary, not one-hot).
//! * `a2`: four groups of informable-slot flags: requested, selected,
//!   informed with a correct pair, explicitly confirmed with a correct pair.
//! * `r` : requests still unanswered for the accepted venue. Carried across
//!   turns and reset to the initial request vector when a new venue appears.
//! * `i` : slots the system mentioned (inform/expl-conf/impl-conf) with a
//!   value contradicting the current constraints. Recomputed every turn.
//! * `c` : slots present in the current constraints.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::acts::{SystemAct, SystemActType};
use crate::error::{Error, Result};
use crate::goal::Goal;
use crate::ontology::Ontology;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureLayout {
    pub n_act_types: usize,
    pub n_informable: usize,
    pub n_requestable: usize,
}

impl FeatureLayout {
    pub fn new(ontology: &Ontology) -> Self {
        Self {
            n_act_types: SystemActType::ALL.len(),
            n_informable: ontology.n_informable(),
            n_requestable: ontology.n_requestable(),
        }
    }

    pub fn len(&self) -> usize {
        self.n_act_types + 4 * self.n_informable + self.n_requestable + 2 * self.n_informable
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureVector {
    pub a1: Vec<u8>,
    pub a2: Vec<u8>,
    pub r: Vec<u8>,
    pub i: Vec<u8>,
    pub c: Vec<u8>,
}

impl FeatureVector {
    pub fn zeros(layout: &FeatureLayout) -> Self {
        Self {
            a1: vec![0; layout.n_act_types],
            a2: vec![0; 4 * layout.n_informable],
            r: vec![0; layout.n_requestable],
            i: vec![0; layout.n_informable],
            c: vec![0; layout.n_informable],
        }
    }

    pub fn len(&self) -> usize {
        self.a1.len() + self.a2.len() + self.r.len() + self.i.len() + self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Concatenation in the fixed order a1, a2, r, i, c.
    pub fn to_dense(&self) -> Vec<f64> {
        self.a1
            .iter()
            .chain(&self.a2)
            .chain(&self.r)
            .chain(&self.i)
            .chain(&self.c)
            .map(|&b| f64::from(b))
            .collect()
    }

    /// One-line debug dump, e.g. `a1=10000000000 a2=000000000000 r=0100 i=000 c=100`.
    pub fn dump(&self) -> String {
        self.to_string()
    }
}

fn bits(v: &[u8]) -> String {
    v.iter().map(|b| if *b == 0 { '0' } else { '1' }).collect()
}

impl fmt::Display for FeatureVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "a1={} a2={} r={} i={} c={}",
            bits(&self.a1),
            bits(&self.a2),
            bits(&self.r),
            bits(&self.i),
            bits(&self.c)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractorState {
    pub current_requests: Vec<u8>,
    pub initial_requests: Vec<u8>,
    pub accepted_venue: Option<String>,
}

pub fn init_state(goal: &Goal, ontology: &Ontology) -> ExtractorState {
    let r: Vec<u8> = ontology
        .requestable()
        .iter()
        .map(|slot| u8::from(goal.requests.contains(slot)))
        .collect();
    ExtractorState {
        current_requests: r.clone(),
        initial_requests: r,
        accepted_venue: None,
    }
}

const GROUP_REQUEST: usize = 0;
const GROUP_SELECT: usize = 1;
const GROUP_INFORM: usize = 2;
const GROUP_EXPL_CONF: usize = 3;

/// Computes the feature vector for one system turn and the next extractor state.
pub fn extract(
    state: &ExtractorState,
    acts: &[SystemAct],
    goal: &Goal,
    ontology: &Ontology,
) -> Result<(FeatureVector, ExtractorState)> {
    let layout = FeatureLayout::new(ontology);
    let n_inf = layout.n_informable;
    let mut fv = FeatureVector::zeros(&layout);
    let mut next = state.clone();

    for act in acts {
        for sv in &act.slots {
            let known = sv.slot == "name"
                || ontology.informable_index(&sv.slot).is_some()
                || ontology.requestable_index(&sv.slot).is_some();
            if !known {
                return Err(Error::UnknownSlot(sv.slot.clone()));
            }
        }
        fv.a1[act.kind.index()] = 1;

        match act.kind {
            SystemActType::Request | SystemActType::Select => {
                let group = if act.kind == SystemActType::Request { GROUP_REQUEST } else { GROUP_SELECT };
                for sv in &act.slots {
                    if let Some(k) = ontology.informable_index(&sv.slot) {
                        fv.a2[group * n_inf + k] = 1;
                    }
                }
            }
            SystemActType::Inform | SystemActType::ExplConf => {
                let group = if act.kind == SystemActType::Inform { GROUP_INFORM } else { GROUP_EXPL_CONF };
                for (slot, value) in act.pairs() {
                    if let (Some(k), Some(wanted)) = (ontology.informable_index(slot), goal.constraints.get(slot)) {
                        if wanted == value {
                            fv.a2[group * n_inf + k] = 1;
                        }
                    }
                }
            }
            _ => {}
        }

        if matches!(act.kind, SystemActType::Inform | SystemActType::ExplConf | SystemActType::ImplConf) {
            for (slot, value) in act.pairs() {
                if let (Some(k), Some(wanted)) = (ontology.informable_index(slot), goal.constraints.get(slot)) {
                    if wanted != value {
                        fv.i[k] = 1;
                    }
                }
            }
        }

        if matches!(act.kind, SystemActType::Offer | SystemActType::Inform) {
            if let Some(name) = act.value_of("name") {
                if next.accepted_venue.as_deref() != Some(name) {
                    next.current_requests = next.initial_requests.clone();
                    next.accepted_venue = Some(name.to_string());
                }
            }
            for (slot, _) in act.pairs() {
                if let Some(k) = ontology.requestable_index(slot) {
                    next.current_requests[k] = 0;
                }
            }
        }
    }

    fv.r = next.current_requests.clone();
    for (k, slot) in ontology.informable().iter().enumerate() {
        fv.c[k] = u8::from(goal.constraints.contains_key(&slot.name));
    }
    Ok((fv, next))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::Constraints;
    use crate::testutil::toy_ontology;

    fn goal(c: &[(&str, &str)], r: &[&str]) -> Goal {
        Goal::new(
            c.iter().map(|(s, v)| (s.to_string(), v.to_string())).collect::<Constraints>(),
            r.iter().map(|s| s.to_string()).collect(),
        )
    }

    #[test]
    fn initial_request_vectors() {
        let o = toy_ontology();
        assert_eq!(init_state(&goal(&[("food", "spanish")], &["phone"]), &o).current_requests, vec![0, 1, 0, 0]);
        assert_eq!(
            init_state(&goal(&[("food", "spanish")], &["name", "phone", "addr", "postcode"]), &o).current_requests,
            vec![1, 1, 1, 1]
        );
        assert_eq!(init_state(&goal(&[("food", "spanish")], &["addr", "postcode"]), &o).initial_requests, vec![0, 0, 1, 1]);
    }

    #[test]
    fn welcome_turn() {
        let o = toy_ontology();
        let g = goal(&[("food", "spanish")], &["phone"]);
        let (fv, _) = extract(&init_state(&g, &o), &[SystemAct::welcome()], &g, &o).unwrap();
        assert_eq!(fv.dump(), "a1=10000000000 a2=000000000000 r=0100 i=000 c=100");
    }

    #[test]
    fn wrong_inform_raises_inconsistency_and_resets_requests() {
        let o = toy_ontology();
        let g = goal(&[("food", "spanish")], &["phone", "addr"]);
        let mut st = init_state(&g, &o);
        st.current_requests = vec![0, 0, 1, 0];
        st.accepted_venue = Some("the red lion".into());
        let act = SystemAct::inform(&[("name", "rice boat"), ("food", "chinese")]);
        let (fv, next) = extract(&st, &[act], &g, &o).unwrap();
        assert_eq!(fv.i, vec![1, 0, 0]);
        assert_eq!(fv.a2[8..12], [0, 0, 0, 0]);
        // reset to initial, then `name` counts as informed
        assert_eq!(fv.r, vec![0, 1, 1, 0]);
        assert_eq!(next.accepted_venue.as_deref(), Some("rice boat"));
    }

    #[test]
    fn request_sets_a2_request_group() {
        let o = toy_ontology();
        let g = goal(&[("food", "spanish")], &["phone"]);
        let st = init_state(&g, &o);
        let (fv, next) = extract(&st, &[SystemAct::request("area")], &g, &o).unwrap();
        assert_eq!(fv.a1[SystemActType::Request.index()], 1);
        assert_eq!(fv.a2, vec![0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(fv.i, vec![0, 0, 0]);
        assert_eq!(next, st);
    }

    #[test]
    fn unknown_slot_is_an_error() {
        let o = toy_ontology();
        let g = goal(&[("food", "spanish")], &["phone"]);
        let act = SystemAct::request("colour");
        assert!(extract(&init_state(&g, &o), &[act], &g, &o).is_err());
    }

    #[test]
    fn layout_lengths() {
        let o = toy_ontology();
        let l = FeatureLayout::new(&o);
        assert_eq!(l.len(), 11 + 12 + 4 + 3 + 3);
        assert_eq!(FeatureVector::zeros(&l).len(), l.len());
    }
}
