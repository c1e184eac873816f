//! Goal-label transformation.
//!
//! Turn-level constraint labels are cumulative: they include what the user
//! will say in the current turn. The transformation walks backwards from
//! the last turn: each turn takes the transformed constraints of the next
//! turn, except that a slot the turn itself holds with a different value
//! keeps that value. A goal then only changes where the user actually
//! changed it, which is what a simulator can replay via `canthelp`.

use log::warn;

use crate::ontology::Constraints;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelWarning {
    /// Turn at which `slot` was present but missing from the next turn.
    pub turn: usize,
    pub slot: String,
}

pub fn transform_goal_labels(per_turn: &[Constraints]) -> Vec<Constraints> {
    transform_goal_labels_checked(per_turn).0
}

/// As [`transform_goal_labels`], also reporting non-cumulative input.
/// Vanishing slots are retained in the output.
pub fn transform_goal_labels_checked(per_turn: &[Constraints]) -> (Vec<Constraints>, Vec<LabelWarning>) {
    let mut warnings = Vec::new();
    let Some(last) = per_turn.last() else {
        return (Vec::new(), warnings);
    };
    let mut out = vec![Constraints::new(); per_turn.len()];
    out[per_turn.len() - 1] = last.clone();
    for t in (0..per_turn.len() - 1).rev() {
        let mut row = out[t + 1].clone();
        for (slot, value) in &per_turn[t] {
            if !per_turn[t + 1].contains_key(slot) {
                warn!("label slot `{slot}` vanishes after turn {t}; retained");
                warnings.push(LabelWarning { turn: t, slot: slot.clone() });
            }
            if row.get(slot) != Some(value) {
                row.insert(slot.clone(), value.clone());
            }
        }
        out[t] = row;
    }
    (out, warnings)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn c(pairs: &[(&str, &str)]) -> Constraints {
        pairs.iter().map(|(s, v)| (s.to_string(), v.to_string())).collect()
    }

    #[test]
    fn single_turn_keeps_constraints() {
        let input = vec![c(&[("food", "thai")])];
        assert_eq!(transform_goal_labels(&input), input);
    }

    #[test]
    fn no_change_copies_final_row() {
        let input = vec![c(&[("area", "north")]), c(&[("area", "north"), ("food", "thai")]), c(&[("area", "north"), ("food", "thai"), ("pricerange", "cheap")])];
        let out = transform_goal_labels(&input);
        assert!(out.iter().all(|row| row == &input[2]));
    }

    #[test]
    fn vanishing_slot_is_retained_and_reported() {
        let input = vec![c(&[("food", "thai"), ("area", "north")]), c(&[("food", "thai")])];
        let (out, warnings) = transform_goal_labels_checked(&input);
        assert_eq!(out[0], c(&[("food", "thai"), ("area", "north")]));
        assert_eq!(warnings, vec![LabelWarning { turn: 0, slot: "area".into() }]);
    }

    #[test]
    fn empty_input() {
        assert!(transform_goal_labels(&[]).is_empty());
    }
}
