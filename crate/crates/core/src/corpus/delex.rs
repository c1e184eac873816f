//! Delexicalisation of user utterances and its inverse.

use regex::Regex;

use crate::decoder::normalize;
use crate::ontology::{Constraints, Ontology, DONTCARE};
use crate::seq2seq::vocab::{EOS, SOS, UNK};

pub const NAME_TOKEN: &str = "<name>";

pub fn value_token(slot: &str) -> String {
    format!("<value_{slot}>")
}

#[derive(Debug, Clone)]
enum Target {
    Value { slot: String, value: String },
    Name,
}

/// Precompiled longest-match replacer for one ontology.
#[derive(Debug, Clone)]
pub struct Delexicalizer {
    patterns: Vec<(Regex, Target)>,
}

impl Delexicalizer {
    pub fn new(ontology: &Ontology) -> Self {
        let mut patterns = Vec::new();
        for (slot, value) in ontology.all_values() {
            patterns.push((
                Regex::new(&format!(r"\b{}\b", regex::escape(value))).expect("escaped value is a valid pattern"),
                Target::Value {
                    slot: slot.to_string(),
                    value: value.to_string(),
                },
            ));
        }
        for venue in ontology.venues() {
            let name = normalize(&venue.name);
            if name.is_empty() {
                continue;
            }
            patterns.push((
                Regex::new(&format!(r"\b{}\b", regex::escape(&name))).expect("escaped name is a valid pattern"),
                Target::Name,
            ));
        }
        Self { patterns }
    }

    /// Replaces the turn goal's values by `<value_SLOT>` and venue names by
    /// `<name>` (longest match first), splits on whitespace and appends `<EOS>`.
    /// Values of the ontology that are not the goal's value stay literal.
    pub fn delexicalize(&self, transcription: &str, goal: &Constraints) -> Vec<String> {
        let text = normalize(transcription);
        let mut spans: Vec<(usize, usize, usize)> = Vec::new();
        for (k, (re, _)) in self.patterns.iter().enumerate() {
            for m in re.find_iter(&text) {
                spans.push((m.start(), m.end(), k));
            }
        }
        spans.sort_by(|a, b| (b.1 - b.0).cmp(&(a.1 - a.0)).then(a.0.cmp(&b.0)).then(a.2.cmp(&b.2)));
        let mut taken: Vec<(usize, usize, usize)> = Vec::new();
        for s in spans {
            if taken.iter().all(|t| s.1 <= t.0 || s.0 >= t.1) {
                taken.push(s);
            }
        }
        taken.sort();
        let mut out = String::with_capacity(text.len());
        let mut pos = 0;
        for (start, end, k) in taken {
            out.push_str(&text[pos..start]);
            match &self.patterns[k].1 {
                Target::Value { slot, value } if goal.get(slot) == Some(value) => out.push_str(&value_token(slot)),
                Target::Value { .. } => out.push_str(&text[start..end]),
                Target::Name => out.push_str(NAME_TOKEN),
            }
            pos = end;
        }
        out.push_str(&text[pos..]);
        let mut tokens: Vec<String> = out.split_whitespace().map(str::to_string).collect();
        tokens.push(EOS.to_string());
        tokens
    }
}

pub fn delexicalize_turn(transcription: &str, turn_goal: &Constraints, ontology: &Ontology) -> Vec<String> {
    Delexicalizer::new(ontology).delexicalize(transcription, turn_goal)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicalized {
    pub text: String,
    /// `<value_SLOT>` tokens whose slot the goal does not constrain.
    pub unconstrained_slots: usize,
    /// `<UNK>`/`<SOS>` tokens dropped from the output.
    pub dropped_specials: usize,
    /// `<name>` tokens dropped for lack of an accepted venue.
    pub dropped_names: usize,
}

/// Inverse of delexicalisation against the current goal.
pub fn lexicalize(tokens: &[String], goal: &Constraints, accepted_venue: Option<&str>) -> Lexicalized {
    let mut out = Lexicalized::default();
    let mut words: Vec<String> = Vec::with_capacity(tokens.len());
    for tok in tokens {
        match tok.as_str() {
            EOS => break,
            SOS | UNK => out.dropped_specials += 1,
            NAME_TOKEN => match accepted_venue {
                Some(name) => words.push(name.to_string()),
                None => out.dropped_names += 1,
            },
            t => match t.strip_prefix("<value_").and_then(|s| s.strip_suffix('>')) {
                Some(slot) => match goal.get(slot) {
                    Some(v) if v != DONTCARE => words.push(v.clone()),
                    _ => {
                        out.unconstrained_slots += 1;
                        words.push("any".to_string());
                    }
                },
                None => words.push(t.to_string()),
            },
        }
    }
    out.text = words.join(" ");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::toy_ontology;

    fn c(pairs: &[(&str, &str)]) -> Constraints {
        pairs.iter().map(|(s, v)| (s.to_string(), v.to_string())).collect()
    }

    fn toks(s: &str) -> Vec<String> {
        s.split(' ').map(str::to_string).collect()
    }

    #[test]
    fn delexicalizes_goal_values() {
        let o = toy_ontology();
        let out = delexicalize_turn("im looking for eritrean food in the south", &c(&[("food", "eritrean"), ("area", "south")]), &o);
        assert_eq!(out, toks("im looking for <value_food> food in the <value_area> <EOS>"));
        let back = lexicalize(&out, &c(&[("food", "eritrean"), ("area", "south")]), None);
        assert_eq!(back.text, "im looking for eritrean food in the south");
    }

    #[test]
    fn no_values() {
        assert_eq!(delexicalize_turn("hello", &Constraints::new(), &toy_ontology()), toks("hello <EOS>"));
    }

    #[test]
    fn longest_match_wins() {
        let o = toy_ontology();
        let out = delexicalize_turn("north american food", &c(&[("food", "north american"), ("area", "north")]), &o);
        assert_eq!(out, toks("<value_food> food <EOS>"));
    }

    #[test]
    fn non_goal_values_stay_literal_and_names_are_tokenized() {
        let o = toy_ontology();
        let out = delexicalize_turn("not chinese , is pipasha spanish", &c(&[("food", "spanish")]), &o);
        assert_eq!(out, toks("not chinese is <name> <value_food> <EOS>"));
    }

    #[test]
    fn lexicalize_rules() {
        let goal = c(&[("food", "spanish")]);
        assert_eq!(lexicalize(&toks("im looking for <value_food> food <EOS>"), &goal, None).text, "im looking for spanish food");
        assert_eq!(lexicalize(&toks("<EOS>"), &goal, None).text, "");
        let l = lexicalize(&toks("in the <value_area> <EOS>"), &goal, None);
        assert_eq!(l.text, "in the any");
        assert_eq!(l.unconstrained_slots, 1);
        let n = lexicalize(&toks("is <name> ok <UNK>"), &goal, Some("pipasha"));
        assert_eq!(n.text, "is pipasha ok");
        assert_eq!(n.dropped_specials, 1);
        assert_eq!(lexicalize(&toks("is <name> ok"), &goal, None).dropped_names, 1);
    }
}
