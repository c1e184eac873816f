//! Rule-based semantic decoder for user utterances.
//!
//! Two rule sources feed one matcher: value rules generated from the
//! ontology (`north american` → `inform(food=north american)`) and phrase
//! rules loaded from a `pattern TAB act` file. Overlapping matches are
//! resolved longest-first; surviving acts are returned in text order.

use std::path::Path;

use regex::Regex;

use crate::acts::{UserAct, UserActType};
use crate::error::{Error, Result};
use crate::ontology::Ontology;

pub const DEFAULT_RULES: &str = include_str!("../../../data/rules.tsv");

#[derive(Debug, Clone)]
struct Rule {
    pattern: Regex,
    act: UserAct,
}

#[derive(Debug, Clone)]
pub struct SemanticDecoder {
    rules: Vec<Rule>,
}

/// Lower-cases, drops apostrophes and turns other punctuation into spaces.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        if ch == '\'' || ch == '’' {
            continue;
        }
        if ch.is_alphanumeric() || ch == '<' || ch == '>' || ch == '_' {
            out.extend(ch.to_lowercase());
        } else {
            out.push(' ');
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

impl SemanticDecoder {
    pub fn new(ontology: &Ontology, rules_text: &str) -> Result<Self> {
        let mut rules = Vec::new();
        for (slot, value) in ontology.all_values() {
            let pattern = Regex::new(&format!(r"\b{}\b", regex::escape(value)))
                .map_err(|e| Error::parse("value rule", e))?;
            rules.push(Rule {
                pattern,
                act: UserAct::inform(slot, value),
            });
        }
        for (lineno, line) in rules_text.lines().enumerate() {
            let line = line.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (pattern, act) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse("rule file", format!("line {}: expected `pattern<TAB>act`", lineno + 1)))?;
            let act: UserAct = act.trim().parse()?;
            for (slot, value) in act.pairs() {
                if !ontology.is_valid_value(slot, value) {
                    return Err(Error::UnknownValue {
                        slot: slot.to_string(),
                        value: value.to_string(),
                    });
                }
            }
            if let Some(slot) = act.requested_slot() {
                if ontology.requestable_index(slot).is_none() {
                    return Err(Error::UnknownSlot(slot.to_string()));
                }
            }
            let pattern = Regex::new(pattern)
                .map_err(|e| Error::parse("rule file", format!("line {}: {e}", lineno + 1)))?;
            rules.push(Rule { pattern, act });
        }
        Ok(Self { rules })
    }

    pub fn with_default_rules(ontology: &Ontology) -> Result<Self> {
        Self::new(ontology, DEFAULT_RULES)
    }

    pub fn from_file(ontology: &Ontology, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::new(ontology, &text)
    }

    /// Decodes an utterance into acts; never fails, falling back to `null`.
    pub fn parse(&self, text: &str) -> Vec<UserAct> {
        let text = normalize(text);
        let mut candidates: Vec<(usize, usize, usize)> = Vec::new();
        for (ri, rule) in self.rules.iter().enumerate() {
            for m in rule.pattern.find_iter(&text) {
                candidates.push((m.start(), m.end(), ri));
            }
        }
        // longest first, then leftmost, then rule order
        candidates.sort_by(|a, b| (b.1 - b.0).cmp(&(a.1 - a.0)).then(a.0.cmp(&b.0)).then(a.2.cmp(&b.2)));
        let mut taken: Vec<(usize, usize, usize)> = Vec::new();
        for c in candidates {
            if taken.iter().all(|t| c.1 <= t.0 || c.0 >= t.1) {
                taken.push(c);
            }
        }
        taken.sort_by_key(|t| (t.0, t.2));
        let mut acts: Vec<UserAct> = Vec::new();
        for (_, _, ri) in taken {
            let act = &self.rules[ri].act;
            if !acts.contains(act) {
                acts.push(act.clone());
            }
        }
        if acts.is_empty() {
            acts.push(UserAct::bare(UserActType::Null));
        }
        acts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::toy_ontology;

    fn decoder() -> SemanticDecoder {
        SemanticDecoder::with_default_rules(&toy_ontology()).unwrap()
    }

    #[test]
    fn informs_in_text_order() {
        let acts = decoder().parse("im looking for a cheap restaurant in the north");
        assert_eq!(acts, vec![UserAct::inform("pricerange", "cheap"), UserAct::inform("area", "north")]);
    }

    #[test]
    fn request_phone() {
        assert_eq!(decoder().parse("whats the phone number"), vec![UserAct::request("phone")]);
    }

    #[test]
    fn unmatched_is_null() {
        assert_eq!(decoder().parse("blorp"), vec![UserAct::null()]);
    }

    #[test]
    fn longest_value_wins() {
        let acts = decoder().parse("north american food please");
        assert_eq!(acts, vec![UserAct::inform("food", "north american")]);
    }

    #[test]
    fn dontcare_phrases() {
        assert_eq!(decoder().parse("any area is fine"), vec![UserAct::inform("area", "dontcare")]);
        assert_eq!(decoder().parse("i dont care about the price range"), vec![UserAct::inform("pricerange", "dontcare")]);
    }

    #[test]
    fn normalization_strips_punctuation() {
        assert_eq!(normalize("What's the Phone-number?"), "whats the phone number");
    }

    #[test]
    fn bad_rule_line_is_reported() {
        let o = toy_ontology();
        assert!(SemanticDecoder::new(&o, "no tab here").is_err());
        assert!(SemanticDecoder::new(&o, "x\tinform(colour=red)").is_err());
    }
}
