//! Template surface realisation.
//!
//! System acts are rendered for human users of the live service. User acts
//! are rendered when synthesising a text corpus from agenda-based users and
//! as the fallback sentence of the neural simulator.

use rand::Rng;

use crate::acts::{SystemAct, SystemActType, UserAct, UserActType};
use crate::error::{Error, Result};
use crate::ontology::DONTCARE;

fn slot_phrase(slot: &str) -> &str {
    match slot {
        "food" => "food",
        "area" => "part of town",
        "pricerange" => "price range",
        "addr" => "address",
        "postcode" => "post code",
        "phone" => "phone number",
        other => other,
    }
}

fn describe_pair(slot: &str, value: &str) -> String {
    if value == DONTCARE {
        return format!("any {}", slot_phrase(slot));
    }
    match slot {
        "food" => format!("serving {value} food"),
        "area" => format!("in the {value} part of town"),
        "pricerange" => format!("in the {value} price range"),
        "name" => format!("called {value}"),
        other => format!("with {} {value}", slot_phrase(other)),
    }
}

fn inform_clause(slot: &str, value: &str) -> String {
    match slot {
        "food" => format!("it serves {value} food"),
        "area" => format!("it is in the {value} part of town"),
        "pricerange" => format!("it is in the {value} price range"),
        "phone" => format!("the phone number is {value}"),
        "addr" => format!("the address is {value}"),
        "postcode" => format!("the post code is {value}"),
        other => format!("the {} is {value}", slot_phrase(other)),
    }
}

fn render_system_act(act: &SystemAct) -> Result<String> {
    use SystemActType::*;
    let missing = || Error::MissingTemplate(act.to_string());
    let text = match act.kind {
        Welcomemsg => "hello , welcome to the restaurant system . how may i help you ?".to_string(),
        Request => {
            let slot = act.slots.first().ok_or_else(missing)?.slot.as_str();
            match slot {
                "food" => "what kind of food would you like?".to_string(),
                "area" => "what part of town do you have in mind?".to_string(),
                "pricerange" => "what price range would you like?".to_string(),
                other => format!("what {} would you like?", slot_phrase(other)),
            }
        }
        Select => {
            let first = act.slots.first().ok_or_else(missing)?;
            let values: Vec<&str> = act.slots.iter().filter_map(|sv| sv.value.as_deref()).collect();
            if values.is_empty() {
                format!("which {} would you like?", slot_phrase(&first.slot))
            } else {
                format!("would you like {} ?", values.join(" or "))
            }
        }
        Inform | Offer => {
            let mut parts = Vec::new();
            let name = act.value_of("name");
            if let Some(name) = name {
                parts.push(if act.kind == Offer {
                    format!("{name} is a nice place")
                } else {
                    format!("{name} is the place")
                });
            }
            for (slot, value) in act.pairs().filter(|(s, _)| *s != "name") {
                parts.push(inform_clause(slot, value));
            }
            if parts.is_empty() {
                return Err(missing());
            }
            format!("{} .", parts.join(" , "))
        }
        ExplConf => {
            let pairs: Vec<String> = act.pairs().map(|(s, v)| describe_pair(s, v)).collect();
            if pairs.is_empty() {
                return Err(missing());
            }
            format!("you are looking for a restaurant {} , is that right?", pairs.join(" "))
        }
        ImplConf => {
            let pairs: Vec<String> = act.pairs().map(|(s, v)| describe_pair(s, v)).collect();
            if pairs.is_empty() {
                return Err(missing());
            }
            format!("ok , a restaurant {} .", pairs.join(" "))
        }
        Canthelp => {
            let pairs: Vec<String> = act.pairs().map(|(s, v)| describe_pair(s, v)).collect();
            if pairs.is_empty() {
                return Err(missing());
            }
            format!("i am sorry but there is no restaurant {} .", pairs.join(" "))
        }
        Reqmore => "can i help you with something more?".to_string(),
        Bye => "the dialogue is now over . have a nice day .".to_string(),
        Repeat => "could you please repeat that?".to_string(),
    };
    Ok(text)
}

/// Deterministic English rendering of a system turn.
pub fn render_system_acts(acts: &[SystemAct]) -> Result<String> {
    let parts = acts.iter().map(render_system_act).collect::<Result<Vec<_>>>()?;
    Ok(parts.join(" "))
}

fn user_variants(act: &UserAct) -> Vec<String> {
    use UserActType::*;
    let owned = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    match act.kind {
        Inform => {
            let Some((slot, value)) = act.pairs().next() else {
                return vec![String::new()];
            };
            if value == DONTCARE {
                return match slot {
                    "food" => owned(&["any kind of food", "i dont care about the food", "any food"]),
                    "area" => owned(&["any area", "any part of town", "i dont care about the area"]),
                    "pricerange" => owned(&["any price range", "i dont care about the price range", "any price"]),
                    other => vec![format!("any {}", slot_phrase(other))],
                };
            }
            match slot {
                "food" => vec![
                    format!("i want {value} food"),
                    format!("im looking for {value} food"),
                    format!("{value} food"),
                    format!("how about {value} food"),
                ],
                "area" => vec![
                    format!("in the {value}"),
                    format!("in the {value} part of town"),
                    format!("{value} part of town"),
                    format!("the {value} area"),
                ],
                "pricerange" => vec![
                    format!("a {value} restaurant"),
                    format!("{value}"),
                    format!("in the {value} price range"),
                    format!("something {value}"),
                ],
                other => vec![format!("{value} {}", slot_phrase(other))],
            }
        }
        Request => {
            let slot = act.requested_slot().unwrap_or("name");
            match slot {
                "phone" => owned(&["whats the phone number", "can i have the phone number", "phone number please"]),
                "addr" => owned(&["whats the address", "can i get the address", "address please"]),
                "postcode" => owned(&["whats the post code", "and the postcode", "post code please"]),
                "name" => owned(&["whats the name", "whats it called"]),
                other => vec![format!("whats the {}", slot_phrase(other))],
            }
        }
        Negate => owned(&["no"]),
        Affirm => owned(&["yes", "yeah"]),
        Reqalts => owned(&["is there anything else", "anything else", "something else please"]),
        Thankyou => owned(&["thank you", "thanks"]),
        Bye => owned(&["good bye", "bye"]),
        Null => owned(&["um", "hmm"]),
    }
}

/// Renders user acts to text, picking template variants with `rng`.
pub fn render_user_acts<R: Rng + ?Sized>(acts: &[UserAct], rng: &mut R) -> String {
    let parts: Vec<String> = acts
        .iter()
        .map(|a| {
            let variants = user_variants(a);
            let k = rng.random_range(0..variants.len());
            variants[k].clone()
        })
        .collect();
    parts.join(" and ")
}

/// Renders user acts with the first variant of each template.
pub fn render_user_acts_canonical(acts: &[UserAct]) -> String {
    acts.iter()
        .map(|a| user_variants(a).swap_remove(0))
        .collect::<Vec<_>>()
        .join(" and ")
}

/// Number of template variants for an act (for exhaustive tests).
pub fn user_variant_count(act: &UserAct) -> usize {
    user_variants(act).len()
}

/// Renders a single act with a chosen variant index.
pub fn render_user_act_variant(act: &UserAct, variant: usize) -> String {
    let mut v = user_variants(act);
    v.swap_remove(variant % v.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acts::SlotValue;
    use crate::decoder::SemanticDecoder;
    use crate::testutil::toy_ontology;

    #[test]
    fn request_food_template() {
        assert_eq!(render_system_acts(&[SystemAct::request("food")]).unwrap(), "what kind of food would you like?");
    }

    #[test]
    fn offer_mentions_name_and_value() {
        let act = SystemAct::new(
            SystemActType::Offer,
            vec![SlotValue::pair("name", "pipasha"), SlotValue::pair("food", "spanish")],
        );
        let text = render_system_acts(&[act]).unwrap();
        assert!(text.contains("pipasha") && text.contains("spanish"));
    }

    #[test]
    fn canthelp_has_values_and_negation() {
        let act: SystemAct = "canthelp(food=eritrean,area=south)".parse().unwrap();
        let text = render_system_acts(&[act]).unwrap();
        assert!(text.contains("eritrean") && text.contains("south") && text.contains("no restaurant"));
    }

    #[test]
    fn valueless_system_acts_do_not_trigger_user_rules() {
        let o = toy_ontology();
        let dec = SemanticDecoder::with_default_rules(&o).unwrap();
        let mut acts = vec![
            SystemAct::welcome(),
            SystemAct::bare(SystemActType::Reqmore),
            SystemAct::bare(SystemActType::Bye),
            SystemAct::bare(SystemActType::Repeat),
        ];
        for s in o.informable() {
            acts.push(SystemAct::request(&s.name));
            acts.push(SystemAct::new(SystemActType::Select, vec![SlotValue::slot(&s.name)]));
        }
        for act in acts {
            let text = render_system_acts(std::slice::from_ref(&act)).unwrap();
            assert_eq!(dec.parse(&text), vec![UserAct::null()], "{act} -> {text}");
        }
    }

    #[test]
    fn missing_payload_is_an_error() {
        let bad = SystemAct::bare(SystemActType::Request);
        assert!(matches!(render_system_acts(&[bad]), Err(Error::MissingTemplate(_))));
    }
}
