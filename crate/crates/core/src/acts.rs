//! Dialogue-act algebra for both sides of the conversation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ontology::{Constraints, Ontology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemActType {
    Welcomemsg,
    Request,
    Select,
    Inform,
    Offer,
    ExplConf,
    ImplConf,
    Canthelp,
    Reqmore,
    Bye,
    Repeat,
}

impl SystemActType {
    /// Closed, ordered inventory; feature indices depend on this order.
    pub const ALL: [SystemActType; 11] = [
        SystemActType::Welcomemsg,
        SystemActType::Request,
        SystemActType::Select,
        SystemActType::Inform,
        SystemActType::Offer,
        SystemActType::ExplConf,
        SystemActType::ImplConf,
        SystemActType::Canthelp,
        SystemActType::Reqmore,
        SystemActType::Bye,
        SystemActType::Repeat,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            SystemActType::Welcomemsg => "welcomemsg",
            SystemActType::Request => "request",
            SystemActType::Select => "select",
            SystemActType::Inform => "inform",
            SystemActType::Offer => "offer",
            SystemActType::ExplConf => "expl-conf",
            SystemActType::ImplConf => "impl-conf",
            SystemActType::Canthelp => "canthelp",
            SystemActType::Reqmore => "reqmore",
            SystemActType::Bye => "bye",
            SystemActType::Repeat => "repeat",
        }
    }
}

impl FromStr for SystemActType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidAct(format!("unknown system act type `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UserActType {
    Inform,
    Request,
    Negate,
    Affirm,
    Reqalts,
    Thankyou,
    Bye,
    Null,
}

impl UserActType {
    pub const ALL: [UserActType; 8] = [
        UserActType::Inform,
        UserActType::Request,
        UserActType::Negate,
        UserActType::Affirm,
        UserActType::Reqalts,
        UserActType::Thankyou,
        UserActType::Bye,
        UserActType::Null,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            UserActType::Inform => "inform",
            UserActType::Request => "request",
            UserActType::Negate => "negate",
            UserActType::Affirm => "affirm",
            UserActType::Reqalts => "reqalts",
            UserActType::Thankyou => "thankyou",
            UserActType::Bye => "bye",
            UserActType::Null => "null",
        }
    }
}

impl FromStr for UserActType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidAct(format!("unknown user act type `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SlotValue {
    pub slot: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
}

impl SlotValue {
    pub fn pair(slot: impl Into<String>, value: impl Into<String>) -> Self {
        Self {
            slot: slot.into(),
            value: Some(value.into()),
        }
    }

    pub fn slot(slot: impl Into<String>) -> Self {
        Self {
            slot: slot.into(),
            value: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemAct {
    #[serde(rename = "act")]
    pub kind: SystemActType,
    #[serde(default)]
    pub slots: Vec<SlotValue>,
}

impl SystemAct {
    pub fn new(kind: SystemActType, slots: Vec<SlotValue>) -> Self {
        Self { kind, slots }
    }

    pub fn bare(kind: SystemActType) -> Self {
        Self::new(kind, Vec::new())
    }

    pub fn welcome() -> Self {
        Self::bare(SystemActType::Welcomemsg)
    }

    pub fn request(slot: &str) -> Self {
        Self::new(SystemActType::Request, vec![SlotValue::slot(slot)])
    }

    pub fn inform(pairs: &[(&str, &str)]) -> Self {
        Self::new(
            SystemActType::Inform,
            pairs.iter().map(|(s, v)| SlotValue::pair(*s, *v)).collect(),
        )
    }

    pub fn offer(name: &str) -> Self {
        Self::new(SystemActType::Offer, vec![SlotValue::pair("name", name)])
    }

    pub fn canthelp(constraints: &Constraints) -> Self {
        Self::new(
            SystemActType::Canthelp,
            constraints.iter().map(|(s, v)| SlotValue::pair(s, v)).collect(),
        )
    }

    /// Value of a slot carried by this act, if any.
    pub fn value_of(&self, slot: &str) -> Option<&str> {
        self.slots
            .iter()
            .find(|sv| sv.slot == slot)
            .and_then(|sv| sv.value.as_deref())
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.slots
            .iter()
            .filter_map(|sv| sv.value.as_deref().map(|v| (sv.slot.as_str(), v)))
    }

    /// Checks the payload shape and that every slot is known to the ontology.
    pub fn validate(&self, ontology: &Ontology) -> Result<()> {
        use SystemActType::*;
        let known = |s: &str| {
            s == "name"
                || s == "slot"
                || ontology.informable_index(s).is_some()
                || ontology.requestable_index(s).is_some()
        };
        for sv in &self.slots {
            if !known(&sv.slot) {
                return Err(Error::UnknownSlot(sv.slot.clone()));
            }
        }
        match self.kind {
            Request | Select => {
                if self.slots.is_empty() {
                    return Err(Error::InvalidAct(format!("{self} needs a slot")));
                }
            }
            Canthelp | Inform | Offer | ExplConf | ImplConf => {
                if self.slots.is_empty() || self.slots.iter().any(|sv| sv.value.is_none()) {
                    return Err(Error::InvalidAct(format!("{self} needs slot-value pairs")));
                }
            }
            Welcomemsg | Reqmore | Bye | Repeat => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UserAct {
    #[serde(rename = "act")]
    pub kind: UserActType,
    #[serde(default)]
    pub slots: Vec<SlotValue>,
}

impl UserAct {
    pub fn new(kind: UserActType, slots: Vec<SlotValue>) -> Self {
        Self { kind, slots }
    }

    pub fn bare(kind: UserActType) -> Self {
        Self::new(kind, Vec::new())
    }

    pub fn inform(slot: &str, value: &str) -> Self {
        Self::new(UserActType::Inform, vec![SlotValue::pair(slot, value)])
    }

    pub fn request(slot: &str) -> Self {
        Self::new(UserActType::Request, vec![SlotValue::slot(slot)])
    }

    pub fn null() -> Self {
        Self::bare(UserActType::Null)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.slots
            .iter()
            .filter_map(|sv| sv.value.as_deref().map(|v| (sv.slot.as_str(), v)))
    }

    pub fn requested_slot(&self) -> Option<&str> {
        match self.kind {
            UserActType::Request => self.slots.first().map(|sv| sv.slot.as_str()),
            _ => None,
        }
    }
}

fn write_act(f: &mut fmt::Formatter<'_>, name: &str, slots: &[SlotValue]) -> fmt::Result {
    write!(f, "{name}(")?;
    for (i, sv) in slots.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        match &sv.value {
            Some(v) => write!(f, "{}={}", sv.slot, v)?,
            None => f.write_str(&sv.slot)?,
        }
    }
    f.write_str(")")
}

impl fmt::Display for SystemAct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_act(f, self.kind.name(), &self.slots)
    }
}

impl fmt::Display for UserAct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_act(f, self.kind.name(), &self.slots)
    }
}

fn split_act(s: &str) -> Result<(&str, Vec<SlotValue>)> {
    let s = s.trim();
    let (name, rest) = match s.find('(') {
        Some(i) => (&s[..i], &s[i + 1..]),
        None => return Ok((s, Vec::new())),
    };
    let body = rest
        .strip_suffix(')')
        .ok_or_else(|| Error::InvalidAct(format!("unbalanced parentheses in `{s}`")))?;
    let mut slots = Vec::new();
    for part in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('=') {
            Some((k, v)) => slots.push(SlotValue::pair(k.trim(), v.trim())),
            None => slots.push(SlotValue::slot(part)),
        }
    }
    Ok((name.trim(), slots))
}

impl FromStr for SystemAct {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (name, slots) = split_act(s)?;
        Ok(SystemAct::new(name.parse()?, slots))
    }
}

impl FromStr for UserAct {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (name, slots) = split_act(s)?;
        Ok(UserAct::new(name.parse()?, slots))
    }
}

pub fn format_acts<T: fmt::Display>(acts: &[T]) -> String {
    acts.iter().map(ToString::to_string).collect::<Vec<_>>().join("|")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_parse_agree() {
        for s in ["inform(food=north american,area=south)", "request(phone)", "welcomemsg()", "expl-conf(area=north)"] {
            let act: SystemAct = s.parse().unwrap();
            assert_eq!(act.to_string(), s);
        }
        let u: UserAct = "inform(area=dontcare)".parse().unwrap();
        assert_eq!(u, UserAct::inform("area", "dontcare"));
        assert!("frobnicate(x)".parse::<SystemAct>().is_err());
    }

    #[test]
    fn act_inventory_order_is_fixed() {
        assert_eq!(SystemActType::ALL.len(), 11);
        for (i, t) in SystemActType::ALL.iter().enumerate() {
            assert_eq!(t.index(), i);
        }
        assert_eq!(SystemActType::ExplConf.name(), "expl-conf");
    }

    #[test]
    fn serde_uses_act_names() {
        let act = SystemAct::request("food");
        let json = serde_json::to_string(&act).unwrap();
        assert_eq!(json, r#"{"act":"request","slots":[{"slot":"food"}]}"#);
        let back: SystemAct = serde_json::from_str(&json).unwrap();
        assert_eq!(back, act);
    }
}
