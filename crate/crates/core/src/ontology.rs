//! Ontology and venue database.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

/// Distinguished value accepted for every informable slot.
pub const DONTCARE: &str = "dontcare";

/// Slot → value assignment over informable slots.
pub type Constraints = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InformableSlot {
    pub name: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Venue {
    pub name: String,
    /// Value per informable slot, in ontology slot order.
    pub informable: Vec<String>,
    /// Value per requestable slot, in ontology slot order.
    pub requestable: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ontology {
    informable: Vec<InformableSlot>,
    requestable: Vec<String>,
    venues: Vec<Venue>,
}

/// On-disk schema. `informable` keeps document order and duplicates so that
/// duplicate slots can be reported instead of silently merged.
#[derive(Deserialize)]
struct OntologyDoc {
    informable: OrderedSlots,
    requestable: Vec<String>,
    #[serde(default)]
    venues: Vec<BTreeMap<String, String>>,
}

struct OrderedSlots(Vec<(String, Vec<String>)>);

impl<'de> Deserialize<'de> for OrderedSlots {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct SlotsVisitor;
        impl<'de> Visitor<'de> for SlotsVisitor {
            type Value = OrderedSlots;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object mapping slot names to value arrays")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, Vec<String>>()? {
                    out.push((k, v));
                }
                Ok(OrderedSlots(out))
            }
        }
        deserializer.deserialize_map(SlotsVisitor)
    }
}

impl Ontology {
    pub fn new(
        informable: Vec<InformableSlot>,
        requestable: Vec<String>,
        venues: Vec<Venue>,
    ) -> Result<Self> {
        if informable.is_empty() {
            return Err(Error::NoInformableSlots);
        }
        // a slot may be both informable and requestable (DSTC2 lets users ask for the area),
        // so uniqueness is checked per list
        let mut inf_seen = HashSet::new();
        for slot in &informable {
            if !inf_seen.insert(slot.name.as_str()) {
                return Err(Error::DuplicateSlot(slot.name.clone()));
            }
            if slot.values.is_empty() {
                return Err(Error::EmptyValueList(slot.name.clone()));
            }
        }
        let mut req_seen = HashSet::new();
        for r in &requestable {
            if !req_seen.insert(r.as_str()) {
                return Err(Error::DuplicateSlot(r.clone()));
            }
        }
        for v in &venues {
            if v.informable.len() != informable.len() || v.requestable.len() != requestable.len() {
                return Err(Error::parse("venue", format!("venue `{}` has the wrong number of fields", v.name)));
            }
            for (slot, value) in informable.iter().zip(&v.informable) {
                if !slot.values.contains(value) {
                    return Err(Error::UnknownValue {
                        slot: slot.name.clone(),
                        value: value.clone(),
                    });
                }
            }
        }
        Ok(Self {
            informable,
            requestable,
            venues,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: OntologyDoc = serde_json::from_str(text).map_err(|e| Error::parse("ontology", e))?;
        let informable: Vec<InformableSlot> = doc
            .informable
            .0
            .into_iter()
            .map(|(name, values)| InformableSlot { name, values })
            .collect();
        let mut venues = Vec::with_capacity(doc.venues.len());
        for fields in doc.venues {
            let name = fields
                .get("name")
                .cloned()
                .ok_or_else(|| Error::parse("venue", "venue without `name`"))?;
            let mut inf = Vec::with_capacity(informable.len());
            for slot in &informable {
                let value = fields.get(&slot.name).ok_or_else(|| {
                    Error::parse("venue", format!("venue `{name}` has no value for `{}`", slot.name))
                })?;
                inf.push(value.clone());
            }
            let mut req = Vec::with_capacity(doc.requestable.len());
            for slot in &doc.requestable {
                let value = fields.get(slot).ok_or_else(|| {
                    Error::parse("venue", format!("venue `{name}` has no value for `{slot}`"))
                })?;
                req.push(value.clone());
            }
            venues.push(Venue {
                name,
                informable: inf,
                requestable: req,
            });
        }
        Self::new(informable, doc.requestable, venues)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Serializes back to the document schema.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n  \"informable\": {\n");
        for (i, slot) in self.informable.iter().enumerate() {
            out.push_str(&format!(
                "    {}: {}{}\n",
                serde_json::to_string(&slot.name).unwrap(),
                serde_json::to_string(&slot.values).unwrap(),
                if i + 1 < self.informable.len() { "," } else { "" }
            ));
        }
        out.push_str("  },\n");
        out.push_str(&format!("  \"requestable\": {},\n", serde_json::to_string(&self.requestable).unwrap()));
        out.push_str("  \"venues\": [\n");
        for (i, v) in self.venues.iter().enumerate() {
            let mut fields = BTreeMap::new();
            fields.insert("name".to_string(), v.name.clone());
            for (slot, value) in self.informable.iter().zip(&v.informable) {
                fields.insert(slot.name.clone(), value.clone());
            }
            for (slot, value) in self.requestable.iter().zip(&v.requestable) {
                fields.insert(slot.clone(), value.clone());
            }
            out.push_str(&format!(
                "    {}{}\n",
                serde_json::to_string(&fields).unwrap(),
                if i + 1 < self.venues.len() { "," } else { "" }
            ));
        }
        out.push_str("  ]\n}\n");
        out
    }

    pub fn informable(&self) -> &[InformableSlot] {
        &self.informable
    }

    pub fn requestable(&self) -> &[String] {
        &self.requestable
    }

    pub fn venues(&self) -> &[Venue] {
        &self.venues
    }

    pub fn n_informable(&self) -> usize {
        self.informable.len()
    }

    pub fn n_requestable(&self) -> usize {
        self.requestable.len()
    }

    pub fn informable_index(&self, slot: &str) -> Option<usize> {
        self.informable.iter().position(|s| s.name == slot)
    }

    pub fn requestable_index(&self, slot: &str) -> Option<usize> {
        self.requestable.iter().position(|s| s == slot)
    }

    pub fn values(&self, slot: &str) -> Option<&[String]> {
        self.informable_index(slot).map(|i| self.informable[i].values.as_slice())
    }

    pub fn is_valid_value(&self, slot: &str, value: &str) -> bool {
        value == DONTCARE || self.values(slot).is_some_and(|vs| vs.iter().any(|v| v == value))
    }

    pub fn venue(&self, name: &str) -> Option<&Venue> {
        self.venues.iter().find(|v| v.name == name)
    }

    /// Value of any slot (informable, requestable or `name`) for a venue.
    pub fn venue_value<'a>(&self, venue: &'a Venue, slot: &str) -> Option<&'a str> {
        if slot == "name" {
            return Some(&venue.name);
        }
        if let Some(i) = self.requestable_index(slot) {
            return Some(&venue.requestable[i]);
        }
        self.informable_index(slot).map(|i| venue.informable[i].as_str())
    }

    pub fn venue_matches(&self, venue: &Venue, constraints: &Constraints) -> Result<bool> {
        for (slot, value) in constraints {
            let i = self
                .informable_index(slot)
                .ok_or_else(|| Error::UnknownSlot(slot.clone()))?;
            if value != DONTCARE && venue.informable[i] != *value {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Venues satisfying every constraint, in database order.
    pub fn query_venues(&self, constraints: &Constraints) -> Result<Vec<&Venue>> {
        let mut idx = Vec::with_capacity(constraints.len());
        for (slot, value) in constraints {
            let i = self
                .informable_index(slot)
                .ok_or_else(|| Error::UnknownSlot(slot.clone()))?;
            if value != DONTCARE {
                idx.push((i, value.as_str()));
            }
        }
        Ok(self
            .venues
            .iter()
            .filter(|v| idx.iter().all(|&(i, value)| v.informable[i] == value))
            .collect())
    }

    /// Every `(slot, value)` pair of the informable value lists, in order.
    pub fn all_values(&self) -> impl Iterator<Item = (&str, &str)> {
        self.informable
            .iter()
            .flat_map(|s| s.values.iter().map(move |v| (s.name.as_str(), v.as_str())))
    }
}
