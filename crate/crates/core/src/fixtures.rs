//! Bundled ontologies.

use crate::ontology::Ontology;

pub const TOY_ONTOLOGY_JSON: &str = include_str!("../../../data/toy_ontology.json");
pub const DSTC2_SHAPED_ONTOLOGY_JSON: &str = include_str!("../../../data/dstc2_shaped_ontology.json");

/// Three informable slots (food 5, area 3, pricerange 3), four requestables, 30 venues.
pub fn toy_ontology() -> Ontology {
    Ontology::from_json(TOY_ONTOLOGY_JSON).expect("bundled toy ontology is valid")
}

/// DSTC2-sized slot inventory (8 requestables) with a small venue list.
pub fn dstc2_shaped_ontology() -> Ontology {
    Ontology::from_json(DSTC2_SHAPED_ONTOLOGY_JSON).expect("bundled DSTC2-shaped ontology is valid")
}
