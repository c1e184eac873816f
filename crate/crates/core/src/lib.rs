//! Dialogue training bench: a neural user simulator learned from a corpus,
//! an agenda-based baseline simulator, reinforcement-learned dialogue
//! policies and cross-model evaluation between them.

pub mod abus;
pub mod acts;
pub mod corpus;
pub mod decoder;
pub mod error;
pub mod features;
pub mod fixtures;
pub mod goal;
pub mod harness;
pub mod nus;
pub mod ontology;
pub mod render;
pub mod rng;
pub mod seq2seq;
pub mod simulator;
pub mod system;

pub use error::{Error, Result};

#[cfg(test)]
pub(crate) mod testutil {
    pub use crate::fixtures::toy_ontology;
}
