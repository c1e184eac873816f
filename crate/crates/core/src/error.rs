use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed document {what}: {message}")]
    Parse { what: String, message: String },
    #[error("duplicate slot `{0}`")]
    DuplicateSlot(String),
    #[error("unknown slot `{0}`")]
    UnknownSlot(String),
    #[error("value `{value}` is not listed for slot `{slot}`")]
    UnknownValue { slot: String, value: String },
    #[error("slot `{0}` has an empty value list")]
    EmptyValueList(String),
    #[error("ontology has no informable slots")]
    NoInformableSlots,
    #[error("unknown dialogue act `{act}` in dialogue {dialogue}")]
    UnknownAct { dialogue: String, act: String },
    #[error("invalid act: {0}")]
    InvalidAct(String),
    #[error("no template for act type `{0}`")]
    MissingTemplate(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty feature history")]
    EmptyHistory,
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("unknown token `{0}`")]
    UnknownToken(String),
    #[error("episode has no steps")]
    IncompleteEpisode,
    #[error("simulator used before reset")]
    NotReset,
    #[error("no trained model available: {0}")]
    MissingModel(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("contract violation at turn {turn}: {message}")]
    Contract { turn: usize, message: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(what: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            what: what.into(),
            message: message.to_string(),
        }
    }
}
