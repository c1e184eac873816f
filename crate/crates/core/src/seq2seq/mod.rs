//! From-scratch sequence-to-sequence user model.

pub mod adam;
pub mod checkpoint;
pub mod generate;
pub mod lstm;
pub mod model;
pub mod tensor;
pub mod train;
pub mod vocab;

pub use checkpoint::Checkpoint;
pub use generate::{beam_search, generate_beam_sample, greedy_decode, ArgmaxPicker, Generation, SamplingPicker, TokenPicker};
pub use lstm::{Lstm, LstmState};
pub use model::{Example, ModelDims, Params, Seq2Seq};
pub use train::{train, EpochLoss, TrainConfig, TrainReport};
pub use vocab::{Vocab, EOS, SOS, UNK};
