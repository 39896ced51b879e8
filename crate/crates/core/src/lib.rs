//! Reverse dictionary built on three sentence encoders.
//!
//! A definition is encoded into a sentence vector by an LSTM, a recursive
//! network with one shared composition matrix, or a recursive network with
//! per-POS matrices and learned scalar gates. The vector is scored against
//! every word embedding and trained with a full-vocabulary sigmoid
//! cross-entropy. Learned encoders can then be reused for binary sentence
//! classification.

pub mod data;
pub mod encoders;
pub mod harness;
pub mod model;
pub mod objective;
pub mod tree;
pub mod vocab;

pub use rd_autodiff as autodiff;

pub use model::{Model, ModelConfig, ModelKind};
pub use tree::{ParseTree, TreeNode};
pub use vocab::{Vocab, PAD, UNK};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Tensor(#[from] rd_autodiff::Error),
    #[error("cannot access {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("i/o error: {0}")]
    Stream(#[from] std::io::Error),
    #[error("format error: {0}")]
    Format(String),
    #[error("structural error: {0}")]
    Structure(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("incompatible checkpoint: file has version {found}, this build reads version {expected}")]
    Incompatible { found: u32, expected: u32 },
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
