//! Sentence encoders. Each maps a definition to a `[1, d]` row on the
//! session's tape.

pub mod embedding;
pub mod lstm;
pub mod tree_gated;
pub mod tree_shared;

pub use embedding::EmbeddingTable;
pub use lstm::{encode_lstm, encode_lstm_batch, lstm_cell, LstmLayer, LstmParams, LstmState};
pub use tree_gated::{encode_tree_gated, encode_tree_gated_with, gate_weight, GateMode, GatedTreeParams};
pub use tree_shared::{encode_tree_shared, SharedTreeParams};

/// Default uniform initialization half-width.
pub const INIT_SCALE: f64 = 0.08;
