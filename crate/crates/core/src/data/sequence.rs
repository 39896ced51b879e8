use crate::vocab::PAD;

/// Default fixed length for LSTM inputs.
pub const MAX_SEQ_LEN: usize = 66;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaddedSequence {
    pub ids: Vec<usize>,
    /// Number of leading real tokens.
    pub len: usize,
    pub truncated: bool,
}

/// Right-pads with `PAD` to `max_len`, or keeps the first `max_len` ids.
pub fn pad_sequence(ids: &[usize], max_len: usize) -> PaddedSequence {
    let len = ids.len().min(max_len);
    let mut out = ids[..len].to_vec();
    out.resize(max_len, PAD);
    PaddedSequence { ids: out, len, truncated: ids.len() > max_len }
}
