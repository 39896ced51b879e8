//! Stacked LSTM over the reversed definition.
//!
//! Cell, per layer, with `x` the layer input and `h`, `c` the previous
//! state (row-vector convention, so `x·W`):
//!
//! ```text
//! i = σ(x·W_i1 + h·W_i2 + B_i)      f = σ(x·W_f1 + h·W_f2 + B_f)
//! o = σ(x·W_o1 + h·W_o2 + B_o)      g = tanh(x·W_g1 + h·W_g2 + B_g)
//! c' = f⊙c + i⊙g                    h' = o⊙tanh(c')
//! ```
//!
//! The sentence vector is the top layer's `h` after the first token (the
//! last one fed), mapped through the projection `P`.

use rand::Rng;
use rd_autodiff::{Error as TensorError, ParamId, ParamStore, Session, Tensor, Var};

use super::EmbeddingTable;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LstmLayer {
    pub name: String,
    pub input_dim: usize,
    pub hidden: usize,
    pub w_i1: ParamId,
    pub w_i2: ParamId,
    pub w_f1: ParamId,
    pub w_f2: ParamId,
    pub w_o1: ParamId,
    pub w_o2: ParamId,
    pub w_g1: ParamId,
    pub w_g2: ParamId,
    pub b_i: ParamId,
    pub b_f: ParamId,
    pub b_o: ParamId,
    pub b_g: ParamId,
}

const GATES: [&str; 4] = ["i", "f", "o", "g"];

impl LstmLayer {
    pub fn init<R: Rng>(
        store: &mut ParamStore,
        name: &str,
        input_dim: usize,
        hidden: usize,
        scale: f64,
        rng: &mut R,
    ) -> Result<Self> {
        for g in GATES {
            store.insert_uniform(format!("{name}.w_{g}1"), &[input_dim, hidden], scale, rng)?;
            store.insert_uniform(format!("{name}.w_{g}2"), &[hidden, hidden], scale, rng)?;
            store.insert_uniform(format!("{name}.b_{g}"), &[1, hidden], scale, rng)?;
        }
        Self::bind(store, name)
    }

    pub fn bind(store: &ParamStore, name: &str) -> Result<Self> {
        let id = |suffix: &str| store.id(&format!("{name}.{suffix}"));
        let w_i1 = id("w_i1")?;
        let (input_dim, hidden) = store.get(w_i1).dims2()?;
        Ok(LstmLayer {
            name: name.to_string(),
            input_dim,
            hidden,
            w_i1,
            w_i2: id("w_i2")?,
            w_f1: id("w_f1")?,
            w_f2: id("w_f2")?,
            w_o1: id("w_o1")?,
            w_o2: id("w_o2")?,
            w_g1: id("w_g1")?,
            w_g2: id("w_g2")?,
            b_i: id("b_i")?,
            b_f: id("b_f")?,
            b_o: id("b_o")?,
            b_g: id("b_g")?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LstmParams {
    pub layers: Vec<LstmLayer>,
    /// `hidden × out_dim` projection into the word-embedding space.
    pub proj: ParamId,
    pub out_dim: usize,
}

impl LstmParams {
    pub fn init<R: Rng>(
        store: &mut ParamStore,
        input_dim: usize,
        hidden: usize,
        layers: usize,
        out_dim: usize,
        scale: f64,
        rng: &mut R,
    ) -> Result<Self> {
        for l in 0..layers {
            let d = if l == 0 { input_dim } else { hidden };
            LstmLayer::init(store, &format!("lstm.l{}", l + 1), d, hidden, scale, rng)?;
        }
        store.insert_uniform("lstm.proj", &[hidden, out_dim], scale, rng)?;
        Self::bind(store)
    }

    pub fn bind(store: &ParamStore) -> Result<Self> {
        let mut layers = Vec::new();
        while store.contains(&format!("lstm.l{}.w_i1", layers.len() + 1)) {
            layers.push(LstmLayer::bind(store, &format!("lstm.l{}", layers.len() + 1))?);
        }
        if layers.is_empty() {
            return Err(Error::Contract("no LSTM layers in parameter set".into()));
        }
        let proj = store.id("lstm.proj")?;
        let out_dim = store.get(proj).dims2()?.1;
        Ok(LstmParams { layers, proj, out_dim })
    }

    pub fn hidden(&self) -> usize {
        self.layers[0].hidden
    }
}

/// Hidden and cell state for a batch of rows.
#[derive(Clone, Copy, Debug)]
pub struct LstmState {
    pub h: Var,
    pub c: Var,
}

impl LstmState {
    pub fn zeros(s: &mut Session<'_>, rows: usize, hidden: usize) -> Self {
        let h = s.tape.constant(Tensor::zeros(vec![rows, hidden]));
        let c = s.tape.constant(Tensor::zeros(vec![rows, hidden]));
        LstmState { h, c }
    }
}

fn gate(s: &mut Session<'_>, x: Var, h: Var, w1: ParamId, w2: ParamId, b: ParamId) -> Result<Var> {
    let (w1, w2, b) = (s.param(w1), s.param(w2), s.param(b));
    let a = s.tape.matmul(x, w1)?;
    let r = s.tape.matmul(h, w2)?;
    let z = s.tape.add(a, r)?;
    Ok(s.tape.add_bias(z, b)?)
}

/// One LSTM step for every row of `x`.
pub fn lstm_cell(s: &mut Session<'_>, x: Var, state: &LstmState, layer: &LstmLayer) -> Result<LstmState> {
    let xs = s.value(x).shape().to_vec();
    let hs = s.value(state.h).shape().to_vec();
    if xs.len() != 2 || xs[1] != layer.input_dim || hs != [xs[0], layer.hidden] {
        return Err(TensorError::Shape(format!(
            "LSTM layer {}: input {xs:?} / state {hs:?}, expected [_, {}] / [_, {}]",
            layer.name, layer.input_dim, layer.hidden
        ))
        .into());
    }
    let i = gate(s, x, state.h, layer.w_i1, layer.w_i2, layer.b_i)?;
    let i = s.tape.sigmoid(i)?;
    let f = gate(s, x, state.h, layer.w_f1, layer.w_f2, layer.b_f)?;
    let f = s.tape.sigmoid(f)?;
    let o = gate(s, x, state.h, layer.w_o1, layer.w_o2, layer.b_o)?;
    let o = s.tape.sigmoid(o)?;
    let g = gate(s, x, state.h, layer.w_g1, layer.w_g2, layer.b_g)?;
    let g = s.tape.tanh(g)?;
    let fc = s.tape.hadamard(f, state.c)?;
    let ig = s.tape.hadamard(i, g)?;
    let c = s.tape.add(fc, ig)?;
    let tc = s.tape.tanh(c)?;
    let h = s.tape.hadamard(o, tc)?;
    Ok(LstmState { h, c })
}

/// Encodes the first `len` ids of `ids`; anything after is padding and is
/// never run through the cells.
pub fn encode_lstm(
    s: &mut Session<'_>,
    ids: &[usize],
    len: usize,
    emb: &EmbeddingTable,
    params: &LstmParams,
) -> Result<Var> {
    encode_lstm_batch(s, &[(ids, len)], emb, params)
}

/// Batched [`encode_lstm`]; returns `[batch, out_dim]` in input order.
///
/// Rows are sorted by length so that the still-running sequences always form
/// a prefix of the batch; a row's final state is sliced out at the step
/// where it ends.
pub fn encode_lstm_batch(
    s: &mut Session<'_>,
    seqs: &[(&[usize], usize)],
    emb: &EmbeddingTable,
    params: &LstmParams,
) -> Result<Var> {
    if seqs.is_empty() {
        return Err(Error::Contract("empty LSTM batch".into()));
    }
    for (ids, len) in seqs {
        if *len == 0 || *len > ids.len() {
            return Err(Error::Contract(format!("sequence length {len} invalid for {} ids", ids.len())));
        }
    }
    let mut order: Vec<usize> = (0..seqs.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(seqs[i].1));
    let reversed: Vec<Vec<usize>> =
        order.iter().map(|&i| seqs[i].0[..seqs[i].1].iter().rev().copied().collect()).collect();
    let max_len = reversed[0].len();
    let hidden = params.hidden();

    let mut active = reversed.len();
    let mut states: Vec<LstmState> = params.layers.iter().map(|_| LstmState::zeros(s, active, hidden)).collect();
    // (first row, block) of final top-layer states, collected as rows finish
    let mut finished: Vec<Var> = Vec::new();
    for t in 0..max_len {
        let now = reversed.iter().take_while(|r| r.len() > t).count();
        if now < active {
            let top = states.last().expect("at least one layer").h;
            finished.push(s.tape.slice_rows(top, now, active - now)?);
            for st in states.iter_mut() {
                st.h = s.tape.slice_rows(st.h, 0, now)?;
                st.c = s.tape.slice_rows(st.c, 0, now)?;
            }
            active = now;
        }
        let tokens: Vec<usize> = reversed[..active].iter().map(|r| r[t]).collect();
        let mut x = emb.lookup(s, &tokens)?;
        for (layer, st) in params.layers.iter().zip(states.iter_mut()) {
            *st = lstm_cell(s, x, st, layer)?;
            x = st.h;
        }
    }
    finished.push(states.last().expect("at least one layer").h);
    finished.reverse();
    let sorted = if finished.len() == 1 { finished[0] } else { s.tape.concat_rows(&finished)? };

    let mut inverse = vec![0; order.len()];
    for (pos, &orig) in order.iter().enumerate() {
        inverse[orig] = pos;
    }
    let identity = inverse.iter().enumerate().all(|(a, &b)| a == b);
    let finals = if identity { sorted } else { s.tape.gather_rows(sorted, &inverse)? };
    let p = s.param(params.proj);
    Ok(s.tape.matmul(finals, p)?)
}
