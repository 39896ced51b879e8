//! Named parameter storage and per-forward-pass binding onto a tape.

use std::collections::HashMap;

use rand::Rng;

use crate::tape::{Tape, Var};
use crate::tensor::Tensor;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Ordered collection of named trainable tensors.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamStore {
    names: Vec<String>,
    tensors: Vec<Tensor>,
    index: HashMap<String, ParamId>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Tensor) -> Result<ParamId> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(Error::Contract(format!("duplicate parameter {name}")));
        }
        let id = ParamId(self.tensors.len());
        self.index.insert(name.clone(), id);
        self.names.push(name);
        self.tensors.push(value);
        Ok(id)
    }

    /// Inserts a tensor drawn uniformly from `[-scale, scale]`.
    pub fn insert_uniform<R: Rng>(
        &mut self,
        name: impl Into<String>,
        shape: &[usize],
        scale: f64,
        rng: &mut R,
    ) -> Result<ParamId> {
        let n = shape.iter().product();
        let data = (0..n).map(|_| rng.gen_range(-scale..=scale)).collect();
        self.insert(name, Tensor::new(shape.to_vec(), data)?)
    }

    pub fn id(&self, name: &str) -> Result<ParamId> {
        self.index.get(name).copied().ok_or_else(|| Error::Contract(format!("unknown parameter {name}")))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.tensors[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.tensors[id.0]
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.tensors.len()).map(ParamId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &str, &Tensor)> {
        self.names.iter().zip(&self.tensors).enumerate().map(|(i, (n, t))| (ParamId(i), n.as_str(), t))
    }

    /// Total number of scalar parameters.
    pub fn numel(&self) -> usize {
        self.tensors.iter().map(Tensor::numel).sum()
    }
}

/// Gradients aligned with a [`ParamStore`]; `None` for parameters that were
/// not trainable or not used.
#[derive(Clone, Debug)]
pub struct GradStore {
    grads: Vec<Option<Tensor>>,
}

impl GradStore {
    pub fn new(len: usize) -> Self {
        GradStore { grads: vec![None; len] }
    }

    pub fn get(&self, id: ParamId) -> Option<&Tensor> {
        self.grads.get(id.0).and_then(Option::as_ref)
    }

    pub fn get_mut(&mut self, id: ParamId) -> Option<&mut Tensor> {
        self.grads.get_mut(id.0).and_then(Option::as_mut)
    }

    pub fn len(&self) -> usize {
        self.grads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grads.iter().all(Option::is_none)
    }

    pub fn add(&mut self, id: ParamId, g: Tensor) {
        match &mut self.grads[id.0] {
            Some(acc) => acc.add_assign(&g),
            slot @ None => *slot = Some(g),
        }
    }

    /// Accumulates another store elementwise.
    pub fn merge(&mut self, other: GradStore) {
        for (i, g) in other.grads.into_iter().enumerate() {
            if let Some(g) = g {
                self.add(ParamId(i), g);
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for g in self.grads.iter_mut().flatten() {
            g.data_mut().iter_mut().for_each(|v| *v *= s);
        }
    }
}

/// One forward pass: a fresh tape plus lazily bound parameter leaves.
///
/// Each parameter is bound at most once, so its gradient sums every use.
/// Parameters outside `trainable` are bound as constants.
pub struct Session<'p> {
    pub tape: Tape<'p>,
    store: &'p ParamStore,
    bound: Vec<Option<Var>>,
    trainable: Option<&'p [bool]>,
}

impl<'p> Session<'p> {
    pub fn new(store: &'p ParamStore) -> Self {
        Session { tape: Tape::new(), store, bound: vec![None; store.len()], trainable: None }
    }

    /// Session where only parameters with `mask[id] == true` get gradients.
    pub fn with_trainable(store: &'p ParamStore, mask: &'p [bool]) -> Self {
        assert_eq!(mask.len(), store.len(), "trainable mask length");
        Session { tape: Tape::new(), store, bound: vec![None; store.len()], trainable: Some(mask) }
    }

    /// Session with every parameter bound as a constant (inference).
    pub fn frozen(store: &'p ParamStore) -> Self {
        const NONE: &[bool] = &[];
        let mut s = Session::new(store);
        s.trainable = Some(NONE);
        s
    }

    pub fn store(&self) -> &'p ParamStore {
        self.store
    }

    pub fn param(&mut self, id: ParamId) -> Var {
        if let Some(v) = self.bound[id.0] {
            return v;
        }
        let rg = match self.trainable {
            None => true,
            Some(mask) => mask.get(id.0).copied().unwrap_or(false),
        };
        let v = self.tape.leaf(self.store.get(id), rg);
        self.bound[id.0] = Some(v);
        v
    }

    pub fn value(&self, v: Var) -> &Tensor {
        self.tape.value(v)
    }

    /// Back-propagates `loss` and collects gradients for bound trainable
    /// parameters.
    pub fn backward(&self, loss: Var) -> Result<GradStore> {
        let mut grads = self.tape.backward(loss)?;
        let mut out = GradStore::new(self.store.len());
        for (i, v) in self.bound.iter().enumerate() {
            if let Some(v) = v {
                if self.tape.requires_grad(*v) {
                    let g =
                        grads.take(*v).unwrap_or_else(|| Tensor::zeros(self.store.get(ParamId(i)).shape().to_vec()));
                    out.grads[i] = Some(g);
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_bind_once_and_sum_uses() {
        let mut store = ParamStore::new();
        let w = store.insert("w", Tensor::row(&[2.0])).unwrap();
        let mut s = Session::new(&store);
        let a = s.param(w);
        let b = s.param(w);
        assert_eq!(a, b);
        let p = s.tape.hadamard(a, b).unwrap();
        let loss = s.tape.sum(p).unwrap();
        let g = s.backward(loss).unwrap();
        assert_eq!(g.get(w).unwrap().data(), &[4.0]);
    }

    #[test]
    fn frozen_params_get_no_gradient() {
        let mut store = ParamStore::new();
        let w = store.insert("w", Tensor::row(&[2.0])).unwrap();
        let u = store.insert("u", Tensor::row(&[3.0])).unwrap();
        let mask = vec![false, true];
        let mut s = Session::with_trainable(&store, &mask);
        let (a, b) = (s.param(w), s.param(u));
        let p = s.tape.hadamard(a, b).unwrap();
        let loss = s.tape.sum(p).unwrap();
        let g = s.backward(loss).unwrap();
        assert!(g.get(w).is_none());
        assert_eq!(g.get(u).unwrap().data(), &[2.0]);
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut store = ParamStore::new();
        store.insert("w", Tensor::scalar(1.0)).unwrap();
        assert!(store.insert("w", Tensor::scalar(1.0)).is_err());
        assert!(store.id("nope").is_err());
    }
}
