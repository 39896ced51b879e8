//! Gated recursive tree network with a composition matrix per POS tag:
//! `f(i) = relu(E_i·W(pos i) + b + Σ_children f(j)·w(j))`, returning
//! `f(root)·w(root)`.
//!
//! The gate `w(j) = tanh(max_k classifier(E_k))` takes the max over node `j`
//! and its immediate real children; `classifier(e) = relu(e·U1 + c1)·u2 + c2`.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::Rng;
use rd_autodiff::{Error as TensorError, ParamId, ParamStore, Session, Tensor, Var};

use super::tree_shared::compose_node;
use super::EmbeddingTable;
use crate::tree::ParseTree;
use crate::{Error, Result};

/// Universal Dependencies UPOS inventory.
pub const UPOS_TAGS: [&str; 17] = [
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM", "PART", "PRON", "PROPN", "PUNCT", "SCONJ",
    "SYM", "VERB", "X",
];

const W_PREFIX: &str = "gated.w.";
const W_FALLBACK: &str = "gated.w_fallback";

#[derive(Debug)]
pub struct GatedTreeParams {
    pub w_by_pos: BTreeMap<String, ParamId>,
    pub fallback: ParamId,
    pub b: ParamId,
    pub u1: ParamId,
    pub c1: ParamId,
    pub u2: ParamId,
    pub c2: ParamId,
    pub dim: usize,
    pub gate_hidden: usize,
    /// Nodes whose tag had no matrix of its own.
    unseen: AtomicUsize,
}

impl Clone for GatedTreeParams {
    fn clone(&self) -> Self {
        GatedTreeParams { w_by_pos: self.w_by_pos.clone(), unseen: AtomicUsize::new(self.unseen_pos()), ..*self }
    }
}

impl GatedTreeParams {
    pub fn init<R: Rng>(
        store: &mut ParamStore,
        tags: &[String],
        dim: usize,
        gate_hidden: usize,
        scale: f64,
        rng: &mut R,
    ) -> Result<Self> {
        for tag in tags {
            store.insert_uniform(format!("{W_PREFIX}{tag}"), &[dim, dim], scale, rng)?;
        }
        store.insert_uniform(W_FALLBACK, &[dim, dim], scale, rng)?;
        store.insert_uniform("gated.b", &[1, dim], scale, rng)?;
        store.insert_uniform("gated.u1", &[dim, gate_hidden], scale, rng)?;
        store.insert_uniform("gated.c1", &[1, gate_hidden], scale, rng)?;
        store.insert_uniform("gated.u2", &[gate_hidden, 1], scale, rng)?;
        store.insert_uniform("gated.c2", &[1, 1], scale, rng)?;
        Self::bind(store)
    }

    pub fn bind(store: &ParamStore) -> Result<Self> {
        let w_by_pos = store
            .iter()
            .filter_map(|(id, name, _)| name.strip_prefix(W_PREFIX).map(|tag| (tag.to_string(), id)))
            .collect();
        let fallback = store.id(W_FALLBACK)?;
        let u1 = store.id("gated.u1")?;
        let (dim, gate_hidden) = store.get(u1).dims2()?;
        Ok(GatedTreeParams {
            w_by_pos,
            fallback,
            b: store.id("gated.b")?,
            u1,
            c1: store.id("gated.c1")?,
            u2: store.id("gated.u2")?,
            c2: store.id("gated.c2")?,
            dim,
            gate_hidden,
            unseen: AtomicUsize::new(0),
        })
    }

    /// Matrix for `tag`, falling back (and counting) when it has none.
    pub fn w_for(&self, tag: &str) -> ParamId {
        match self.w_by_pos.get(tag) {
            Some(&id) => id,
            None => {
                self.unseen.fetch_add(1, Ordering::Relaxed);
                self.fallback
            }
        }
    }

    pub fn unseen_pos(&self) -> usize {
        self.unseen.load(Ordering::Relaxed)
    }

    pub fn reset_unseen(&self) -> usize {
        self.unseen.swap(0, Ordering::Relaxed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateMode {
    Learned,
    /// Every gate replaced by this constant.
    Fixed(f64),
}

/// Gate for real node `node` as a scalar var.
pub fn gate_weight(
    s: &mut Session<'_>,
    tree: &ParseTree,
    node: usize,
    emb: &EmbeddingTable,
    params: &GatedTreeParams,
) -> Result<Var> {
    let n = tree.node(node);
    let Some(token) = n.token else {
        return Err(Error::Contract(format!("gate requested for pad node {node}")));
    };
    let mut ids = vec![token];
    ids.extend(n.children.iter().filter_map(|&c| tree.node(c).token));
    let e = emb.lookup(s, &ids)?;
    if emb.dim != params.dim {
        return Err(TensorError::Shape(format!("gate classifier expects dim {}, got {}", params.dim, emb.dim)).into());
    }
    let (u1, c1, u2, c2) = (s.param(params.u1), s.param(params.c1), s.param(params.u2), s.param(params.c2));
    let h = s.tape.matmul(e, u1)?;
    let h = s.tape.add_bias(h, c1)?;
    let h = s.tape.relu(h)?;
    let z = s.tape.matmul(h, u2)?;
    let z = s.tape.add_bias(z, c2)?;
    let m = s.tape.max(z)?;
    Ok(s.tape.tanh(m)?)
}

pub fn encode_tree_gated(
    s: &mut Session<'_>,
    tree: &ParseTree,
    emb: &EmbeddingTable,
    params: &GatedTreeParams,
) -> Result<Var> {
    encode_tree_gated_with(s, tree, emb, params, GateMode::Learned)
}

pub fn encode_tree_gated_with(
    s: &mut Session<'_>,
    tree: &ParseTree,
    emb: &EmbeddingTable,
    params: &GatedTreeParams,
    mode: GateMode,
) -> Result<Var> {
    if tree.node(tree.root()).is_pad() {
        return Ok(s.tape.constant(Tensor::zeros(vec![1, params.dim])));
    }
    let b = s.param(params.b);
    let gate = |s: &mut Session<'_>, j: usize| -> Result<Var> {
        match mode {
            GateMode::Learned => gate_weight(s, tree, j, emb, params),
            GateMode::Fixed(v) => Ok(s.tape.constant(Tensor::scalar(v))),
        }
    };
    let mut f: Vec<Option<Var>> = vec![None; tree.len()];
    for i in tree.post_order() {
        let node = tree.node(i);
        let Some(token) = node.token else { continue };
        let mut children = Vec::with_capacity(node.children.len());
        for &c in &node.children {
            if let Some(fc) = f[c] {
                let w = gate(s, c)?;
                children.push(s.tape.hadamard(fc, w)?);
            }
        }
        let w = s.param(params.w_for(&node.pos));
        f[i] = Some(compose_node(s, token, emb, w, b, &children)?);
    }
    let root = f[tree.root()].expect("root is real");
    let w = gate(s, tree.root())?;
    Ok(s.tape.hadamard(root, w)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::TreeNode;

    fn zero_params(store: &mut ParamStore, dim: usize, tags: &[&str]) -> GatedTreeParams {
        for t in tags {
            store.insert(format!("{W_PREFIX}{t}"), Tensor::identity(dim)).unwrap();
        }
        store.insert(W_FALLBACK, Tensor::identity(dim)).unwrap();
        store.insert("gated.b", Tensor::zeros(vec![1, dim])).unwrap();
        store.insert("gated.u1", Tensor::zeros(vec![dim, 2])).unwrap();
        store.insert("gated.c1", Tensor::zeros(vec![1, 2])).unwrap();
        store.insert("gated.u2", Tensor::zeros(vec![2, 1])).unwrap();
        store.insert("gated.c2", Tensor::zeros(vec![1, 1])).unwrap();
        GatedTreeParams::bind(store).unwrap()
    }

    fn embed(store: &mut ParamStore) -> EmbeddingTable {
        let t = Tensor::new(vec![4, 3], vec![0.0, 0.0, 0.0, 0.5, 0.5, 0.5, 1.0, -1.0, 2.0, 0.3, 0.2, 0.1]).unwrap();
        store.insert("embed", t).unwrap();
        EmbeddingTable::bind(store, "embed").unwrap()
    }

    fn two_nodes() -> ParseTree {
        let mut root = TreeNode::word(2, "VERB");
        root.children = vec![1];
        ParseTree::new(vec![root, TreeNode::word(3, "NOUN")], 0).unwrap()
    }

    #[test]
    fn zero_classifier_zeroes_output() {
        let mut store = ParamStore::new();
        let p = zero_params(&mut store, 3, &["NOUN", "VERB"]);
        let emb = embed(&mut store);
        let mut s = Session::new(&store);
        let out = encode_tree_gated(&mut s, &two_nodes(), &emb, &p).unwrap();
        assert_eq!(s.value(out).data(), &[0.0, 0.0, 0.0]);
        let g = gate_weight(&mut s, &two_nodes(), 0, &emb, &p).unwrap();
        assert_eq!(s.value(g).item().unwrap(), 0.0);
    }

    #[test]
    fn forced_unit_gates_reduce_to_relu_of_embedding() {
        let mut store = ParamStore::new();
        let p = zero_params(&mut store, 3, &["NOUN"]);
        let emb = embed(&mut store);
        let mut s = Session::new(&store);
        let t = ParseTree::new(vec![TreeNode::word(2, "NOUN")], 0).unwrap();
        let out = encode_tree_gated_with(&mut s, &t, &emb, &p, GateMode::Fixed(1.0)).unwrap();
        assert_eq!(s.value(out).data(), &[1.0, 0.0, 2.0]);
    }

    #[test]
    fn gate_is_tanh_of_max_classifier_output() {
        let mut store = ParamStore::new();
        store.insert("gated.c2", Tensor::zeros(vec![1, 1])).unwrap();
        store.insert(W_FALLBACK, Tensor::identity(1)).unwrap();
        store.insert("gated.b", Tensor::zeros(vec![1, 1])).unwrap();
        // classifier(e) = relu(e)·1 with 1-dim embeddings: outputs are the
        // embeddings' positive parts; pick node = -2 → 0, child = 3 → 3
        store.insert("gated.u1", Tensor::identity(1)).unwrap();
        store.insert("gated.c1", Tensor::zeros(vec![1, 1])).unwrap();
        store.insert("gated.u2", Tensor::identity(1)).unwrap();
        store.insert("embed", Tensor::new(vec![4, 1], vec![0.0, 0.0, -2.0, 3.0]).unwrap()).unwrap();
        let p = GatedTreeParams::bind(&store).unwrap();
        let emb = EmbeddingTable::bind(&store, "embed").unwrap();
        let mut s = Session::new(&store);
        let g = gate_weight(&mut s, &two_nodes(), 0, &emb, &p).unwrap();
        assert!((s.value(g).item().unwrap() - 3f64.tanh()).abs() < 1e-15);
        assert!((3f64.tanh() - 0.99505).abs() < 1e-5);
    }

    #[test]
    fn unseen_tags_use_fallback_and_are_counted() {
        let mut store = ParamStore::new();
        let p = zero_params(&mut store, 3, &["NOUN"]);
        let emb = embed(&mut store);
        let mut s = Session::new(&store);
        encode_tree_gated(&mut s, &two_nodes(), &emb, &p).unwrap();
        assert_eq!(p.unseen_pos(), 1);
        assert_eq!(p.reset_unseen(), 1);
        assert_eq!(p.unseen_pos(), 0);
    }
}
