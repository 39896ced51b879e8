//! Recursive tree network with one weight matrix for every node:
//! `f(i) = relu(E_i·W + b + Σ_children f(j))`.

use rand::Rng;
use rd_autodiff::{ParamId, ParamStore, Session, Tensor, Var};

use super::EmbeddingTable;
use crate::tree::ParseTree;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SharedTreeParams {
    pub w: ParamId,
    pub b: ParamId,
    pub dim: usize,
}

impl SharedTreeParams {
    pub fn init<R: Rng>(store: &mut ParamStore, dim: usize, scale: f64, rng: &mut R) -> Result<Self> {
        store.insert_uniform("tree.w", &[dim, dim], scale, rng)?;
        store.insert_uniform("tree.b", &[1, dim], scale, rng)?;
        Self::bind(store)
    }

    pub fn bind(store: &ParamStore) -> Result<Self> {
        let w = store.id("tree.w")?;
        let dim = store.get(w).dims2()?.1;
        Ok(SharedTreeParams { w, b: store.id("tree.b")?, dim })
    }
}

/// `relu(E_i·W + b + Σ children)`; shared by both tree encoders so the
/// per-node arithmetic is identical between them.
pub(crate) fn compose_node(
    s: &mut Session<'_>,
    token: usize,
    emb: &EmbeddingTable,
    w: Var,
    b: Var,
    children: &[Var],
) -> Result<Var> {
    let e = emb.lookup(s, &[token])?;
    let z = s.tape.matmul(e, w)?;
    let mut z = s.tape.add_bias(z, b)?;
    for &c in children {
        z = s.tape.add(z, c)?;
    }
    Ok(s.tape.relu(z)?)
}

/// Pad nodes are skipped outright, so padding never changes the result.
pub fn encode_tree_shared(
    s: &mut Session<'_>,
    tree: &ParseTree,
    emb: &EmbeddingTable,
    params: &SharedTreeParams,
) -> Result<Var> {
    let root = tree.node(tree.root());
    if root.is_pad() {
        return Ok(s.tape.constant(Tensor::zeros(vec![1, params.dim])));
    }
    let w = s.param(params.w);
    let b = s.param(params.b);
    let mut f: Vec<Option<Var>> = vec![None; tree.len()];
    for i in tree.post_order() {
        let node = tree.node(i);
        let Some(token) = node.token else { continue };
        let children: Vec<Var> = node.children.iter().filter_map(|&c| f[c]).collect();
        f[i] = Some(compose_node(s, token, emb, w, b, &children)?);
    }
    Ok(f[tree.root()].expect("root is real"))
}
