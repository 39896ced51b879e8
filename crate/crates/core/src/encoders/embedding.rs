use rand::Rng;
use rd_autodiff::{GradStore, ParamId, ParamStore, Session, Tensor, Var};

use crate::vocab::PAD;
use crate::Result;

/// `rows × dim` trainable lookup table whose `PAD` row is held at zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmbeddingTable {
    pub id: ParamId,
    pub rows: usize,
    pub dim: usize,
}

impl EmbeddingTable {
    pub fn init<R: Rng>(
        store: &mut ParamStore,
        name: &str,
        rows: usize,
        dim: usize,
        scale: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let id = store.insert_uniform(name, &[rows, dim], scale, rng)?;
        store.get_mut(id).row_slice_mut(PAD).fill(0.0);
        Ok(EmbeddingTable { id, rows, dim })
    }

    pub fn bind(store: &ParamStore, name: &str) -> Result<Self> {
        let id = store.id(name)?;
        let (rows, dim) = store.get(id).dims2()?;
        Ok(EmbeddingTable { id, rows, dim })
    }

    pub fn var(&self, s: &mut Session<'_>) -> Var {
        s.param(self.id)
    }

    /// `[ids.len(), dim]` rows.
    pub fn lookup(&self, s: &mut Session<'_>, ids: &[usize]) -> Result<Var> {
        let t = s.param(self.id);
        Ok(s.tape.gather_rows(t, ids)?)
    }

    pub fn row<'a>(&self, store: &'a ParamStore, id: usize) -> &'a [f64] {
        store.get(self.id).row_slice(id)
    }

    /// Clears the `PAD` row of this table's gradient so updates never move it.
    pub fn mask_pad_grad(&self, grads: &mut GradStore) {
        if let Some(g) = grads.get_mut(self.id) {
            g.row_slice_mut(PAD).fill(0.0);
        }
    }

    pub fn zeros_like_row(&self) -> Tensor {
        Tensor::zeros(vec![1, self.dim])
    }
}
