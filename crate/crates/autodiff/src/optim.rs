//! Adam and plain SGD over a [`ParamStore`].

use crate::params::{GradStore, ParamStore};
use crate::tensor::Tensor;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// First and second moments for one parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct Moments {
    pub m: Tensor,
    pub v: Tensor,
}

/// Per-parameter moment estimates plus the shared step counter.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AdamState {
    pub moments: Vec<Option<Moments>>,
    pub step: u64,
}

impl AdamState {
    pub fn new(n_params: usize) -> Self {
        AdamState { moments: vec![None; n_params], step: 0 }
    }
}

/// One Adam update with bias correction.
///
/// Parameters without a gradient are left untouched and keep their moments.
pub fn adam_step(params: &mut ParamStore, grads: &GradStore, state: &mut AdamState, cfg: AdamConfig) -> Result<()> {
    if cfg.lr < 0.0 {
        return Err(Error::Contract(format!("negative learning rate {}", cfg.lr)));
    }
    if state.moments.len() != params.len() || grads.len() != params.len() {
        return Err(Error::Shape(format!(
            "adam: {} params, {} grads, {} moment slots",
            params.len(),
            grads.len(),
            state.moments.len()
        )));
    }
    for id in params.ids() {
        if let Some(g) = grads.get(id) {
            if g.shape() != params.get(id).shape() {
                return Err(Error::Shape(format!(
                    "adam: gradient {:?} for {} of shape {:?}",
                    g.shape(),
                    params.name(id),
                    params.get(id).shape()
                )));
            }
        }
    }

    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for id in params.ids() {
        let Some(g) = grads.get(id) else { continue };
        let slot = &mut state.moments[id.index()];
        let mo = slot.get_or_insert_with(|| Moments {
            m: Tensor::zeros(g.shape().to_vec()),
            v: Tensor::zeros(g.shape().to_vec()),
        });
        let p = params.get_mut(id).data_mut();
        for (((p, &g), m), v) in
            p.iter_mut().zip(g.data()).zip(mo.m.data_mut().iter_mut()).zip(mo.v.data_mut().iter_mut())
        {
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
    Ok(())
}

pub fn sgd_step(params: &mut ParamStore, grads: &GradStore, lr: f64) -> Result<()> {
    if lr < 0.0 {
        return Err(Error::Contract(format!("negative learning rate {lr}")));
    }
    for id in params.ids() {
        let Some(g) = grads.get(id) else { continue };
        if g.shape() != params.get(id).shape() {
            return Err(Error::Shape(format!("sgd: gradient shape mismatch for {}", params.name(id))));
        }
        for (p, g) in params.get_mut(id).data_mut().iter_mut().zip(g.data()) {
            *p -= lr * g;
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OptimizerKind {
    Adam(AdamConfig),
    Sgd { lr: f64 },
}

/// Optimizer plus its mutable state.
#[derive(Clone, Debug)]
pub enum Optimizer {
    Adam { cfg: AdamConfig, state: AdamState },
    Sgd { lr: f64 },
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, n_params: usize) -> Self {
        match kind {
            OptimizerKind::Adam(cfg) => Optimizer::Adam { cfg, state: AdamState::new(n_params) },
            OptimizerKind::Sgd { lr } => Optimizer::Sgd { lr },
        }
    }

    pub fn step(&mut self, params: &mut ParamStore, grads: &GradStore) -> Result<()> {
        match self {
            Optimizer::Adam { cfg, state } => adam_step(params, grads, state, *cfg),
            Optimizer::Sgd { lr } => sgd_step(params, grads, *lr),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ParamId;

    fn single(x: f64) -> (ParamStore, ParamId) {
        let mut s = ParamStore::new();
        let id = s.insert("x", Tensor::row(&[x])).unwrap();
        (s, id)
    }

    fn grad_of(id: ParamId, g: f64) -> GradStore {
        let mut gs = GradStore::new(id.index() + 1);
        gs.add(id, Tensor::row(&[g]));
        gs
    }

    #[test]
    fn zero_lr_leaves_params() {
        let (mut s, id) = single(1.25);
        let mut st = AdamState::new(1);
        let cfg = AdamConfig { lr: 0.0, ..Default::default() };
        adam_step(&mut s, &grad_of(id, 7.0), &mut st, cfg).unwrap();
        assert_eq!(s.get(id).data(), &[1.25]);
        assert_eq!(st.step, 1);
    }

    #[test]
    fn first_step_moves_by_lr() {
        let (mut s, id) = single(0.0);
        let mut st = AdamState::new(1);
        adam_step(&mut s, &grad_of(id, 0.5), &mut st, AdamConfig::default()).unwrap();
        let delta = s.get(id).data()[0];
        // g / (|g| + eps) * lr
        assert!((delta + 1e-3 * 0.5 / (0.5 + 1e-8)).abs() < 1e-15, "{delta}");
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let (mut s, id) = single(0.0);
        let mut gs = GradStore::new(1);
        gs.add(id, Tensor::row(&[1.0, 2.0]));
        let mut st = AdamState::new(1);
        assert!(matches!(adam_step(&mut s, &gs, &mut st, AdamConfig::default()), Err(Error::Shape(_))));
    }

    #[test]
    fn converges_on_quadratic() {
        // Scalar reference for (x-3)^2 with the textbook update; the store
        // version must agree with it step for step.
        let (mut s, id) = single(0.0);
        let mut st = AdamState::new(1);
        let cfg = AdamConfig { lr: 0.1, ..Default::default() };
        let (mut x, mut m, mut v) = (0.0f64, 0.0f64, 0.0f64);
        for t in 1..=200 {
            let g = 2.0 * (s.get(id).data()[0] - 3.0);
            adam_step(&mut s, &grad_of(id, g), &mut st, cfg).unwrap();

            let gr = 2.0 * (x - 3.0);
            m = 0.9 * m + 0.1 * gr;
            v = 0.999 * v + 0.001 * gr * gr;
            let mh = m / (1.0 - 0.9f64.powi(t));
            let vh = v / (1.0 - 0.999f64.powi(t));
            x -= 0.1 * mh / (vh.sqrt() + 1e-8);
        }
        let got = s.get(id).data()[0];
        assert!((got - x).abs() < 1e-12);
        assert!((got - 3.0).abs() < 0.1, "{got}");
    }
}
