//! Dense `f64` tensors with define-by-run reverse-mode differentiation.
//!
//! A [`Tape`] records each forward operation as it runs; [`Tape::backward`]
//! replays the record in reverse to produce exact gradients. Trainable
//! tensors live in a [`ParamStore`] and are bound onto a fresh tape per
//! forward pass through a [`Session`], so models whose graph changes per
//! example (trees) cost nothing extra.
//!
//! ```
//! use rd_autodiff::{Tape, Tensor};
//!
//! let mut tape = Tape::new();
//! let x = tape.input(Tensor::row(&[1.0, 2.0]), true);
//! let sq = tape.hadamard(x, x).unwrap();
//! let loss = tape.sum(sq).unwrap();
//! let grads = tape.backward(loss).unwrap();
//! assert_eq!(grads.wrt(x).data(), &[2.0, 4.0]);
//! ```

pub mod gradcheck;
pub mod optim;
pub mod params;
pub mod tape;
pub mod tensor;

pub use optim::{adam_step, sgd_step, AdamConfig, AdamState, Optimizer, OptimizerKind};
pub use params::{GradStore, ParamId, ParamStore, Session};
pub use tape::{bce_term, Gradients, Primitive, Tape, Var};
pub use tensor::Tensor;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Shape(String),
    #[error("numeric error: {0}")]
    NonFinite(String),
    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
