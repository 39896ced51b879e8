//! Define-by-run tape.
//!
//! Every forward operation appends a node to the tape. Nodes whose inputs
//! all lack `requires_grad` keep only their value; the rest also keep the op
//! so that [`Tape::backward`] can replay them in reverse. Node indices are
//! assigned in creation order, so the tape is always topologically sorted.

use std::collections::HashMap;
use std::ops::Deref;

use crate::tensor::{gemm, Tensor};
use crate::{Error, Result};

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// The primitive set exposed through [`Tape::apply`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Primitive {
    MatMul,
    Add,
    Hadamard,
    Sigmoid,
    Tanh,
    Relu,
    SumReduce,
    MaxReduce,
    Scale(f64),
}

impl Primitive {
    pub fn arity(self) -> usize {
        match self {
            Primitive::MatMul | Primitive::Add | Primitive::Hadamard => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Primitive::MatMul => "matmul",
            Primitive::Add => "add",
            Primitive::Hadamard => "hadamard",
            Primitive::Sigmoid => "sigmoid",
            Primitive::Tanh => "tanh",
            Primitive::Relu => "relu",
            Primitive::SumReduce => "sum_reduce",
            Primitive::MaxReduce => "max_reduce",
            Primitive::Scale(_) => "scale",
        }
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    Const,
    MatMul(Var, Var),
    /// `a · bᵀ`
    MatMulT(Var, Var),
    Add(Var, Var),
    Hadamard(Var, Var),
    AddBias(Var, Var),
    Sigmoid(Var),
    Tanh(Var),
    Relu(Var),
    SumReduce(Var),
    MaxReduce(Var, usize),
    Scale(Var, f64),
    GatherRows(Var, Vec<usize>),
    SliceRows(Var, usize),
    ConcatRows(Vec<Var>),
    /// Mean sigmoid cross-entropy against fixed labels.
    BceWithLogits(Var, Tensor),
}

enum Value<'p> {
    Owned(Tensor),
    Borrowed(&'p Tensor),
}

impl Deref for Value<'_> {
    type Target = Tensor;

    fn deref(&self) -> &Tensor {
        match self {
            Value::Owned(t) => t,
            Value::Borrowed(t) => t,
        }
    }
}

struct Node<'p> {
    value: Value<'p>,
    op: Op,
    requires_grad: bool,
}

/// Pending `Aᵀ·G` contributions to one leaf's gradient, `rows` stacked
/// rows of each.
#[derive(Default)]
struct Deferred {
    a: Vec<f64>,
    g: Vec<f64>,
    rows: usize,
}

/// Recorded computation. Leaves may borrow parameter tensors for `'p`.
#[derive(Default)]
pub struct Tape<'p> {
    nodes: Vec<Node<'p>>,
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `max(z,0) − z·y + ln(1 + e^(−|z|))`
pub fn bce_term(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

impl<'p> Tape<'p> {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Borrowed leaf; gradients are tracked when `requires_grad` is set.
    pub fn leaf(&mut self, value: &'p Tensor, requires_grad: bool) -> Var {
        self.push(Value::Borrowed(value), Op::Leaf, requires_grad)
    }

    /// Owned leaf.
    pub fn input(&mut self, value: Tensor, requires_grad: bool) -> Var {
        self.push(Value::Owned(value), Op::Leaf, requires_grad)
    }

    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(Value::Owned(value), Op::Const, false)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn push(&mut self, value: Value<'p>, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node { value, op, requires_grad });
        Var(self.nodes.len() - 1)
    }

    fn record(&mut self, name: &str, out: Tensor, op: Op, inputs: &[Var]) -> Result<Var> {
        if !out.is_finite() {
            return Err(Error::NonFinite(format!("{name} produced a non-finite value")));
        }
        let rg = inputs.iter().any(|v| self.nodes[v.0].requires_grad);
        let op = if rg { op } else { Op::Const };
        Ok(self.push(Value::Owned(out), op, rg))
    }

    /// Dispatches one of the named primitives.
    pub fn apply(&mut self, prim: Primitive, inputs: &[Var]) -> Result<Var> {
        if inputs.len() != prim.arity() {
            return Err(Error::Contract(format!(
                "{} takes {} inputs, got {}",
                prim.name(),
                prim.arity(),
                inputs.len()
            )));
        }
        match prim {
            Primitive::MatMul => self.matmul(inputs[0], inputs[1]),
            Primitive::Add => self.add(inputs[0], inputs[1]),
            Primitive::Hadamard => self.hadamard(inputs[0], inputs[1]),
            Primitive::Sigmoid => self.sigmoid(inputs[0]),
            Primitive::Tanh => self.tanh(inputs[0]),
            Primitive::Relu => self.relu(inputs[0]),
            Primitive::SumReduce => self.sum(inputs[0]),
            Primitive::MaxReduce => self.max(inputs[0]),
            Primitive::Scale(s) => self.scale(inputs[0], s),
        }
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (av, bv) = (self.value(a), self.value(b));
        let ((m, k), (k2, n)) = match (av.dims2(), bv.dims2()) {
            (Ok(x), Ok(y)) if x.1 == y.0 => (x, y),
            _ => return Err(shape_err("matmul", av, bv)),
        };
        let mut out = vec![0.0; m * n];
        gemm(m, k, n, av.data(), false, bv.data(), false, &mut out);
        debug_assert_eq!(k, k2);
        self.record("matmul", Tensor::from_raw(vec![m, n], out), Op::MatMul(a, b), &[a, b])
    }

    /// `a · bᵀ` for `a: m×k`, `b: n×k`.
    pub fn matmul_t(&mut self, a: Var, b: Var) -> Result<Var> {
        let (av, bv) = (self.value(a), self.value(b));
        let ((m, k), (n, _)) = match (av.dims2(), bv.dims2()) {
            (Ok(x), Ok(y)) if x.1 == y.1 => (x, y),
            _ => return Err(shape_err("matmul_t", av, bv)),
        };
        let mut out = vec![0.0; m * n];
        gemm(m, k, n, av.data(), false, bv.data(), true, &mut out);
        self.record("matmul_t", Tensor::from_raw(vec![m, n], out), Op::MatMulT(a, b), &[a, b])
    }

    fn broadcast_binary(&mut self, name: &str, a: Var, b: Var, f: impl Fn(f64, f64) -> f64) -> Result<Tensor> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.shape() == bv.shape() {
            let data = av.data().iter().zip(bv.data()).map(|(&x, &y)| f(x, y)).collect();
            Ok(Tensor::from_raw(av.shape().to_vec(), data))
        } else if bv.is_scalar() {
            let y = bv.data()[0];
            let data = av.data().iter().map(|&x| f(x, y)).collect();
            Ok(Tensor::from_raw(av.shape().to_vec(), data))
        } else if av.is_scalar() {
            let x = av.data()[0];
            let data = bv.data().iter().map(|&y| f(x, y)).collect();
            Ok(Tensor::from_raw(bv.shape().to_vec(), data))
        } else {
            Err(shape_err(name, av, bv))
        }
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.broadcast_binary("add", a, b, |x, y| x + y)?;
        self.record("add", out, Op::Add(a, b), &[a, b])
    }

    pub fn hadamard(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.broadcast_binary("hadamard", a, b, |x, y| x * y)?;
        self.record("hadamard", out, Op::Hadamard(a, b), &[a, b])
    }

    /// Adds a `[1, n]` (or `[n]`) bias to every row of an `m×n` matrix.
    pub fn add_bias(&mut self, x: Var, bias: Var) -> Result<Var> {
        let (xv, bv) = (self.value(x), self.value(bias));
        let (m, n) = xv.dims2()?;
        if bv.numel() != n || bv.shape().len() > 2 || (bv.shape().len() == 2 && bv.shape()[0] != 1) {
            return Err(shape_err("add_bias", xv, bv));
        }
        let mut data = xv.data().to_vec();
        for r in 0..m {
            for (o, b) in data[r * n..(r + 1) * n].iter_mut().zip(bv.data()) {
                *o += b;
            }
        }
        self.record("add_bias", Tensor::from_raw(vec![m, n], data), Op::AddBias(x, bias), &[x, bias])
    }

    fn unary(&self, a: Var, f: impl Fn(f64) -> f64) -> Tensor {
        let av = self.value(a);
        Tensor::from_raw(av.shape().to_vec(), av.data().iter().map(|&x| f(x)).collect())
    }

    pub fn sigmoid(&mut self, a: Var) -> Result<Var> {
        let out = self.unary(a, logistic);
        self.record("sigmoid", out, Op::Sigmoid(a), &[a])
    }

    pub fn tanh(&mut self, a: Var) -> Result<Var> {
        let out = self.unary(a, f64::tanh);
        self.record("tanh", out, Op::Tanh(a), &[a])
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        let out = self.unary(a, |x| if x > 0.0 { x } else { 0.0 });
        self.record("relu", out, Op::Relu(a), &[a])
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Result<Var> {
        let out = self.unary(a, |x| x * s);
        self.record("scale", out, Op::Scale(a, s), &[a])
    }

    /// Sum of all elements, as a scalar.
    pub fn sum(&mut self, a: Var) -> Result<Var> {
        let s = self.value(a).data().iter().sum();
        self.record("sum_reduce", Tensor::scalar(s), Op::SumReduce(a), &[a])
    }

    /// Maximum over all elements, as a scalar. Ties resolve to the first index.
    pub fn max(&mut self, a: Var) -> Result<Var> {
        let data = self.value(a).data();
        let mut best = 0;
        for (i, &v) in data.iter().enumerate() {
            if v > data[best] {
                best = i;
            }
        }
        let m = data[best];
        self.record("max_reduce", Tensor::scalar(m), Op::MaxReduce(a, best), &[a])
    }

    /// Selects rows of a matrix, e.g. an embedding lookup.
    pub fn gather_rows(&mut self, table: Var, rows: &[usize]) -> Result<Var> {
        let tv = self.value(table);
        let (r, c) = tv.dims2()?;
        if rows.is_empty() {
            return Err(Error::Contract("gather_rows with no rows".into()));
        }
        if let Some(&bad) = rows.iter().find(|&&i| i >= r) {
            return Err(Error::Shape(format!("gather_rows: row {bad} out of range for {r} rows")));
        }
        let mut data = Vec::with_capacity(rows.len() * c);
        for &i in rows {
            data.extend_from_slice(tv.row_slice(i));
        }
        let out = Tensor::from_raw(vec![rows.len(), c], data);
        self.record("gather_rows", out, Op::GatherRows(table, rows.to_vec()), &[table])
    }

    /// Rows `start..start + len` of a matrix.
    pub fn slice_rows(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        let av = self.value(a);
        let (r, c) = av.dims2()?;
        if len == 0 || start + len > r {
            return Err(Error::Shape(format!("slice_rows {start}..{} out of range for {r} rows", start + len)));
        }
        let out = Tensor::from_raw(vec![len, c], av.data()[start * c..(start + len) * c].to_vec());
        self.record("slice_rows", out, Op::SliceRows(a, start), &[a])
    }

    /// Stacks matrices with equal column counts. Scalars count as `1×1`.
    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return Err(Error::Contract("concat_rows with no inputs".into()));
        }
        let cols = |t: &Tensor| -> Result<(usize, usize)> {
            if t.shape().is_empty() {
                Ok((1, 1))
            } else {
                t.dims2()
            }
        };
        let (_, c) = cols(self.value(parts[0]))?;
        let mut rows = 0;
        let mut data = Vec::new();
        for &p in parts {
            let pv = self.value(p);
            let (r, pc) = cols(pv)?;
            if pc != c {
                return Err(shape_err("concat_rows", self.value(parts[0]), pv));
            }
            rows += r;
            data.extend_from_slice(pv.data());
        }
        let out = Tensor::from_raw(vec![rows, c], data);
        self.record("concat_rows", out, Op::ConcatRows(parts.to_vec()), parts)
    }

    /// Mean over all entries of the numerically stable sigmoid cross-entropy.
    /// Labels must be 0 or 1.
    pub fn bce_with_logits(&mut self, logits: Var, labels: &Tensor) -> Result<Var> {
        let lv = self.value(logits);
        if lv.shape() != labels.shape() {
            return Err(shape_err("bce_with_logits", lv, labels));
        }
        if let Some(bad) = labels.data().iter().find(|&&y| y != 0.0 && y != 1.0) {
            return Err(Error::Contract(format!("label {bad} is not 0 or 1")));
        }
        let n = lv.numel() as f64;
        let loss: f64 = lv.data().iter().zip(labels.data()).map(|(&z, &y)| bce_term(z, y)).sum();
        self.record("bce_with_logits", Tensor::scalar(loss / n), Op::BceWithLogits(logits, labels.clone()), &[logits])
    }

    /// Reverse sweep from a scalar `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        let lv = self.value(loss);
        if !lv.is_scalar() {
            return Err(Error::Contract(format!("backward needs a scalar loss, got shape {:?}", lv.shape())));
        }
        let mut grads: Vec<Option<Tensor>> = Vec::with_capacity(loss.0 + 1);
        grads.resize_with(loss.0 + 1, || None);
        grads[loss.0] = Some(Tensor::from_raw(lv.shape().to_vec(), vec![1.0]));

        let mut deferred: HashMap<usize, Deferred> = HashMap::new();
        for idx in (0..=loss.0).rev() {
            let node = &self.nodes[idx];
            if !node.requires_grad {
                continue;
            }
            if let Some(d) = deferred.remove(&idx) {
                let (k, n) = self.value(Var(idx)).dims2().expect("matmul operand is 2-d");
                self.accumulate_with(&mut grads, Var(idx), |acc| {
                    gemm(k, d.rows, n, &d.a, true, &d.g, false, acc.data_mut())
                });
            }
            let Some(g) = grads[idx].take() else { continue };
            self.propagate(&node.op, &node.value, &g, &mut grads, &mut deferred);
            grads[idx] = Some(g);
        }

        let shapes = self.nodes.iter().map(|n| n.value.shape().to_vec()).collect();
        Ok(Gradients { grads, shapes })
    }

    fn accumulate(&self, grads: &mut [Option<Tensor>], v: Var, g: Tensor) {
        if !self.nodes[v.0].requires_grad {
            return;
        }
        match &mut grads[v.0] {
            Some(acc) => acc.add_assign(&g),
            slot @ None => *slot = Some(g),
        }
    }

    /// Adds into `v`'s gradient in place, allocating zeros on first touch.
    fn accumulate_with(&self, grads: &mut [Option<Tensor>], v: Var, f: impl FnOnce(&mut Tensor)) {
        if !self.nodes[v.0].requires_grad {
            return;
        }
        let slot = grads[v.0].get_or_insert_with(|| Tensor::zeros(self.value(v).shape().to_vec()));
        f(slot);
    }

    fn propagate(
        &self,
        op: &Op,
        out: &Tensor,
        g: &Tensor,
        grads: &mut [Option<Tensor>],
        deferred: &mut HashMap<usize, Deferred>,
    ) {
        match op {
            Op::Leaf | Op::Const => {}
            Op::MatMul(a, b) => {
                let (av, bv) = (self.value(*a), self.value(*b));
                let (m, k) = av.dims2().unwrap();
                let n = bv.dims2().unwrap().1;
                // dA = G · Bᵀ, dB = Aᵀ · G
                self.accumulate_with(grads, *a, |acc| gemm(m, n, k, g.data(), false, bv.data(), true, acc.data_mut()));
                let b_node = &self.nodes[b.0];
                if b_node.requires_grad && matches!(b_node.op, Op::Leaf) {
                    // A weight reused across many small products (one per
                    // time step or tree node): stack the factors and form
                    // Aᵀ·G once, instead of one full-size outer product per use.
                    let d = deferred.entry(b.0).or_default();
                    d.a.extend_from_slice(av.data());
                    d.g.extend_from_slice(g.data());
                    d.rows += m;
                } else {
                    self.accumulate_with(grads, *b, |acc| {
                        gemm(k, m, n, av.data(), true, g.data(), false, acc.data_mut())
                    });
                }
            }
            Op::MatMulT(a, b) => {
                let (av, bv) = (self.value(*a), self.value(*b));
                let (m, k) = av.dims2().unwrap();
                let n = bv.dims2().unwrap().0;
                // out = A·Bᵀ: dA = G · B, dB = Gᵀ · A
                self.accumulate_with(grads, *a, |acc| gemm(m, n, k, g.data(), false, bv.data(), false, acc.data_mut()));
                self.accumulate_with(grads, *b, |acc| gemm(n, m, k, g.data(), true, av.data(), false, acc.data_mut()));
            }
            Op::Add(a, b) => {
                self.accumulate(grads, *a, reduce_broadcast(g, self.value(*a)));
                self.accumulate(grads, *b, reduce_broadcast(g, self.value(*b)));
            }
            Op::Hadamard(a, b) => {
                let (av, bv) = (self.value(*a), self.value(*b));
                if self.nodes[a.0].requires_grad {
                    let ga = mul_broadcast(g, bv);
                    self.accumulate(grads, *a, reduce_broadcast(&ga, av));
                }
                if self.nodes[b.0].requires_grad {
                    let gb = mul_broadcast(g, av);
                    self.accumulate(grads, *b, reduce_broadcast(&gb, bv));
                }
            }
            Op::AddBias(x, bias) => {
                self.accumulate(grads, *x, g.clone());
                self.accumulate_with(grads, *bias, |acc| {
                    let n = acc.numel();
                    for row in g.data().chunks(n) {
                        for (a, v) in acc.data_mut().iter_mut().zip(row) {
                            *a += v;
                        }
                    }
                });
            }
            Op::Sigmoid(a) => {
                let d = zip_map(g, out, |gi, s| gi * s * (1.0 - s));
                self.accumulate(grads, *a, d);
            }
            Op::Tanh(a) => {
                let d = zip_map(g, out, |gi, t| gi * (1.0 - t * t));
                self.accumulate(grads, *a, d);
            }
            Op::Relu(a) => {
                let d = zip_map(g, self.value(*a), |gi, x| if x > 0.0 { gi } else { 0.0 });
                self.accumulate(grads, *a, d);
            }
            Op::Scale(a, s) => {
                let d = zip_map(g, g, |gi, _| gi * s);
                self.accumulate(grads, *a, d);
            }
            Op::SumReduce(a) => {
                let gi = g.data()[0];
                self.accumulate(grads, *a, Tensor::filled(self.value(*a).shape().to_vec(), gi));
            }
            Op::MaxReduce(a, at) => {
                let gi = g.data()[0];
                self.accumulate_with(grads, *a, |acc| acc.data_mut()[*at] += gi);
            }
            Op::GatherRows(table, rows) => {
                self.accumulate_with(grads, *table, |acc| {
                    for (r, &i) in rows.iter().enumerate() {
                        for (a, v) in acc.row_slice_mut(i).iter_mut().zip(g.row_slice(r)) {
                            *a += v;
                        }
                    }
                });
            }
            Op::SliceRows(a, start) => {
                let c = g.dims2().unwrap().1;
                self.accumulate_with(grads, *a, |acc| {
                    let dst = &mut acc.data_mut()[start * c..start * c + g.numel()];
                    for (d, v) in dst.iter_mut().zip(g.data()) {
                        *d += v;
                    }
                });
            }
            Op::ConcatRows(parts) => {
                let mut offset = 0;
                for p in parts {
                    let pv = self.value(*p);
                    let n = pv.numel();
                    let piece = Tensor::from_raw(pv.shape().to_vec(), g.data()[offset..offset + n].to_vec());
                    offset += n;
                    self.accumulate(grads, *p, piece);
                }
            }
            Op::BceWithLogits(a, labels) => {
                let zv = self.value(*a);
                let scale = g.data()[0] / zv.numel() as f64;
                let d = zip_map(zv, labels, |z, y| (logistic(z) - y) * scale);
                self.accumulate(grads, *a, d);
            }
        }
    }
}

fn shape_err(op: &str, a: &Tensor, b: &Tensor) -> Error {
    Error::Shape(format!("{op}: incompatible shapes {:?} and {:?}", a.shape(), b.shape()))
}

fn zip_map(a: &Tensor, b: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    let data = a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect();
    Tensor::from_raw(a.shape().to_vec(), data)
}

/// `g ⊙ other`, where `other` may be a broadcast scalar.
fn mul_broadcast(g: &Tensor, other: &Tensor) -> Tensor {
    if other.numel() == g.numel() {
        zip_map(g, other, |x, y| x * y)
    } else {
        let y = other.data()[0];
        zip_map(g, g, |x, _| x * y)
    }
}

/// Folds a gradient of the broadcast output shape back onto `input`'s shape.
fn reduce_broadcast(g: &Tensor, input: &Tensor) -> Tensor {
    if input.numel() == g.numel() {
        g.clone().reshape_unchecked(input.shape().to_vec())
    } else {
        Tensor::from_raw(input.shape().to_vec(), vec![g.data().iter().sum()])
    }
}

/// Result of [`Tape::backward`]: one optional gradient per tape node.
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
    shapes: Vec<Vec<usize>>,
}

impl Gradients {
    /// Gradient of the loss with respect to `v`; zeros when `v` is not on a
    /// path to the loss.
    pub fn wrt(&self, v: Var) -> Tensor {
        match self.grads.get(v.0).and_then(Option::as_ref) {
            Some(g) => g.clone(),
            None => Tensor::zeros(self.shapes[v.0].clone()),
        }
    }

    /// Moves the gradient out, if one was computed.
    pub fn take(&mut self, v: Var) -> Option<Tensor> {
        self.grads.get_mut(v.0).and_then(Option::take)
    }
}
