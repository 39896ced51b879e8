//! Independent reference implementations on plain `Vec<f64>`, no tape.
#![allow(dead_code)]

use revdict::autodiff::{ParamStore, Tensor};
use revdict::ParseTree;

pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn of(t: &Tensor) -> Mat {
        let (rows, cols) = match t.shape() {
            [r, c] => (*r, *c),
            [c] => (1, *c),
            [] => (1, 1),
            s => panic!("unexpected shape {s:?}"),
        };
        Mat { rows, cols, data: t.data().to_vec() }
    }

    pub fn named(store: &ParamStore, name: &str) -> Mat {
        Mat::of(store.get(store.id(name).unwrap()))
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> Vec<f64> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }
}

/// `x · m` for a row vector `x`.
pub fn vecmat(x: &[f64], m: &Mat) -> Vec<f64> {
    assert_eq!(x.len(), m.rows);
    let mut out = vec![0.0; m.cols];
    for (k, xk) in x.iter().enumerate() {
        for (j, o) in out.iter_mut().enumerate() {
            *o += xk * m.at(k, j);
        }
    }
    out
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn shared_tree(tree: &ParseTree, emb: &Mat, w: &Mat, b: &Mat) -> Vec<f64> {
    fn rec(tree: &ParseTree, i: usize, emb: &Mat, w: &Mat, b: &Mat) -> Option<Vec<f64>> {
        let node = tree.node(i);
        let token = node.token?;
        let mut z = vecmat(&emb.row(token), w);
        for (zj, bj) in z.iter_mut().zip(&b.data) {
            *zj += bj;
        }
        for &c in &node.children {
            if let Some(fc) = rec(tree, c, emb, w, b) {
                for (zj, cj) in z.iter_mut().zip(&fc) {
                    *zj += cj;
                }
            }
        }
        Some(z.into_iter().map(|v| v.max(0.0)).collect())
    }
    rec(tree, tree.root(), emb, w, b).unwrap_or_else(|| vec![0.0; w.cols])
}

pub struct GatedOracle<'a> {
    pub emb: Mat,
    pub w: Box<dyn Fn(&str) -> Mat + 'a>,
    pub b: Mat,
    pub u1: Mat,
    pub c1: Mat,
    pub u2: Mat,
    pub c2: Mat,
}

impl<'a> GatedOracle<'a> {
    pub fn from_store(store: &'a ParamStore) -> Self {
        GatedOracle {
            emb: Mat::named(store, "embed"),
            w: Box::new(move |tag: &str| {
                let name = format!("gated.w.{tag}");
                if store.contains(&name) {
                    Mat::named(store, &name)
                } else {
                    Mat::named(store, "gated.w_fallback")
                }
            }),
            b: Mat::named(store, "gated.b"),
            u1: Mat::named(store, "gated.u1"),
            c1: Mat::named(store, "gated.c1"),
            u2: Mat::named(store, "gated.u2"),
            c2: Mat::named(store, "gated.c2"),
        }
    }

    fn score(&self, token: usize) -> f64 {
        let mut h = vecmat(&self.emb.row(token), &self.u1);
        for (hj, cj) in h.iter_mut().zip(&self.c1.data) {
            *hj = (*hj + cj).max(0.0);
        }
        vecmat(&h, &self.u2)[0] + self.c2.data[0]
    }

    pub fn gate(&self, tree: &ParseTree, i: usize) -> f64 {
        let node = tree.node(i);
        let mut best = self.score(node.token.unwrap());
        for &c in &node.children {
            if let Some(t) = tree.node(c).token {
                best = best.max(self.score(t));
            }
        }
        best.tanh()
    }

    fn rec(&self, tree: &ParseTree, i: usize) -> Option<Vec<f64>> {
        let node = tree.node(i);
        let token = node.token?;
        let mut z = vecmat(&self.emb.row(token), &(self.w)(&node.pos));
        for (zj, bj) in z.iter_mut().zip(&self.b.data) {
            *zj += bj;
        }
        for &c in &node.children {
            if let Some(fc) = self.rec(tree, c) {
                let g = self.gate(tree, c);
                for (zj, cj) in z.iter_mut().zip(&fc) {
                    *zj += cj * g;
                }
            }
        }
        Some(z.into_iter().map(|v| v.max(0.0)).collect())
    }

    pub fn encode(&self, tree: &ParseTree) -> Vec<f64> {
        match self.rec(tree, tree.root()) {
            Some(f) => {
                let g = self.gate(tree, tree.root());
                f.into_iter().map(|v| v * g).collect()
            }
            None => vec![0.0; self.b.cols],
        }
    }
}

/// Scalar-loop LSTM over `ids[..len]` reversed, every gate unrolled
/// element by element, then the projection.
pub fn lstm(store: &ParamStore, ids: &[usize], len: usize) -> Vec<f64> {
    let emb = Mat::named(store, "embed");
    let mut layers = 0;
    while store.contains(&format!("lstm.l{}.w_i1", layers + 1)) {
        layers += 1;
    }
    let hidden = Mat::named(store, "lstm.l1.w_i1").cols;
    let mut h = vec![vec![0.0; hidden]; layers];
    let mut c = vec![vec![0.0; hidden]; layers];
    for &tok in ids[..len].iter().rev() {
        let mut x = emb.row(tok);
        for l in 0..layers {
            let p = |n: &str| Mat::named(store, &format!("lstm.l{}.{n}", l + 1));
            let pre = |g: &str| -> Vec<f64> {
                let (w1, w2, b) = (p(&format!("w_{g}1")), p(&format!("w_{g}2")), p(&format!("b_{g}")));
                (0..hidden)
                    .map(|j| {
                        let mut acc = b.data[j];
                        for (k, xk) in x.iter().enumerate() {
                            acc += xk * w1.at(k, j);
                        }
                        for (k, hk) in h[l].iter().enumerate() {
                            acc += hk * w2.at(k, j);
                        }
                        acc
                    })
                    .collect()
            };
            let (i, f, o, g) = (pre("i"), pre("f"), pre("o"), pre("g"));
            for j in 0..hidden {
                c[l][j] = sigmoid(f[j]) * c[l][j] + sigmoid(i[j]) * g[j].tanh();
                h[l][j] = sigmoid(o[j]) * c[l][j].tanh();
            }
            x = h[l].clone();
        }
    }
    vecmat(&h[layers - 1], &Mat::named(store, "lstm.proj"))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
