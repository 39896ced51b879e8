use std::io::BufRead;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::conllu::ConlluDoc;
use super::tokenize::tokenize;
use crate::data::conllu::ConlluSentence;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarity {
    Negative,
    Positive,
}

impl Polarity {
    /// Output column of the classifier.
    pub fn index(self) -> usize {
        match self {
            Polarity::Negative => 0,
            Polarity::Positive => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 1 {
            Polarity::Positive
        } else {
            Polarity::Negative
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolarityExample {
    pub tokens: Vec<String>,
    pub label: Polarity,
    /// Dependency parse, needed only by the tree encoders.
    pub parse: Option<ConlluSentence>,
}

fn read_lines<R: BufRead>(r: R, label: Polarity, what: &str) -> Result<Vec<PolarityExample>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(PolarityExample { tokens: tokenize(&line), label, parse: None });
    }
    if out.is_empty() {
        return Err(Error::Format(format!("{what} polarity file has no sentences")));
    }
    Ok(out)
}

/// One sentence per non-blank line; positives first, then negatives.
pub fn load_polarity<P: BufRead, N: BufRead>(pos: P, neg: N) -> Result<Vec<PolarityExample>> {
    let mut out = read_lines(pos, Polarity::Positive, "positive")?;
    out.extend(read_lines(neg, Polarity::Negative, "negative")?);
    Ok(out)
}

/// Attaches parses, in order, to the examples carrying `label`.
pub fn attach_parses(examples: &mut [PolarityExample], label: Polarity, doc: &ConlluDoc) -> Result<()> {
    let targets: Vec<&mut PolarityExample> = examples.iter_mut().filter(|e| e.label == label).collect();
    let blocks = doc.sentences.len() + doc.errors.len();
    if blocks != targets.len() {
        return Err(Error::Format(format!("{} parse blocks for {} {label:?} sentences", blocks, targets.len())));
    }
    let mut targets = targets;
    for s in &doc.sentences {
        let ex = &mut targets[s.index];
        if s.words() != ex.tokens {
            return Err(Error::Format(format!("parse {} (line {}) does not match sentence tokens", s.index, s.line)));
        }
        ex.parse = Some(s.clone());
    }
    Ok(())
}

/// Deterministic shuffled split; returns `(train, test)`.
pub fn split_train_test<T: Clone>(items: &[T], test_fraction: f64, seed: u64) -> (Vec<T>, Vec<T>) {
    let mut idx: Vec<usize> = (0..items.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_test = ((items.len() as f64) * test_fraction).round() as usize;
    let n_test = n_test.min(items.len());
    let test = idx[..n_test].iter().map(|&i| items[i].clone()).collect();
    let train = idx[n_test..].iter().map(|&i| items[i].clone()).collect();
    (train, test)
}
