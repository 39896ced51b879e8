//! Binary sentence classification on top of a sentence encoder.
//!
//! The head is one affine layer over the sentence embedding with two sigmoid
//! outputs. Its weights start at zero and its bias at the training split's
//! class log-odds, so an untrained head predicts the majority class.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rd_autodiff::{Optimizer, Session};

use super::checkpoint::Checkpoint;
use super::config::TrainConfig;
use super::metrics::{Counters, EpochMetrics, Metrics};
use super::train::{epoch_order, prepare_items, Item};
use crate::data::{Polarity, PolarityExample};
use crate::model::{Input, Model};
use crate::objective::{bce_loss, one_hot_rows};
use crate::vocab::Vocab;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassifyMode {
    /// Fresh model, everything trained.
    EndToEnd,
    /// Base model fixed; only the head is trained.
    Frozen,
    /// Base model as the starting point; everything trained.
    FineTune,
}

impl ClassifyMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassifyMode::EndToEnd => "end_to_end",
            ClassifyMode::Frozen => "frozen",
            ClassifyMode::FineTune => "fine_tune",
        }
    }
}

impl fmt::Display for ClassifyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "end_to_end" => Ok(ClassifyMode::EndToEnd),
            "frozen" => Ok(ClassifyMode::Frozen),
            "fine_tune" => Ok(ClassifyMode::FineTune),
            _ => Err(Error::Contract(format!("unknown mode {s:?} (expected end_to_end, frozen or fine_tune)"))),
        }
    }
}

fn items(model: &Model, examples: &[PolarityExample], max_len: usize, counters: &mut Counters) -> Result<Vec<Item>> {
    let needs_trees = model.kind().needs_trees();
    let mut rows = Vec::with_capacity(examples.len());
    for e in examples {
        let tree = match (&e.parse, needs_trees) {
            (Some(p), true) => Some(p.to_tree(&model.vocab)?),
            _ => None,
        };
        rows.push((model.vocab.ids_of(&e.tokens), tree, e.label.index()));
    }
    Ok(prepare_items(needs_trees, max_len, rows, counters))
}

fn class_prior_bias(items: &[Item]) -> [f64; 2] {
    let pos = items.iter().filter(|i| i.target == Polarity::Positive.index()).count() as f64;
    let n = items.len() as f64;
    // smoothed so a one-class split still gives a finite bias
    let p = (pos + 0.5) / (n + 1.0);
    let logit = (p / (1.0 - p)).ln();
    let mut b = [0.0; 2];
    b[Polarity::Positive.index()] = logit;
    b[Polarity::Negative.index()] = -logit;
    b
}

/// Fraction of `items` whose larger head output is the true class.
pub(crate) fn accuracy(model: &Model, items: &[Item]) -> Result<f64> {
    let mut correct = 0usize;
    for chunk in items.chunks(64) {
        let mut s = Session::frozen(&model.params);
        let inputs: Vec<Input<'_>> = chunk.iter().map(Item::input).collect();
        let sent = model.encode_batch(&mut s, &inputs)?;
        let logits = model.class_logits(&mut s, sent)?;
        let v = s.value(logits);
        for (r, item) in chunk.iter().enumerate() {
            let row = v.row_slice(r);
            let pred = if row[1] > row[0] { 1 } else { 0 };
            correct += (pred == item.target) as usize;
        }
    }
    Ok(correct as f64 / items.len().max(1) as f64)
}

/// Trains the classification head (and, outside frozen mode, the encoder).
///
/// End-to-end models take their vocabulary from the training split; frozen
/// and fine-tuned ones keep the base model's vocabulary and configuration.
pub fn train_classifier(
    train: &[PolarityExample],
    test: &[PolarityExample],
    mode: ClassifyMode,
    base: Option<&Checkpoint>,
    config: &TrainConfig,
) -> Result<(Checkpoint, Metrics)> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::Contract("classifier training split is empty".into()));
    }
    let mut model = match (mode, base) {
        (ClassifyMode::EndToEnd, _) => {
            let vocab = Vocab::from_tokens(train.iter().flat_map(|e| e.tokens.iter().map(String::as_str)));
            Model::new(config.model.clone(), vocab, config.seed)?
        }
        (_, Some(b)) => b.model.clone(),
        (_, None) => return Err(Error::Contract(format!("{mode} mode needs a base checkpoint"))),
    };
    let mut config = config.clone();
    config.model = model.config.clone();

    let mut metrics = Metrics::default();
    let train_items = items(&model, train, config.max_len, &mut metrics.counters)?;
    let test_items = items(&model, test, config.max_len, &mut metrics.counters)?;
    if train_items.is_empty() {
        return Err(Error::Contract(format!("no usable training sentences for a {} model", model.kind())));
    }
    model.set_classifier(&class_prior_bias(&train_items))?;

    let mask = match mode {
        ClassifyMode::Frozen => model.head_only_mask(),
        _ => vec![true; model.params.len()],
    };
    let trees = model.kind().needs_trees();
    let batch = config.batch_size();
    let mut rng = ChaCha8Rng::seed_from_u64(config.shuffle_seed());
    let mut opt = Optimizer::new(config.optimizer, model.params.len());
    let budget = config.max_steps.unwrap_or(usize::MAX);
    let mut steps = 0usize;
    model.take_unseen_pos();

    for epoch in 1..=config.epochs {
        if steps >= budget {
            break;
        }
        let start = Instant::now();
        let order = epoch_order(&train_items, trees, &mut rng);
        let (mut loss_sum, mut batches) = (0.0, 0usize);
        for chunk in order.chunks(batch) {
            if steps >= budget {
                break;
            }
            let targets: Vec<usize> = chunk.iter().map(|&i| train_items[i].target).collect();
            let inputs: Vec<Input<'_>> = chunk.iter().map(|&i| train_items[i].input()).collect();
            let mut grads = {
                let mut s = Session::with_trainable(&model.params, &mask);
                let sent = model.encode_batch(&mut s, &inputs)?;
                let logits = model.class_logits(&mut s, sent)?;
                let loss = bce_loss(&mut s, logits, &one_hot_rows(&targets, 2)?)?;
                loss_sum += s.value(loss).item()?;
                s.backward(loss)?
            };
            model.mask_pad_grads(&mut grads);
            opt.step(&mut model.params, &grads)?;
            steps += 1;
            batches += 1;
        }
        if batches == 0 {
            break;
        }
        let train_acc = accuracy(&model, &train_items)?;
        let test_acc = if test_items.is_empty() { None } else { Some(accuracy(&model, &test_items)?) };
        metrics.epochs.push(EpochMetrics {
            epoch,
            steps,
            loss: loss_sum / batches as f64,
            train_acc: Some(train_acc),
            test_acc,
            seconds: start.elapsed().as_secs_f64(),
            ..Default::default()
        });
    }
    metrics.counters.unseen_pos += model.take_unseen_pos();
    Ok((Checkpoint { config, model, step: steps as u64 }, metrics))
}

/// Accuracy of a classifier checkpoint on labelled sentences.
pub fn classifier_accuracy(model: &Model, examples: &[PolarityExample], max_len: usize) -> Result<(f64, Counters)> {
    let mut counters = Counters::default();
    let items = items(model, examples, max_len, &mut counters)?;
    if items.is_empty() {
        return Err(Error::Contract("no usable sentences".into()));
    }
    Ok((accuracy(model, &items)?, counters))
}
