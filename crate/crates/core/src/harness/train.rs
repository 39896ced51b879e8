//! Reverse-dictionary training and top-k evaluation.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rd_autodiff::{Optimizer, Session};

use super::checkpoint::Checkpoint;
use super::config::TrainConfig;
use super::metrics::{Counters, EpochMetrics, EvalReport, Metrics};
use crate::data::{augment_shuffle, pad_sequence, plan_buckets, Dataset, Example};
use crate::model::{Input, Model};
use crate::objective::{bce_loss, hit_at_k, one_hot_rows};
use crate::tree::ParseTree;
use crate::{Error, Result};

/// One encodable example: ids already cut to the maximum length.
#[derive(Clone, Debug)]
pub(crate) struct Item {
    pub ids: Vec<usize>,
    pub tree: Option<ParseTree>,
    pub target: usize,
}

impl Item {
    pub fn input(&self) -> Input<'_> {
        Input { ids: &self.ids, tree: self.tree.as_ref() }
    }
}

/// Turns examples into items the model can encode, counting what is lost.
/// Tree models skip examples without a tree or deeper than the last bucket.
pub(crate) fn prepare_items(
    needs_trees: bool,
    max_len: usize,
    examples: impl IntoIterator<Item = (Vec<usize>, Option<ParseTree>, usize)>,
    counters: &mut Counters,
) -> Vec<Item> {
    let mut items = Vec::new();
    for (gloss, tree, target) in examples {
        if gloss.is_empty() {
            counters.drops += 1;
            continue;
        }
        if needs_trees {
            match tree {
                Some(t) if crate::data::bucket::bucket_for_depth(t.depth()).is_some() => {
                    items.push(Item { ids: gloss, tree: Some(t), target });
                }
                _ => counters.drops += 1,
            }
        } else {
            let p = pad_sequence(&gloss, max_len);
            counters.truncations += p.truncated as usize;
            items.push(Item { ids: p.ids[..p.len].to_vec(), tree: None, target });
        }
    }
    items
}

/// Epoch order: shuffled batches for sequences; for trees, buckets in
/// shuffled order with shuffled members, so consecutive steps see trees of
/// similar shape.
pub(crate) fn epoch_order(items: &[Item], trees: bool, rng: &mut ChaCha8Rng) -> Vec<usize> {
    if !trees {
        let mut idx: Vec<usize> = (0..items.len()).collect();
        idx.shuffle(rng);
        return idx;
    }
    let shapes: Vec<ParseTree> = items.iter().map(|i| i.tree.clone().expect("tree items")).collect();
    let mut plan = plan_buckets(&shapes);
    plan.buckets.shuffle(rng);
    let mut order = Vec::with_capacity(items.len());
    for b in &mut plan.buckets {
        b.members.shuffle(rng);
        order.extend_from_slice(&b.members);
    }
    order
}

fn augmented(data: &Dataset, factor: usize, seed: u64) -> Result<Vec<Example>> {
    if factor == 1 {
        return Ok(data.examples.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(data.len() * factor);
    for e in &data.examples {
        for (k, g) in augment_shuffle(&e.gloss, factor, &mut rng)?.into_iter().enumerate() {
            out.push(Example { headword: e.headword, gloss: g, tree: if k == 0 { e.tree.clone() } else { None } });
        }
    }
    Ok(out)
}

/// Trains a fresh model on `data` and returns its checkpoint.
pub fn train_reverse_dict(data: &Dataset, config: &TrainConfig) -> Result<(Checkpoint, Metrics)> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::Contract("training set is empty".into()));
    }
    let kind = config.model.kind;
    if kind.needs_trees() && !data.has_trees() {
        return Err(Error::Contract(format!("{kind} model needs parse trees but the dataset carries none")));
    }
    let model = Model::new(config.model.clone(), data.vocab.clone(), config.seed)?;
    train_model(model, data, config)
}

/// Continues training `model` (its vocabulary must be `data`'s).
pub fn train_model(mut model: Model, data: &Dataset, config: &TrainConfig) -> Result<(Checkpoint, Metrics)> {
    if model.vocab != data.vocab {
        return Err(Error::Contract("dataset vocabulary differs from the model's".into()));
    }
    let trees = model.kind().needs_trees();
    let mut metrics = Metrics::default();
    let examples = augmented(data, config.augment, config.shuffle_seed())?;
    let items = prepare_items(
        trees,
        config.max_len,
        examples.into_iter().map(|e| (e.gloss, e.tree, e.headword)),
        &mut metrics.counters,
    );
    if items.is_empty() {
        return Err(Error::Contract("no usable training examples".into()));
    }

    let vocab_size = model.vocab.len();
    let batch = config.batch_size();
    let mut rng = ChaCha8Rng::seed_from_u64(config.shuffle_seed());
    let mut opt = Optimizer::new(config.optimizer, model.params.len());
    let mut steps = 0usize;
    let budget = config.max_steps.unwrap_or(usize::MAX);
    model.take_unseen_pos();

    for epoch in 1..=config.epochs {
        if steps >= budget {
            break;
        }
        let start = Instant::now();
        let order = epoch_order(&items, trees, &mut rng);
        let (mut loss_sum, mut batches, mut seen, mut hit1, mut hit3) = (0.0, 0usize, 0usize, 0usize, 0usize);
        for chunk in order.chunks(batch) {
            if steps >= budget {
                break;
            }
            let targets: Vec<usize> = chunk.iter().map(|&i| items[i].target).collect();
            let inputs: Vec<Input<'_>> = chunk.iter().map(|&i| items[i].input()).collect();
            let mut grads = {
                let mut s = Session::new(&model.params);
                let sent = model.encode_batch(&mut s, &inputs)?;
                let logits = model.scores(&mut s, sent)?;
                let loss = bce_loss(&mut s, logits, &one_hot_rows(&targets, vocab_size)?)?;
                loss_sum += s.value(loss).item()?;
                let scores = s.value(logits);
                for (r, &t) in targets.iter().enumerate() {
                    let row = scores.row_slice(r);
                    hit1 += hit_at_k(row, t, 1)? as usize;
                    hit3 += hit_at_k(row, t, 3.min(vocab_size - 2))? as usize;
                }
                s.backward(loss)?
            };
            model.mask_pad_grads(&mut grads);
            opt.step(&mut model.params, &grads)?;
            steps += 1;
            batches += 1;
            seen += chunk.len();
        }
        if batches == 0 {
            break;
        }
        metrics.epochs.push(EpochMetrics {
            epoch,
            steps,
            loss: loss_sum / batches as f64,
            top1: Some(hit1 as f64 / seen as f64),
            top3: Some(hit3 as f64 / seen as f64),
            seconds: start.elapsed().as_secs_f64(),
            ..Default::default()
        });
    }
    metrics.counters.unseen_pos += model.take_unseen_pos();
    Ok((Checkpoint { config: config.clone(), model, step: steps as u64 }, metrics))
}

/// Rank of the headword among real words for every usable example of `test`,
/// remapped into the model's vocabulary first.
pub fn evaluate_topk(model: &Model, test: &Dataset, k: usize) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::Contract("test set is empty".into()));
    }
    let mut counters = Counters::default();
    let (test, dropped) = if test.vocab == model.vocab { (test.clone(), 0) } else { test.remap(&model.vocab) };
    counters.drops += dropped;
    let items = prepare_items(
        model.kind().needs_trees(),
        crate::data::MAX_SEQ_LEN,
        test.examples.into_iter().map(|e| (e.gloss, e.tree, e.headword)),
        &mut counters,
    );
    if items.is_empty() {
        return Err(Error::Contract("no usable test examples".into()));
    }
    let words = model.vocab.len() - 2;
    if k == 0 || k > words {
        return Err(Error::Contract(format!("k = {k} outside 1..={words}")));
    }
    model.take_unseen_pos();
    let (mut hit1, mut hit3, mut hitk) = (0usize, 0usize, 0usize);
    for chunk in items.chunks(64) {
        let mut s = Session::frozen(&model.params);
        let inputs: Vec<Input<'_>> = chunk.iter().map(Item::input).collect();
        let sent = model.encode_batch(&mut s, &inputs)?;
        let logits = model.scores(&mut s, sent)?;
        let scores = s.value(logits);
        for (r, item) in chunk.iter().enumerate() {
            let row = scores.row_slice(r);
            hit1 += hit_at_k(row, item.target, 1)? as usize;
            hit3 += hit_at_k(row, item.target, 3.min(words))? as usize;
            hitk += hit_at_k(row, item.target, k)? as usize;
        }
    }
    counters.unseen_pos += model.take_unseen_pos();
    let n = items.len() as f64;
    Ok(EvalReport {
        examples: items.len(),
        top1: hit1 as f64 / n,
        top3: hit3 as f64 / n,
        k,
        topk: hitk as f64 / n,
        counters,
    })
}
