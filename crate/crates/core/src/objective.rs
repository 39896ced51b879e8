//! Vocabulary scoring and the per-word sigmoid cross-entropy loss.

use rd_autodiff::{Session, Tensor, Var};

use crate::vocab::{PAD, UNK};
use crate::{Error, Result};

/// `logits[r][k] = s[r] · table[k]` for every row of `s` (`[n, d]`) and every
/// row of the `[|V|, d]` output table.
pub fn score_vocab(s: &mut Session<'_>, sentence: Var, table: Var) -> Result<Var> {
    Ok(s.tape.matmul_t(sentence, table)?)
}

/// Mean over entries of the stable binary cross-entropy.
pub fn bce_loss(s: &mut Session<'_>, logits: Var, labels: &Tensor) -> Result<Var> {
    Ok(s.tape.bce_with_logits(logits, labels)?)
}

/// `[targets.len(), vocab]` indicator matrix with one 1 per row.
pub fn one_hot_rows(targets: &[usize], vocab: usize) -> Result<Tensor> {
    let mut data = vec![0.0; targets.len() * vocab];
    for (r, &t) in targets.iter().enumerate() {
        if t >= vocab {
            return Err(Error::Contract(format!("label {t} outside vocabulary of {vocab}")));
        }
        data[r * vocab + t] = 1.0;
    }
    Ok(Tensor::new(vec![targets.len(), vocab], data)?)
}

/// The `k` best `(id, logit)` pairs, by descending logit then ascending id.
pub fn topk_predict(scores: &[f64], k: usize) -> Result<Vec<(usize, f64)>> {
    topk_filtered(scores, k, |_| true)
}

/// [`topk_predict`] over the ids that are real words (not `PAD` or `UNK`).
pub fn topk_words(scores: &[f64], k: usize) -> Result<Vec<(usize, f64)>> {
    topk_filtered(scores, k, |id| id != PAD && id != UNK)
}

fn topk_filtered(scores: &[f64], k: usize, keep: impl Fn(usize) -> bool) -> Result<Vec<(usize, f64)>> {
    let mut ids: Vec<usize> = (0..scores.len()).filter(|&i| keep(i)).collect();
    if k == 0 || k > ids.len() {
        return Err(Error::Contract(format!("k = {k} outside 1..={}", ids.len())));
    }
    ids.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    Ok(ids[..k].iter().map(|&i| (i, scores[i])).collect())
}

/// Whether `target` is among the top `k` of `scores` (real words only).
pub fn hit_at_k(scores: &[f64], target: usize, k: usize) -> Result<bool> {
    Ok(topk_words(scores, k)?.iter().any(|&(id, _)| id == target))
}
