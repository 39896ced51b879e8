//! Per-epoch training records.
//!
//! Wall-clock time is kept in memory and in the printed table but left out of
//! the JSON lines, so reruns with the same seed write identical files.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    /// Optimizer steps taken so far.
    pub steps: usize,
    pub loss: f64,
    /// Reverse dictionary: accuracy of the logits seen during the epoch.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub top1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub top3: Option<f64>,
    /// Classifier: accuracy after the epoch.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub train_acc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub test_acc: Option<f64>,
    #[serde(skip)]
    pub seconds: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    /// Examples left out: too deep for any bucket, or no parse for a tree model.
    pub drops: usize,
    /// Sequences cut at the maximum length.
    pub truncations: usize,
    /// Tree nodes whose POS tag fell back to the shared matrix.
    pub unseen_pos: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub examples: usize,
    pub top1: f64,
    pub top3: f64,
    /// Accuracy at the caller's `k`.
    pub k: usize,
    pub topk: f64,
    pub counters: Counters,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Metrics {
    pub epochs: Vec<EpochMetrics>,
    pub counters: Counters,
}

impl Metrics {
    pub fn last(&self) -> Option<&EpochMetrics> {
        self.epochs.last()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.epochs {
            out.push_str(&serde_json::to_string(e).expect("metrics serialize"));
            out.push('\n');
        }
        let counters = serde_json::json!({ "counters": self.counters });
        out.push_str(&counters.to_string());
        out.push('\n');
        out
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let mut f =
            std::fs::File::create(path).map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
        f.write_all(self.to_jsonl().as_bytes())?;
        Ok(())
    }

    /// Human-readable table.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let classifier = self.epochs.iter().any(|e| e.train_acc.is_some());
        if classifier {
            let _ = writeln!(
                out,
                "{:>5} {:>7} {:>10} {:>9} {:>9} {:>8}",
                "epoch", "steps", "loss", "train", "test", "secs"
            );
        } else {
            let _ =
                writeln!(out, "{:>5} {:>7} {:>10} {:>7} {:>7} {:>8}", "epoch", "steps", "loss", "top1", "top3", "secs");
        }
        let pct = |x: Option<f64>| x.map(|v| format!("{:.3}", v)).unwrap_or_else(|| "-".into());
        for e in &self.epochs {
            if classifier {
                let _ = writeln!(
                    out,
                    "{:>5} {:>7} {:>10.6} {:>9} {:>9} {:>8.2}",
                    e.epoch,
                    e.steps,
                    e.loss,
                    pct(e.train_acc),
                    pct(e.test_acc),
                    e.seconds
                );
            } else {
                let _ = writeln!(
                    out,
                    "{:>5} {:>7} {:>10.6} {:>7} {:>7} {:>8.2}",
                    e.epoch,
                    e.steps,
                    e.loss,
                    pct(e.top1),
                    pct(e.top3),
                    e.seconds
                );
            }
        }
        let c = self.counters;
        let _ = writeln!(out, "drops {}  truncations {}  unseen-pos {}", c.drops, c.truncations, c.unseen_pos);
        out
    }
}
