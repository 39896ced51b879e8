//! Training loops, evaluation, transfer classification and checkpoints.

pub mod checkpoint;
pub mod classify;
pub mod config;
pub mod metrics;
pub mod query;
pub mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_VERSION};
pub use classify::{classifier_accuracy, train_classifier, ClassifyMode};
pub use config::{parse_kv, TrainConfig};
pub use metrics::{Counters, EpochMetrics, EvalReport, Metrics};
pub use query::{query, QueryResult, QueryToken, TreeFallback};
pub use train::{evaluate_topk, train_model, train_reverse_dict};
