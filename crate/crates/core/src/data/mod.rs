//! Corpus ingestion: dictionary text, CoNLL-U parses and polarity sentences
//! in; tokenized, augmented, bucketed and padded examples out.

pub mod augment;
pub mod bucket;
pub mod conllu;
pub mod dataset;
pub mod polarity;
pub mod sequence;
pub mod tokenize;
pub mod webster;

pub use augment::augment_shuffle;
pub use bucket::{bucketize_and_pad, pad_tree, plan_buckets, Bucket, BucketPlan};
pub use conllu::{read_conllu, read_conllu_sentences, ConlluDoc, ConlluSentence};
pub use dataset::{build_dataset, Dataset, Example, PrepareOptions, PrepareStats};
pub use polarity::{load_polarity, split_train_test, Polarity, PolarityExample};
pub use sequence::{pad_sequence, PaddedSequence, MAX_SEQ_LEN};
pub use tokenize::tokenize;
pub use webster::{parse_webster, Definition};
