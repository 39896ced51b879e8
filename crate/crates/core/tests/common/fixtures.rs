//! Loaders for the committed files under `fixtures/`.
#![allow(dead_code)]

use std::collections::HashSet;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use revdict::data::polarity::attach_parses;
use revdict::data::{
    build_dataset, load_polarity, parse_webster, read_conllu_sentences, ConlluDoc, Dataset, Definition, Polarity,
    PolarityExample, PrepareOptions,
};
use revdict::Vocab;

pub fn path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

fn open(rel: &str) -> BufReader<File> {
    BufReader::new(File::open(path(rel)).unwrap_or_else(|e| panic!("{rel}: {e}")))
}

pub fn definitions(rel: &str) -> (Vec<Definition>, ConlluDoc) {
    let defs = parse_webster(open(rel)).unwrap();
    let conllu = rel.replace(".txt", ".conllu");
    let doc = read_conllu_sentences(open(&conllu)).unwrap();
    assert!(doc.errors.is_empty(), "{conllu}: {:?}", doc.errors);
    (defs, doc)
}

/// Headwords in order of first appearance.
pub fn headwords(defs: &[Definition]) -> Vec<String> {
    let mut seen = HashSet::new();
    defs.iter().filter(|d| seen.insert(d.headword.clone())).map(|d| d.headword.clone()).collect()
}

/// Definitions (and their parses) whose headword is in `keep`.
pub fn restrict(defs: &[Definition], doc: &ConlluDoc, keep: &HashSet<String>) -> (Vec<Definition>, ConlluDoc) {
    let mut out_defs = Vec::new();
    let mut out_doc = ConlluDoc::default();
    for (d, s) in defs.iter().zip(&doc.sentences) {
        if keep.contains(&d.headword) {
            let mut s = s.clone();
            s.index = out_defs.len();
            out_doc.sentences.push(s);
            out_defs.push(d.clone());
        }
    }
    (out_defs, out_doc)
}

/// Training dictionary over the first `n_headwords` headwords and the
/// paraphrase test set restricted to those headwords, in the training
/// vocabulary.
pub fn reverse_dictionary(n_headwords: usize, augment: usize, seed: u64) -> (Dataset, Dataset) {
    let (defs, doc) = definitions("webster_144.txt");
    let keep: HashSet<String> = headwords(&defs).into_iter().take(n_headwords).collect();
    let (defs, doc) = restrict(&defs, &doc, &keep);
    let (train, _) =
        build_dataset(&defs, PrepareOptions { parses: Some(&doc), augment, seed, ..Default::default() }).unwrap();
    let (tdefs, tdoc) = definitions("paraphrase_test_30.txt");
    let (tdefs, tdoc) = restrict(&tdefs, &tdoc, &keep);
    let (test, _) = build_dataset(
        &tdefs,
        PrepareOptions { parses: Some(&tdoc), vocab: Some(train.vocab.clone()), ..Default::default() },
    )
    .unwrap();
    (train, test)
}

pub fn polarity() -> Vec<PolarityExample> {
    let mut ex = load_polarity(open("polarity/pos.txt"), open("polarity/neg.txt")).unwrap();
    for (label, file) in [(Polarity::Positive, "polarity/pos.conllu"), (Polarity::Negative, "polarity/neg.conllu")] {
        let doc = read_conllu_sentences(open(file)).unwrap();
        attach_parses(&mut ex, label, &doc).unwrap();
    }
    ex
}

pub fn dictionary_vocab() -> Vocab {
    let (defs, doc) = definitions("webster_144.txt");
    build_dataset(&defs, PrepareOptions { parses: Some(&doc), ..Default::default() }).unwrap().0.vocab
}
