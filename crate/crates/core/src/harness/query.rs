//! Definition → ranked words.

use rd_autodiff::Session;

use crate::data::{pad_sequence, tokenize, ConlluSentence, MAX_SEQ_LEN};
use crate::model::{Input, Model};
use crate::objective::topk_words;
use crate::tree::ParseTree;
use crate::{Error, Result};

/// What a tree model does with a definition that has no parse.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TreeFallback {
    #[default]
    Error,
    /// Treat the first token as the head of every other token.
    Flat,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryToken {
    pub word: String,
    pub oov: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryResult {
    pub tokens: Vec<QueryToken>,
    pub ranked: Vec<(String, f64)>,
}

pub fn query(
    model: &Model,
    text: &str,
    k: usize,
    parse: Option<&ConlluSentence>,
    fallback: TreeFallback,
) -> Result<QueryResult> {
    let words = match parse {
        Some(p) => p.words(),
        None => tokenize(text),
    };
    if words.is_empty() {
        return Err(Error::Contract("definition is empty after tokenization".into()));
    }
    let tokens = words.iter().map(|w| QueryToken { word: w.clone(), oov: model.vocab.get(w).is_none() }).collect();
    let ids = model.vocab.ids_of(&words);
    let tree: Option<ParseTree> = if model.kind().needs_trees() {
        Some(match (parse, fallback) {
            (Some(p), _) => p.to_tree(&model.vocab)?,
            (None, TreeFallback::Flat) => ParseTree::flat(&ids, 0)?,
            (None, TreeFallback::Error) => {
                return Err(Error::Contract(format!("{} model needs a CoNLL-U parse of the definition", model.kind())))
            }
        })
    } else {
        None
    };
    let seq = pad_sequence(&ids, MAX_SEQ_LEN);
    let mut s = Session::frozen(&model.params);
    let sent = model.encode(&mut s, Input { ids: &seq.ids[..seq.len], tree: tree.as_ref() })?;
    let logits = model.scores(&mut s, sent)?;
    let top = topk_words(s.value(logits).data(), k)?;
    let ranked = top.into_iter().map(|(id, score)| (model.vocab.word(id).unwrap_or("?").to_string(), score)).collect();
    Ok(QueryResult { tokens, ranked })
}
