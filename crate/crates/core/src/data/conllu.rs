//! CoNLL-U ingestion. Only ID, FORM, UPOS and HEAD are used.

use std::io::BufRead;

use crate::tree::ParseTree;
use crate::vocab::Vocab;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConlluSentence {
    /// Position of the sentence block in the file, counting skipped ones.
    pub index: usize,
    /// Line of the first token.
    pub line: usize,
    pub forms: Vec<String>,
    pub upos: Vec<String>,
    pub heads: Vec<usize>,
}

impl ConlluSentence {
    /// Lowercased forms, as they appear in the vocabulary.
    pub fn words(&self) -> Vec<String> {
        self.forms.iter().map(|f| f.to_lowercase()).collect()
    }

    pub fn to_tree(&self, vocab: &Vocab) -> Result<ParseTree> {
        let ids = vocab.ids_of(&self.words());
        ParseTree::from_heads(&ids, &self.upos, &self.heads)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SentenceError {
    pub index: usize,
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for SentenceError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "sentence {} (line {}): {}", self.index, self.line, self.message)
    }
}

#[derive(Clone, Debug, Default)]
pub struct ConlluDoc {
    pub sentences: Vec<ConlluSentence>,
    /// Sentences that were skipped, with the reason.
    pub errors: Vec<SentenceError>,
}

struct Block {
    line: usize,
    rows: Vec<(usize, String)>,
}

fn parse_block(index: usize, block: &Block) -> std::result::Result<ConlluSentence, SentenceError> {
    let fail = |line: usize, message: String| SentenceError { index, line, message };
    let mut s = ConlluSentence { index, line: block.line, forms: vec![], upos: vec![], heads: vec![] };
    let mut token_lines = Vec::new();
    for (line, row) in &block.rows {
        let cols: Vec<&str> = row.split('\t').collect();
        if cols.len() != 10 {
            return Err(fail(*line, format!("expected 10 tab-separated columns, found {}", cols.len())));
        }
        // multiword ranges (3-4) and empty nodes (5.1) carry no tree structure
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let id: usize = cols[0].parse().map_err(|_| fail(*line, format!("bad ID {:?}", cols[0])))?;
        if id != s.forms.len() + 1 {
            return Err(fail(*line, format!("ID {id} out of sequence")));
        }
        let head: usize = cols[6].parse().map_err(|_| fail(*line, format!("bad HEAD {:?}", cols[6])))?;
        s.forms.push(cols[1].to_string());
        s.upos.push(cols[3].to_string());
        s.heads.push(head);
        token_lines.push(*line);
    }
    if s.forms.is_empty() {
        return Err(fail(block.line, "sentence has no tokens".into()));
    }
    let n = s.forms.len();
    for (k, &h) in s.heads.iter().enumerate() {
        if h > n {
            return Err(fail(token_lines[k], format!("HEAD {h} out of range for {n} tokens")));
        }
    }
    let placeholder = vec![0usize; n];
    ParseTree::from_heads(&placeholder, &s.upos, &s.heads).map_err(|e| match e {
        Error::Structure(m) => fail(block.line, m),
        other => fail(block.line, other.to_string()),
    })?;
    Ok(s)
}

/// Reads every sentence block. Malformed sentences are skipped and reported
/// in [`ConlluDoc::errors`]; only I/O failures abort.
pub fn read_conllu_sentences<R: BufRead>(reader: R) -> Result<ConlluDoc> {
    let mut doc = ConlluDoc::default();
    let mut block: Option<Block> = None;
    let mut index = 0;
    let mut finish = |block: Block, doc: &mut ConlluDoc| {
        match parse_block(index, &block) {
            Ok(s) => doc.sentences.push(s),
            Err(e) => doc.errors.push(e),
        }
        index += 1;
    };
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            if let Some(b) = block.take() {
                finish(b, &mut doc);
            }
        } else if line.starts_with('#') {
            continue;
        } else {
            block.get_or_insert_with(|| Block { line: lineno, rows: Vec::new() }).rows.push((lineno, line));
        }
    }
    if let Some(b) = block.take() {
        finish(b, &mut doc);
    }
    Ok(doc)
}

/// Trees for every well-formed sentence, with forms mapped through `vocab`
/// (`UNK` for misses).
pub fn read_conllu<R: BufRead>(reader: R, vocab: &Vocab) -> Result<(Vec<ParseTree>, Vec<SentenceError>)> {
    let doc = read_conllu_sentences(reader)?;
    let trees = doc.sentences.iter().map(|s| s.to_tree(vocab)).collect::<Result<Vec<_>>>()?;
    Ok((trees, doc.errors))
}

/// Writes sentences back out; columns other than ID, FORM, UPOS and HEAD are `_`.
pub fn write_conllu<W: std::io::Write>(mut w: W, sentences: &[ConlluSentence]) -> Result<()> {
    for s in sentences {
        for k in 0..s.forms.len() {
            writeln!(w, "{}\t{}\t_\t{}\t_\t_\t{}\t_\t_\t_", k + 1, s.forms[k], s.upos[k], s.heads[k])?;
        }
        writeln!(w)?;
    }
    Ok(())
}
