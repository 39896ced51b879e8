use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::{Error, Result};

/// Padding id. Its embedding row is pinned to zero.
pub const PAD: usize = 0;
/// Id for tokens outside the vocabulary.
pub const UNK: usize = 1;

pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";

/// Bidirectional word ↔ id map with `PAD` and `UNK` reserved at 0 and 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocab {
    words: Vec<String>,
    ids: HashMap<String, usize>,
}

impl Default for Vocab {
    fn default() -> Self {
        Self::new()
    }
}

impl Vocab {
    pub fn new() -> Self {
        let mut v = Vocab { words: Vec::new(), ids: HashMap::new() };
        v.words.push(PAD_TOKEN.to_string());
        v.words.push(UNK_TOKEN.to_string());
        v.ids.insert(PAD_TOKEN.to_string(), PAD);
        v.ids.insert(UNK_TOKEN.to_string(), UNK);
        v
    }

    /// Builds a vocabulary in first-occurrence order.
    pub fn from_tokens<'a>(tokens: impl IntoIterator<Item = &'a str>) -> Self {
        let mut v = Vocab::new();
        for t in tokens {
            v.add(t);
        }
        v
    }

    /// Returns the id of `word`, assigning a new one if needed.
    pub fn add(&mut self, word: &str) -> usize {
        if let Some(&id) = self.ids.get(word) {
            return id;
        }
        let id = self.words.len();
        self.words.push(word.to_string());
        self.ids.insert(word.to_string(), id);
        id
    }

    pub fn get(&self, word: &str) -> Option<usize> {
        self.ids.get(word).copied()
    }

    /// Id of `word`, or `UNK`.
    pub fn id(&self, word: &str) -> usize {
        self.get(word).unwrap_or(UNK)
    }

    pub fn ids_of<S: AsRef<str>>(&self, words: &[S]) -> Vec<usize> {
        words.iter().map(|w| self.id(w.as_ref())).collect()
    }

    pub fn word(&self, id: usize) -> Option<&str> {
        self.words.get(id).map(String::as_str)
    }

    /// Number of ids, reserved ones included.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.len() <= 2
    }

    pub fn is_reserved(id: usize) -> bool {
        id == PAD || id == UNK
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// One word per line; the line number is the id.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        for word in &self.words {
            writeln!(w, "{word}")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut words = Vec::new();
        for line in r.lines() {
            words.push(line?);
        }
        Self::from_words(words)
    }

    /// Rebuilds a vocabulary from its id-ordered word list.
    pub fn from_words(words: Vec<String>) -> Result<Self> {
        if words.len() < 2 || words[PAD] != PAD_TOKEN || words[UNK] != UNK_TOKEN {
            return Err(Error::Format("vocabulary must start with <pad> and <unk>".into()));
        }
        let mut ids = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if ids.insert(w.clone(), i).is_some() {
                return Err(Error::Format(format!("duplicate vocabulary entry {w:?}")));
            }
        }
        Ok(Vocab { words, ids })
    }
}
