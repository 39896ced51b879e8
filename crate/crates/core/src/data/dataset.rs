//! Reverse-dictionary examples and their line-delimited file format.
//!
//! A dataset file starts with the header line `# revdict-dataset v1`; each
//! following line is one record of three tab-separated fields:
//!
//! 1. headword id
//! 2. gloss ids, space separated
//! 3. the parse tree in nested-parenthesis form (`(id:POS child ...)`,
//!    pad nodes as `-1`), or `-` when the record has none
//!
//! Ids refer to a vocabulary stored next to the dataset as `<file>.vocab`,
//! one word per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::augment::augment_shuffle;
use super::conllu::ConlluDoc;
use super::webster::Definition;
use crate::tree::ParseTree;
use crate::vocab::Vocab;
use crate::{Error, Result};

pub const DATASET_HEADER: &str = "# revdict-dataset v1";

#[derive(Clone, Debug, PartialEq)]
pub struct Example {
    pub headword: usize,
    pub gloss: Vec<usize>,
    pub tree: Option<ParseTree>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub vocab: Vocab,
    pub examples: Vec<Example>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PrepareStats {
    pub definitions: usize,
    pub records: usize,
    /// Definitions whose headword is missing from a supplied vocabulary.
    pub dropped_headwords: usize,
    /// Definitions whose parse was malformed and skipped.
    pub missing_trees: usize,
}

pub struct PrepareOptions<'a> {
    pub parses: Option<&'a ConlluDoc>,
    /// Reuse this vocabulary instead of building one; gloss words outside
    /// it map to `UNK` and unknown headwords drop the record.
    pub vocab: Option<Vocab>,
    pub augment: usize,
    pub seed: u64,
}

impl Default for PrepareOptions<'_> {
    fn default() -> Self {
        PrepareOptions { parses: None, vocab: None, augment: 1, seed: 0 }
    }
}

/// Turns extracted definitions into id-level examples. Parse `k` belongs to
/// definition `k`. Augmented copies carry no tree.
pub fn build_dataset(defs: &[Definition], opts: PrepareOptions<'_>) -> Result<(Dataset, PrepareStats)> {
    super::augment::check_factor(opts.augment)?;
    let mut stats = PrepareStats { definitions: defs.len(), ..Default::default() };
    let fixed_vocab = opts.vocab.is_some();
    let vocab = match opts.vocab {
        Some(v) => v,
        None => {
            let mut v = Vocab::new();
            for d in defs {
                v.add(&d.headword);
                for w in &d.gloss {
                    v.add(w);
                }
            }
            v
        }
    };

    let mut trees: Vec<Option<&_>> = vec![None; defs.len()];
    if let Some(doc) = opts.parses {
        let blocks = doc.sentences.len() + doc.errors.len();
        if blocks != defs.len() {
            return Err(Error::Format(format!("{blocks} parse blocks for {} definitions", defs.len())));
        }
        for s in &doc.sentences {
            if s.words() != defs[s.index].gloss {
                return Err(Error::Format(format!(
                    "parse {} (line {}) does not match definition of {:?} at line {}",
                    s.index, s.line, defs[s.index].headword, defs[s.index].line
                )));
            }
            trees[s.index] = Some(s);
        }
        stats.missing_trees = doc.errors.len();
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut examples = Vec::new();
    for (d, parse) in defs.iter().zip(trees) {
        let headword = match vocab.get(&d.headword) {
            Some(h) => h,
            None if fixed_vocab => {
                stats.dropped_headwords += 1;
                continue;
            }
            None => unreachable!("built vocabularies contain every headword"),
        };
        let gloss = vocab.ids_of(&d.gloss);
        let tree = parse.map(|s| s.to_tree(&vocab)).transpose()?;
        for (k, g) in augment_shuffle(&gloss, opts.augment, &mut rng)?.into_iter().enumerate() {
            examples.push(Example { headword, gloss: g, tree: if k == 0 { tree.clone() } else { None } });
        }
    }
    stats.records = examples.len();
    Ok((Dataset { vocab, examples }, stats))
}

pub fn vocab_path(dataset: &Path) -> PathBuf {
    let mut p = dataset.as_os_str().to_owned();
    p.push(".vocab");
    PathBuf::from(p)
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), source: e }
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn has_trees(&self) -> bool {
        self.examples.iter().all(|e| e.tree.is_some())
    }

    /// Only the examples that carry a parse.
    pub fn with_trees(&self) -> Dataset {
        Dataset {
            vocab: self.vocab.clone(),
            examples: self.examples.iter().filter(|e| e.tree.is_some()).cloned().collect(),
        }
    }

    pub fn write_records<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{DATASET_HEADER}")?;
        for e in &self.examples {
            let gloss: Vec<String> = e.gloss.iter().map(usize::to_string).collect();
            let tree = e.tree.as_ref().map(ParseTree::to_sexpr).unwrap_or_else(|| "-".into());
            writeln!(w, "{}\t{}\t{}", e.headword, gloss.join(" "), tree)?;
        }
        Ok(())
    }

    pub fn read_records<R: BufRead>(r: R, vocab: Vocab) -> Result<Dataset> {
        let mut lines = r.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == DATASET_HEADER => {}
            Some(Err(e)) => return Err(e.into()),
            _ => return Err(Error::Format(format!("missing dataset header {DATASET_HEADER:?}"))),
        }
        let mut examples = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            let lineno = i + 2;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |what: &str| Error::Format(format!("dataset line {lineno}: {what}"));
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(bad("expected 3 tab-separated fields"));
            }
            let id = |s: &str| -> Result<usize> {
                let v: usize = s.parse().map_err(|_| bad(&format!("bad id {s:?}")))?;
                if v >= vocab.len() {
                    return Err(bad(&format!("id {v} outside vocabulary of {}", vocab.len())));
                }
                Ok(v)
            };
            let headword = id(fields[0])?;
            let gloss = fields[1].split_whitespace().map(id).collect::<Result<Vec<_>>>()?;
            if gloss.is_empty() {
                return Err(bad("empty gloss"));
            }
            let tree = match fields[2] {
                "-" => None,
                s => Some(ParseTree::from_sexpr(s).map_err(|e| bad(&e.to_string()))?),
            };
            if let Some(t) = &tree {
                if let Some(&bad_id) = t.tokens().iter().find(|&&t| t >= vocab.len()) {
                    return Err(bad(&format!("tree id {bad_id} outside vocabulary")));
                }
            }
            examples.push(Example { headword, gloss, tree });
        }
        Ok(Dataset { vocab, examples })
    }

    /// Writes `path` and its `.vocab` sidecar.
    pub fn save(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| io_err(path, e))?;
        let mut w = BufWriter::new(f);
        self.write_records(&mut w)?;
        w.flush().map_err(|e| io_err(path, e))?;
        let vp = vocab_path(path);
        let f = File::create(&vp).map_err(|e| io_err(&vp, e))?;
        let mut w = BufWriter::new(f);
        self.vocab.write_to(&mut w)?;
        w.flush().map_err(|e| io_err(&vp, e))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Dataset> {
        let vp = vocab_path(path);
        let vf = File::open(&vp).map_err(|e| io_err(&vp, e))?;
        let vocab = Vocab::read_from(BufReader::new(vf))?;
        let f = File::open(path).map_err(|e| io_err(path, e))?;
        Dataset::read_records(BufReader::new(f), vocab)
    }

    /// Re-expresses the examples in `target`'s ids. Gloss words missing from
    /// `target` become `UNK`; examples whose headword is missing are dropped
    /// and counted.
    pub fn remap(&self, target: &Vocab) -> (Dataset, usize) {
        let map: Vec<usize> = self.vocab.words().iter().map(|w| target.id(w)).collect();
        let mut dropped = 0;
        let examples = self
            .examples
            .iter()
            .filter_map(|e| {
                let word = self.vocab.word(e.headword)?;
                let Some(headword) = target.get(word) else {
                    dropped += 1;
                    return None;
                };
                Some(Example {
                    headword,
                    gloss: e.gloss.iter().map(|&g| map[g]).collect(),
                    tree: e.tree.as_ref().map(|t| t.map_tokens(|g| map[g])),
                })
            })
            .collect();
        (Dataset { vocab: target.clone(), examples }, dropped)
    }
}
