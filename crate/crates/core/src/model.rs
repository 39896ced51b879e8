//! A vocabulary, its embedding tables, one sentence encoder and an optional
//! classification head, all living in one [`ParamStore`].

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rd_autodiff::{GradStore, ParamId, ParamStore, Session, Tensor, Var};

use crate::encoders::tree_gated::UPOS_TAGS;
use crate::encoders::{
    encode_lstm_batch, encode_tree_gated, encode_tree_shared, EmbeddingTable, GatedTreeParams, LstmParams,
    SharedTreeParams, INIT_SCALE,
};
use crate::objective::score_vocab;
use crate::tree::ParseTree;
use crate::vocab::Vocab;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Lstm,
    TreeShared,
    TreeGated,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Lstm, ModelKind::TreeShared, ModelKind::TreeGated];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Lstm => "lstm",
            ModelKind::TreeShared => "tree_shared",
            ModelKind::TreeGated => "tree_gated",
        }
    }

    pub fn needs_trees(self) -> bool {
        self != ModelKind::Lstm
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| {
            Error::Contract(format!("unknown model kind {s:?} (expected lstm, tree_shared or tree_gated)"))
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub lstm_layers: usize,
    pub gate_hidden: usize,
    pub separate_output: bool,
    pub init_scale: f64,
    /// Tags that get their own matrix in the gated encoder.
    pub pos_tags: Vec<String>,
}

impl ModelConfig {
    pub fn new(kind: ModelKind) -> Self {
        ModelConfig {
            kind,
            embed_dim: 32,
            hidden_dim: 256,
            lstm_layers: 2,
            gate_hidden: 10,
            separate_output: false,
            init_scale: INIT_SCALE,
            pos_tags: UPOS_TAGS.iter().map(|t| t.to_string()).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.embed_dim == 0 || self.hidden_dim == 0 || self.lstm_layers == 0 || self.gate_hidden == 0 {
            return Err(Error::Contract("model dimensions must be positive".into()));
        }
        if !(self.init_scale.is_finite() && self.init_scale >= 0.0) {
            return Err(Error::Contract(format!("bad init scale {}", self.init_scale)));
        }
        Ok(())
    }

    /// `key=value` lines, stable order.
    pub fn to_kv(&self) -> Vec<(String, String)> {
        vec![
            ("model".into(), self.kind.to_string()),
            ("embed_dim".into(), self.embed_dim.to_string()),
            ("hidden_dim".into(), self.hidden_dim.to_string()),
            ("lstm_layers".into(), self.lstm_layers.to_string()),
            ("gate_hidden".into(), self.gate_hidden.to_string()),
            ("separate_output".into(), self.separate_output.to_string()),
            ("init_scale".into(), format!("{:?}", self.init_scale)),
            ("pos_tags".into(), self.pos_tags.join(",")),
        ]
    }

    pub fn from_kv<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let mut cfg = ModelConfig::new(ModelKind::Lstm);
        let mut seen_kind = false;
        for (k, v) in pairs {
            let bad = || Error::Format(format!("bad value {v:?} for {k}"));
            match k {
                "model" => {
                    cfg.kind = v.parse()?;
                    seen_kind = true;
                }
                "embed_dim" => cfg.embed_dim = v.parse().map_err(|_| bad())?,
                "hidden_dim" => cfg.hidden_dim = v.parse().map_err(|_| bad())?,
                "lstm_layers" => cfg.lstm_layers = v.parse().map_err(|_| bad())?,
                "gate_hidden" => cfg.gate_hidden = v.parse().map_err(|_| bad())?,
                "separate_output" => cfg.separate_output = v.parse().map_err(|_| bad())?,
                "init_scale" => cfg.init_scale = v.parse().map_err(|_| bad())?,
                "pos_tags" => {
                    cfg.pos_tags = v.split(',').filter(|t| !t.is_empty()).map(str::to_string).collect();
                }
                _ => {}
            }
        }
        if !seen_kind {
            return Err(Error::Format("model config lacks a model kind".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug)]
pub enum Encoder {
    Lstm(LstmParams),
    Shared(SharedTreeParams),
    Gated(GatedTreeParams),
}

/// Affine head `[1, d] → [1, classes]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classifier {
    pub w: ParamId,
    pub b: ParamId,
    pub classes: usize,
}

/// What an encoder reads: token ids in sentence order, plus the parse for
/// tree models.
#[derive(Clone, Copy, Debug)]
pub struct Input<'a> {
    pub ids: &'a [usize],
    pub tree: Option<&'a ParseTree>,
}

#[derive(Clone, Debug)]
pub struct Model {
    pub config: ModelConfig,
    pub vocab: Vocab,
    pub params: ParamStore,
    pub embed: EmbeddingTable,
    /// Separate output table; `None` when scoring against `embed`.
    pub output: Option<EmbeddingTable>,
    pub encoder: Encoder,
    pub classifier: Option<Classifier>,
}

impl Model {
    /// Fresh parameters drawn from `seed`.
    pub fn new(config: ModelConfig, vocab: Vocab, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamStore::new();
        let (d, scale) = (config.embed_dim, config.init_scale);
        EmbeddingTable::init(&mut params, "embed", vocab.len(), d, scale, &mut rng)?;
        if config.separate_output {
            EmbeddingTable::init(&mut params, "out_embed", vocab.len(), d, scale, &mut rng)?;
        }
        match config.kind {
            ModelKind::Lstm => {
                LstmParams::init(&mut params, d, config.hidden_dim, config.lstm_layers, d, scale, &mut rng)?;
            }
            ModelKind::TreeShared => {
                SharedTreeParams::init(&mut params, d, scale, &mut rng)?;
            }
            ModelKind::TreeGated => {
                GatedTreeParams::init(&mut params, &config.pos_tags, d, config.gate_hidden, scale, &mut rng)?;
            }
        }
        Self::from_parts(config, vocab, params)
    }

    /// Binds an existing parameter set by canonical names.
    pub fn from_parts(config: ModelConfig, vocab: Vocab, params: ParamStore) -> Result<Self> {
        config.validate()?;
        let embed = EmbeddingTable::bind(&params, "embed")?;
        if embed.rows != vocab.len() || embed.dim != config.embed_dim {
            return Err(Error::Contract(format!(
                "embedding table is {}×{}, vocabulary has {} words of dim {}",
                embed.rows,
                embed.dim,
                vocab.len(),
                config.embed_dim
            )));
        }
        let output = match (config.separate_output, params.contains("out_embed")) {
            (true, true) => Some(EmbeddingTable::bind(&params, "out_embed")?),
            (false, false) => None,
            (want, _) => {
                return Err(Error::Contract(format!("separate_output = {want} disagrees with the stored parameters")))
            }
        };
        let encoder = match config.kind {
            ModelKind::Lstm => Encoder::Lstm(LstmParams::bind(&params)?),
            ModelKind::TreeShared => Encoder::Shared(SharedTreeParams::bind(&params)?),
            ModelKind::TreeGated => Encoder::Gated(GatedTreeParams::bind(&params)?),
        };
        let classifier = if params.contains("cls.w") {
            let w = params.id("cls.w")?;
            let classes = params.get(w).dims2()?.1;
            Some(Classifier { w, b: params.id("cls.b")?, classes })
        } else {
            None
        };
        Ok(Model { config, vocab, params, embed, output, encoder, classifier })
    }

    pub fn kind(&self) -> ModelKind {
        self.config.kind
    }

    /// Adds (or resets) a classification head with zero weights and the given
    /// bias.
    pub fn set_classifier(&mut self, bias: &[f64]) -> Result<Classifier> {
        let classes = bias.len();
        let d = self.config.embed_dim;
        let w = Tensor::zeros(vec![d, classes]);
        let b = Tensor::new(vec![1, classes], bias.to_vec())?;
        let cls = match self.classifier {
            Some(c) if c.classes == classes => {
                *self.params.get_mut(c.w) = w;
                *self.params.get_mut(c.b) = b;
                c
            }
            Some(_) => return Err(Error::Contract("classifier already present with another class count".into())),
            None => Classifier { w: self.params.insert("cls.w", w)?, b: self.params.insert("cls.b", b)?, classes },
        };
        self.classifier = Some(cls);
        Ok(cls)
    }

    /// Trainable mask that leaves only the classifier head free.
    pub fn head_only_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.params.len()];
        if let Some(c) = self.classifier {
            mask[c.w.index()] = true;
            mask[c.b.index()] = true;
        }
        mask
    }

    /// `[inputs.len(), d]` sentence embeddings.
    pub fn encode_batch(&self, s: &mut Session<'_>, inputs: &[Input<'_>]) -> Result<Var> {
        match &self.encoder {
            Encoder::Lstm(p) => {
                let seqs: Vec<(&[usize], usize)> = inputs.iter().map(|i| (i.ids, i.ids.len())).collect();
                encode_lstm_batch(s, &seqs, &self.embed, p)
            }
            enc => {
                let mut rows = Vec::with_capacity(inputs.len());
                for input in inputs {
                    let tree = input.tree.ok_or_else(|| {
                        Error::Contract(format!("{} model needs a parse tree for every input", self.kind()))
                    })?;
                    rows.push(match enc {
                        Encoder::Shared(p) => encode_tree_shared(s, tree, &self.embed, p)?,
                        Encoder::Gated(p) => encode_tree_gated(s, tree, &self.embed, p)?,
                        Encoder::Lstm(_) => unreachable!(),
                    });
                }
                if rows.len() == 1 {
                    Ok(rows[0])
                } else {
                    Ok(s.tape.concat_rows(&rows)?)
                }
            }
        }
    }

    pub fn encode(&self, s: &mut Session<'_>, input: Input<'_>) -> Result<Var> {
        self.encode_batch(s, &[input])
    }

    /// Table the sentence embedding is scored against.
    pub fn output_table(&self) -> EmbeddingTable {
        self.output.unwrap_or(self.embed)
    }

    /// `[n, |V|]` logits for `[n, d]` sentence embeddings.
    pub fn scores(&self, s: &mut Session<'_>, sentences: Var) -> Result<Var> {
        let table = self.output_table().var(s);
        score_vocab(s, sentences, table)
    }

    /// `[n, classes]` classifier logits.
    pub fn class_logits(&self, s: &mut Session<'_>, sentences: Var) -> Result<Var> {
        let c = self.classifier.ok_or_else(|| Error::Contract("model has no classifier head".into()))?;
        let (w, b) = (s.param(c.w), s.param(c.b));
        let z = s.tape.matmul(sentences, w)?;
        Ok(s.tape.add_bias(z, b)?)
    }

    /// Keeps the `PAD` rows of both tables out of any update.
    pub fn mask_pad_grads(&self, grads: &mut GradStore) {
        self.embed.mask_pad_grad(grads);
        if let Some(out) = self.output {
            out.mask_pad_grad(grads);
        }
    }

    /// Unseen-POS fallbacks since the last call.
    pub fn take_unseen_pos(&self) -> usize {
        match &self.encoder {
            Encoder::Gated(p) => p.reset_unseen(),
            _ => 0,
        }
    }
}
