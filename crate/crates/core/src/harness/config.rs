//! Training configuration and its flat `key=value` text form.

use rd_autodiff::{AdamConfig, OptimizerKind};

use crate::data::augment::check_factor;
use crate::data::MAX_SEQ_LEN;
use crate::model::{ModelConfig, ModelKind};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub model: ModelConfig,
    /// Shuffled copies per definition (including the original).
    pub augment: usize,
    pub optimizer: OptimizerKind,
    pub epochs: usize,
    /// Stops after this many optimizer steps even mid-epoch.
    pub max_steps: Option<usize>,
    /// `None` picks 1 for tree models and 32 for the LSTM.
    pub batch_size: Option<usize>,
    /// Parameter initialization.
    pub seed: u64,
    /// Epoch shuffling and augmentation; derived from `seed` when unset.
    pub shuffle_seed: Option<u64>,
    pub max_len: usize,
}

impl TrainConfig {
    pub fn new(kind: ModelKind) -> Self {
        TrainConfig {
            model: ModelConfig::new(kind),
            augment: 1,
            optimizer: OptimizerKind::Adam(AdamConfig::default()),
            epochs: 10,
            max_steps: None,
            batch_size: None,
            seed: 0,
            shuffle_seed: None,
            max_len: MAX_SEQ_LEN,
        }
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size.unwrap_or(if self.model.kind.needs_trees() { 1 } else { 32 })
    }

    pub fn shuffle_seed(&self) -> u64 {
        self.shuffle_seed.unwrap_or_else(|| self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1))
    }

    pub fn lr(&self) -> f64 {
        match self.optimizer {
            OptimizerKind::Adam(c) => c.lr,
            OptimizerKind::Sgd { lr } => lr,
        }
    }

    pub fn set_lr(&mut self, lr: f64) {
        match &mut self.optimizer {
            OptimizerKind::Adam(c) => c.lr = lr,
            OptimizerKind::Sgd { lr: l } => *l = lr,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        check_factor(self.augment)?;
        if self.batch_size == Some(0) || self.max_len == 0 {
            return Err(Error::Contract("batch size and max length must be positive".into()));
        }
        let lr = self.lr();
        if !(lr.is_finite() && lr >= 0.0) {
            return Err(Error::Contract(format!("learning rate must be finite and non-negative, got {lr}")));
        }
        Ok(())
    }

    pub fn to_kv(&self) -> Vec<(String, String)> {
        let mut kv = self.model.to_kv();
        let mut push = |k: &str, v: String| kv.push((k.to_string(), v));
        push("augment", self.augment.to_string());
        match self.optimizer {
            OptimizerKind::Adam(c) => {
                push("optimizer", "adam".into());
                push("lr", format!("{:?}", c.lr));
                push("beta1", format!("{:?}", c.beta1));
                push("beta2", format!("{:?}", c.beta2));
                push("eps", format!("{:?}", c.eps));
            }
            OptimizerKind::Sgd { lr } => {
                push("optimizer", "sgd".into());
                push("lr", format!("{lr:?}"));
            }
        }
        push("epochs", self.epochs.to_string());
        if let Some(m) = self.max_steps {
            push("max_steps", m.to_string());
        }
        if let Some(b) = self.batch_size {
            push("batch_size", b.to_string());
        }
        push("seed", self.seed.to_string());
        if let Some(s) = self.shuffle_seed {
            push("shuffle_seed", s.to_string());
        }
        push("max_len", self.max_len.to_string());
        kv
    }

    pub fn to_text(&self) -> String {
        self.to_kv().into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// Reads `key=value` lines; `#` starts a comment line. Unknown keys are
    /// an error.
    pub fn from_text(text: &str) -> Result<Self> {
        let pairs = parse_kv(text)?;
        Self::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)> + Clone) -> Result<Self> {
        let model = ModelConfig::from_kv(pairs.clone())?;
        let mut cfg = TrainConfig::new(model.kind);
        cfg.model = model;
        let mut adam = AdamConfig::default();
        let mut sgd = false;
        let mut lr = None;
        for (k, v) in pairs {
            let bad = || Error::Format(format!("bad value {v:?} for {k}"));
            match k {
                "model" | "embed_dim" | "hidden_dim" | "lstm_layers" | "gate_hidden" | "separate_output"
                | "init_scale" | "pos_tags" => {}
                "augment" => cfg.augment = v.parse().map_err(|_| bad())?,
                "optimizer" => {
                    sgd = match v {
                        "adam" => false,
                        "sgd" => true,
                        _ => return Err(bad()),
                    }
                }
                "lr" => lr = Some(v.parse().map_err(|_| bad())?),
                "beta1" => adam.beta1 = v.parse().map_err(|_| bad())?,
                "beta2" => adam.beta2 = v.parse().map_err(|_| bad())?,
                "eps" => adam.eps = v.parse().map_err(|_| bad())?,
                "epochs" => cfg.epochs = v.parse().map_err(|_| bad())?,
                "max_steps" => cfg.max_steps = Some(v.parse().map_err(|_| bad())?),
                "batch_size" => cfg.batch_size = Some(v.parse().map_err(|_| bad())?),
                "seed" => cfg.seed = v.parse().map_err(|_| bad())?,
                "shuffle_seed" => cfg.shuffle_seed = Some(v.parse().map_err(|_| bad())?),
                "max_len" => cfg.max_len = v.parse().map_err(|_| bad())?,
                _ => return Err(Error::Format(format!("unknown config key {k:?}"))),
            }
        }
        if let Some(lr) = lr {
            adam.lr = lr;
        }
        cfg.optimizer = if sgd { OptimizerKind::Sgd { lr: adam.lr } } else { OptimizerKind::Adam(adam) };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// `key=value` lines in file order. Blank lines and `#` comments are skipped.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("line {}: expected key=value, got {line:?}", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut cfg = TrainConfig::new(ModelKind::TreeShared);
        cfg.max_steps = Some(70);
        cfg.shuffle_seed = Some(4);
        cfg.set_lr(0.003);
        let back = TrainConfig::from_text(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);

        cfg.optimizer = OptimizerKind::Sgd { lr: 0.5 };
        assert_eq!(TrainConfig::from_text(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn defaults_follow_model_kind() {
        assert_eq!(TrainConfig::new(ModelKind::Lstm).batch_size(), 32);
        assert_eq!(TrainConfig::new(ModelKind::TreeGated).batch_size(), 1);
        let c = TrainConfig::new(ModelKind::Lstm);
        assert_ne!(c.shuffle_seed(), c.seed);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_factor() {
        assert!(TrainConfig::from_text("model=lstm\nfoo=1\n").is_err());
        assert!(TrainConfig::from_text("model=lstm\naugment=3\n").is_err());
        assert!(TrainConfig::from_text("model=lstm\nlr=-1\n").is_err());
        assert!(TrainConfig::from_text("model=lstm\n# comment\n\nepochs = 3\n").is_ok());
    }
}
