use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EtmError;

/// Hyperparameters of the embedded topic model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtmConfig {
    pub topics: usize,
    pub embedding_dim: usize,
    pub hidden: usize,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Train the word embeddings jointly; off keeps the pretrained vectors.
    pub train_rho: bool,
    pub lambda_default: f64,
}

impl Default for EtmConfig {
    fn default() -> Self {
        Self {
            topics: 20,
            embedding_dim: 300,
            hidden: 800,
            lr: 0.005,
            epochs: 200,
            batch_size: 64,
            seed: 0,
            train_rho: false,
            lambda_default: 0.5,
        }
    }
}

pub const CONFIG_KEYS: &[&str] = &[
    "topics",
    "embedding_dim",
    "hidden",
    "lr",
    "epochs",
    "batch_size",
    "seed",
    "train_rho",
    "lambda_default",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, EtmError> {
    value
        .parse()
        .map_err(|_| EtmError::Config(format!("bad value {value:?} for {key}")))
}

impl EtmConfig {
    pub fn validate(&self) -> Result<(), EtmError> {
        let fail = |m: &str| Err(EtmError::Config(m.to_string()));
        if self.topics < 2 {
            return fail("topics must be at least 2");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return fail("lr must be positive");
        }
        if self.epochs < 1 {
            return fail("epochs must be at least 1");
        }
        if self.batch_size < 1 || self.hidden < 1 || self.embedding_dim < 1 {
            return fail("batch_size, hidden and embedding_dim must be positive");
        }
        if !(0.0..=1.0).contains(&self.lambda_default) {
            return fail("lambda_default must lie in [0, 1]");
        }
        Ok(())
    }

    /// Sets one field by its key name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), EtmError> {
        match key {
            "topics" => self.topics = parse(key, value)?,
            "embedding_dim" => self.embedding_dim = parse(key, value)?,
            "hidden" => self.hidden = parse(key, value)?,
            "lr" => self.lr = parse(key, value)?,
            "epochs" => self.epochs = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "train_rho" => self.train_rho = parse(key, value)?,
            "lambda_default" => self.lambda_default = parse(key, value)?,
            _ => return Err(EtmError::Config(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`. `#` starts a comment.
    pub fn apply_kv(&mut self, text: &str) -> Result<(), EtmError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| EtmError::Config(format!("line {}: expected key = value", i + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| EtmError::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn from_kv(text: &str) -> Result<Self, EtmError> {
        let mut cfg = Self::default();
        cfg.apply_kv(text)?;
        Ok(cfg)
    }

    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "topics = {}", self.topics);
        let _ = writeln!(s, "embedding_dim = {}", self.embedding_dim);
        let _ = writeln!(s, "hidden = {}", self.hidden);
        let _ = writeln!(s, "lr = {}", self.lr);
        let _ = writeln!(s, "epochs = {}", self.epochs);
        let _ = writeln!(s, "batch_size = {}", self.batch_size);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "train_rho = {}", self.train_rho);
        let _ = writeln!(s, "lambda_default = {}", self.lambda_default);
        s
    }
}
