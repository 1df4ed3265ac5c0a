use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Every hyperparameter of both model families.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub d: usize,
    pub heads: usize,
    pub layers: usize,
    /// Words per sentence (K).
    pub k_max: usize,
    /// Sentences per document (M).
    pub m_max: usize,
    pub d_ff: usize,
    pub vocab_size: usize,
    pub num_classes: usize,
    pub dropout: f32,
    /// Token budget of the flat baseline.
    pub flat_max_len: usize,
    pub use_context_propagation: bool,
    pub seed: u64,
    /// Width of pretrained word vectors; `None` means word vectors are `d`
    /// wide and no projection is used.
    pub embed_dim: Option<usize>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            d: 256,
            heads: 8,
            layers: 2,
            k_max: 32,
            m_max: 64,
            d_ff: 1024,
            vocab_size: 30_000,
            num_classes: 2,
            dropout: 0.2,
            flat_max_len: 512,
            use_context_propagation: true,
            seed: 42,
            embed_dim: None,
        }
    }
}

pub const MODEL_KEYS: &[&str] = &[
    "d",
    "heads",
    "layers",
    "k_max",
    "m_max",
    "d_ff",
    "vocab_size",
    "num_classes",
    "dropout",
    "flat_max_len",
    "use_context_propagation",
    "seed",
    "embed_dim",
];

fn parse<V: core::str::FromStr>(key: &str, value: &str) -> Result<V> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
}

impl ModelConfig {
    /// The small model used for gradient checks.
    pub fn tiny() -> Self {
        ModelConfig {
            d: 8,
            heads: 2,
            layers: 1,
            k_max: 5,
            m_max: 3,
            d_ff: 32,
            vocab_size: 50,
            num_classes: 2,
            dropout: 0.0,
            flat_max_len: 15,
            use_context_propagation: true,
            seed: 1,
            embed_dim: None,
        }
    }

    pub fn word_dim(&self) -> usize {
        self.embed_dim.unwrap_or(self.d)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.d == 0 || self.heads == 0 || self.d % self.heads != 0 {
            return fail(format!("heads={} must divide d={}", self.heads, self.d));
        }
        if self.k_max == 0 || self.m_max == 0 || self.flat_max_len == 0 {
            return fail("k_max, m_max and flat_max_len must be at least 1".into());
        }
        if self.layers == 0 {
            return fail("layers must be at least 1".into());
        }
        if self.d_ff < self.d {
            return fail(format!("d_ff={} must be at least d={}", self.d_ff, self.d));
        }
        if self.vocab_size < 3 {
            return fail("vocab_size must cover the three reserved ids".into());
        }
        if self.num_classes == 0 {
            return fail("num_classes must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return fail(format!("dropout {} outside [0, 1)", self.dropout));
        }
        if self.embed_dim == Some(0) {
            return fail("embed_dim must be positive".into());
        }
        Ok(())
    }

    /// Sets one field from its text form. Returns `Ok(false)` for keys that
    /// are not model settings.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "d" => self.d = parse(key, value)?,
            "heads" => self.heads = parse(key, value)?,
            "layers" => self.layers = parse(key, value)?,
            "k_max" => self.k_max = parse(key, value)?,
            "m_max" => self.m_max = parse(key, value)?,
            "d_ff" => self.d_ff = parse(key, value)?,
            "vocab_size" => self.vocab_size = parse(key, value)?,
            "num_classes" => self.num_classes = parse(key, value)?,
            "dropout" => self.dropout = parse(key, value)?,
            "flat_max_len" => self.flat_max_len = parse(key, value)?,
            "use_context_propagation" => self.use_context_propagation = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "embed_dim" => {
                self.embed_dim = match value.trim() {
                    "" | "none" => None,
                    v => Some(parse(key, v)?),
                }
            }
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// `(key, value)` pairs in [`MODEL_KEYS`] order.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("d", self.d.to_string()),
            ("heads", self.heads.to_string()),
            ("layers", self.layers.to_string()),
            ("k_max", self.k_max.to_string()),
            ("m_max", self.m_max.to_string()),
            ("d_ff", self.d_ff.to_string()),
            ("vocab_size", self.vocab_size.to_string()),
            ("num_classes", self.num_classes.to_string()),
            ("dropout", self.dropout.to_string()),
            ("flat_max_len", self.flat_max_len.to_string()),
            ("use_context_propagation", self.use_context_propagation.to_string()),
            ("seed", self.seed.to_string()),
            (
                "embed_dim",
                self.embed_dim.map_or_else(|| "none".to_string(), |e| e.to_string()),
            ),
        ]
    }

    /// Flat `key = value` text, one setting per line.
    pub fn to_kv_string(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.to_pairs() {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        }
        s
    }

    /// Parses [`to_kv_string`](Self::to_kv_string) output. Unknown keys are
    /// rejected; missing keys keep their defaults.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut cfg = ModelConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: format!("expected key = value, got {line:?}"),
            })?;
            if !cfg.set(k.trim(), v.trim())? {
                return Err(Error::Config(format!("line {}: unknown key {:?}", i + 1, k.trim())));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_reference_setup() {
        let c = ModelConfig::default();
        assert_eq!((c.d, c.heads, c.d / c.heads, c.layers), (256, 8, 32, 2));
        assert_eq!(c.dropout, 0.2);
        assert_eq!(c.flat_max_len, 512);
        assert_eq!(c.k_max * c.m_max, 2048);
        c.validate().unwrap();
    }

    #[test]
    fn kv_round_trip_and_unknown_keys() {
        let mut c = ModelConfig::tiny();
        c.embed_dim = Some(300);
        c.use_context_propagation = false;
        let back = ModelConfig::from_kv_str(&c.to_kv_string()).unwrap();
        assert_eq!(back, c);
        assert!(ModelConfig::from_kv_str("colour = blue").is_err());
        assert!(ModelConfig::from_kv_str("heads = 3").is_err());
    }
}
