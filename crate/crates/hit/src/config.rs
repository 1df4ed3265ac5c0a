//! Run configuration: flat `key = value` text, resolved from defaults, an
//! optional file and command-line flags (in that order of precedence).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hit_core::data::SynthSpec;
use hit_core::model::{ModelConfig, MODEL_KEYS};
use hit_core::Error as CoreError;

use crate::error::{Error, Result, WithPath};

#[derive(Clone, Debug, PartialEq)]
pub struct BenchGrid {
    pub d: usize,
    pub heads: usize,
    /// Words per sentence for every timed shape.
    pub k: usize,
    pub layers: usize,
    /// Sentence counts timed for the hierarchical model.
    pub hi_m: Vec<usize>,
    /// Total lengths timed for the flat model.
    pub flat_lengths: Vec<usize>,
    pub repeats: usize,
}

impl Default for BenchGrid {
    fn default() -> Self {
        BenchGrid {
            d: 64,
            heads: 4,
            k: 32,
            layers: 1,
            hi_m: vec![8, 16, 32, 64],
            flat_lengths: vec![256, 512, 1024, 2048],
            repeats: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    /// Validation set; when absent every n-th training record is held out.
    pub val_dataset: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub model: ModelConfig,
    /// `None` infers the class count from the labels.
    pub num_classes: Option<usize>,
    pub flat: bool,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f32,
    pub min_count: usize,
    pub val_fraction: f64,
    pub synth: SynthSpec,
    pub bench: BenchGrid,
}

impl Default for RunConfig {
    fn default() -> Self {
        let model = ModelConfig::default();
        RunConfig {
            dataset: None,
            val_dataset: None,
            embeddings: None,
            checkpoint: None,
            out: PathBuf::from("out"),
            seed: model.seed,
            model,
            num_classes: None,
            flat: false,
            epochs: 3,
            batch_size: 16,
            lr: 1e-4,
            min_count: 1,
            val_fraction: 0.1,
            synth: SynthSpec::default(),
            bench: BenchGrid::default(),
        }
    }
}

fn parse<V: FromStr>(key: &str, value: &str) -> Result<V> {
    value
        .trim()
        .parse()
        .map_err(|_| CoreError::Config(format!("invalid value {value:?} for {key}")).into())
}

fn parse_list(key: &str, value: &str) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(|v| parse(key, v))
        .collect::<Result<Vec<usize>>>()
        .and_then(|v| {
            if v.is_empty() || v.contains(&0) {
                Err(CoreError::Config(format!("{key} needs positive entries")).into())
            } else {
                Ok(v)
            }
        })
}

fn parse_path(value: &str) -> Option<PathBuf> {
    match value.trim() {
        "" | "none" => None,
        v => Some(PathBuf::from(v)),
    }
}

fn show_path(p: &Option<PathBuf>) -> String {
    p.as_ref().map_or_else(|| "none".into(), |p| p.display().to_string())
}

fn join(v: &[usize]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Sets one key. Unknown keys are configuration errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "dataset" => self.dataset = parse_path(v),
            "val_dataset" => self.val_dataset = parse_path(v),
            "embeddings" => self.embeddings = parse_path(v),
            "checkpoint" => self.checkpoint = parse_path(v),
            "out" => self.out = PathBuf::from(v),
            "seed" => {
                self.seed = parse(key, v)?;
                self.model.seed = self.seed;
                self.synth.seed = self.seed;
            }
            "num_classes" => {
                self.num_classes = match v {
                    "auto" => None,
                    _ => Some(parse(key, v)?),
                }
            }
            "model" => {
                self.flat = match v {
                    "flat" => true,
                    "hi" => false,
                    _ => return Err(CoreError::Config(format!("model must be hi or flat, got {v:?}")).into()),
                }
            }
            "epochs" => self.epochs = parse(key, v)?,
            "batch_size" => self.batch_size = parse(key, v)?,
            "lr" => self.lr = parse(key, v)?,
            "min_count" => self.min_count = parse(key, v)?,
            "val_fraction" => self.val_fraction = parse(key, v)?,
            "synth_kind" => self.synth.kind = v.parse()?,
            "synth_docs" => self.synth.n_docs = parse(key, v)?,
            "synth_sentences" => self.synth.sentences = parse(key, v)?,
            "synth_words" => self.synth.words = parse(key, v)?,
            "synth_fillers" => self.synth.vocab_size = parse(key, v)?,
            "synth_policy" => self.synth.policy = v.parse()?,
            "synth_late_after" => self.synth.late_after = parse(key, v)?,
            "bench_d" => self.bench.d = parse(key, v)?,
            "bench_heads" => self.bench.heads = parse(key, v)?,
            "bench_k" => self.bench.k = parse(key, v)?,
            "bench_layers" => self.bench.layers = parse(key, v)?,
            "bench_hi_m" => self.bench.hi_m = parse_list(key, v)?,
            "bench_flat_lengths" => self.bench.flat_lengths = parse_list(key, v)?,
            "bench_repeats" => self.bench.repeats = parse(key, v)?,
            _ if MODEL_KEYS.contains(&key) => {
                self.model.set(key, v)?;
            }
            _ => return Err(CoreError::Config(format!("unknown key {key:?}")).into()),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment line.
    pub fn apply_text(&mut self, text: &str) -> hit_core::Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| CoreError::Parse {
                line: i + 1,
                msg: format!("expected key = value, got {line:?}"),
            })?;
            self.set(k.trim(), v).map_err(|e| match e {
                Error::Core(CoreError::Config(msg)) => CoreError::Config(format!("line {}: {msg}", i + 1)),
                Error::Core(other) => other,
                other => CoreError::Config(format!("line {}: {other}", i + 1)),
            })?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).at(path)?;
        let mut cfg = RunConfig::default();
        cfg.apply_text(&text).at(path)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(CoreError::Config(m).into());
        if self.epochs == 0 || self.batch_size == 0 {
            return fail("epochs and batch_size must be at least 1".into());
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return fail(format!("lr must be a finite non-negative number, got {}", self.lr));
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return fail(format!("val_fraction {} outside [0, 1)", self.val_fraction));
        }
        if self.bench.repeats < 5 {
            return fail("bench_repeats must be at least 5".into());
        }
        Ok(())
    }

    /// Every key with its resolved value; feeding this text back through
    /// [`apply_text`](Self::apply_text) reproduces the configuration.
    pub fn to_kv_string(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("dataset", show_path(&self.dataset));
        put("val_dataset", show_path(&self.val_dataset));
        put("embeddings", show_path(&self.embeddings));
        put("checkpoint", show_path(&self.checkpoint));
        put("out", self.out.display().to_string());
        put("model", if self.flat { "flat" } else { "hi" }.into());
        for (k, v) in self.model.to_pairs() {
            if k != "seed" && k != "num_classes" {
                put(k, v);
            }
        }
        put(
            "num_classes",
            self.num_classes.map_or_else(|| "auto".into(), |c| c.to_string()),
        );
        put("seed", self.seed.to_string());
        put("epochs", self.epochs.to_string());
        put("batch_size", self.batch_size.to_string());
        put("lr", self.lr.to_string());
        put("min_count", self.min_count.to_string());
        put("val_fraction", self.val_fraction.to_string());
        put("synth_kind", self.synth.kind.to_string());
        put("synth_docs", self.synth.n_docs.to_string());
        put("synth_sentences", self.synth.sentences.to_string());
        put("synth_words", self.synth.words.to_string());
        put("synth_fillers", self.synth.vocab_size.to_string());
        put("synth_policy", self.synth.policy.to_string());
        put("synth_late_after", self.synth.late_after.to_string());
        put("bench_d", self.bench.d.to_string());
        put("bench_heads", self.bench.heads.to_string());
        put("bench_k", self.bench.k.to_string());
        put("bench_layers", self.bench.layers.to_string());
        put("bench_hi_m", join(&self.bench.hi_m));
        put("bench_flat_lengths", join(&self.bench.flat_lengths));
        put("bench_repeats", self.bench.repeats.to_string());
        s
    }

    /// Writes `resolved.cfg` into the output directory.
    pub fn write_resolved(&self) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out).at(&self.out)?;
        let path = self.out.join("resolved.cfg");
        std::fs::write(&path, self.to_kv_string()).at(&path)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolved_text_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.set("seed", "9").unwrap();
        cfg.set("d", "32").unwrap();
        cfg.set("heads", "4").unwrap();
        cfg.set("num_classes", "5").unwrap();
        cfg.set("model", "flat").unwrap();
        cfg.set("dataset", "data/train.jsonl").unwrap();
        cfg.set("bench_hi_m", "4,8").unwrap();
        cfg.set("synth_kind", "xor").unwrap();
        cfg.set("lr", "0.003").unwrap();
        let mut back = RunConfig::default();
        back.apply_text(&cfg.to_kv_string()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.model.seed, 9);
        assert_eq!(back.synth.seed, 9);
    }

    #[test]
    fn unknown_keys_are_rejected_with_their_line() {
        let mut cfg = RunConfig::default();
        let err = cfg.apply_text("epochs = 2\ncolour = red\n").unwrap_err();
        assert!(matches!(err, CoreError::Config(ref m) if m.contains("line 2") && m.contains("colour")));
        assert!(matches!(cfg.apply_text("epochs 2"), Err(CoreError::Parse { line: 1, .. })));
        assert!(cfg.apply_text("epochs = many").is_err());
    }
}
