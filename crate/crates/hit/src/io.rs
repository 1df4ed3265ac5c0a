//! File formats: JSONL corpora, pretrained vector files and checkpoints with
//! their config and vocabulary sidecars.

use std::fs;
use std::path::{Path, PathBuf};

use hit_core::data::{parse_embedding_table, Coverage, Document, Vocab};
use hit_core::model::ModelConfig;
use hit_core::numerics::{checkpoint, ParamStore, Rng, Tensor};
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result, WithPath};

/// Parses `{"label": int, "text": string}` records, one per line. Blank lines
/// are skipped; line numbers in errors are 1-based.
pub fn parse_jsonl(text: &str) -> hit_core::Result<Vec<Document>> {
    use hit_core::Error::{Data, Parse, Schema};
    let mut docs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(line).map_err(|e| Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        let schema = |msg: &str| Schema {
            line: line_no,
            msg: msg.to_string(),
        };
        let obj = value.as_object().ok_or_else(|| schema("record is not an object"))?;
        let label = obj.get("label").ok_or_else(|| schema("missing field \"label\""))?;
        let label = label
            .as_u64()
            .ok_or_else(|| schema("\"label\" must be a non-negative integer"))?;
        let text = obj.get("text").ok_or_else(|| schema("missing field \"text\""))?;
        let text = text.as_str().ok_or_else(|| schema("\"text\" must be a string"))?;
        docs.push(Document {
            label: label as usize,
            text: text.to_string(),
        });
    }
    if docs.is_empty() {
        return Err(Data("dataset has no records".into()));
    }
    Ok(docs)
}

pub fn load_jsonl_dataset(path: &Path) -> Result<Vec<Document>> {
    let text = fs::read_to_string(path).at(path)?;
    parse_jsonl(&text).at(path)
}

#[derive(Serialize)]
struct Record<'a> {
    label: usize,
    text: &'a str,
}

/// Inverse of [`parse_jsonl`].
pub fn to_jsonl(docs: &[Document]) -> String {
    let mut out = String::new();
    for d in docs {
        let rec = Record {
            label: d.label,
            text: &d.text,
        };
        out.push_str(&serde_json::to_string(&rec).expect("plain struct serialises"));
        out.push('\n');
    }
    out
}

pub fn load_embedding_file(
    path: &Path,
    vocab: &Vocab,
    width: usize,
    rng: &mut Rng,
) -> Result<(Tensor<f32>, Coverage)> {
    let text = fs::read_to_string(path).at(path)?;
    parse_embedding_table(&text, vocab, width, rng).at(path)
}

/// Paths of a checkpoint and its two sidecars.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckpointPaths {
    pub weights: PathBuf,
    pub config: PathBuf,
    pub vocab: PathBuf,
}

impl CheckpointPaths {
    pub fn new(weights: &Path) -> Self {
        let with = |ext: &str| {
            let mut s = weights.as_os_str().to_owned();
            s.push(ext);
            PathBuf::from(s)
        };
        CheckpointPaths {
            weights: weights.to_path_buf(),
            config: with(".config"),
            vocab: with(".vocab"),
        }
    }
}

/// Everything needed to rebuild a trained model.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub flat: bool,
    pub config: ModelConfig,
    pub params: ParamStore<f32>,
    pub vocab: Vocab,
}

fn config_text(flat: bool, cfg: &ModelConfig) -> String {
    format!("model = {}\n{}", if flat { "flat" } else { "hi" }, cfg.to_kv_string())
}

fn parse_config_text(text: &str) -> hit_core::Result<(bool, ModelConfig)> {
    let mut flat = false;
    let mut rest = String::new();
    for line in text.lines() {
        match line.split_once('=') {
            Some((k, v)) if k.trim() == "model" => {
                flat = match v.trim() {
                    "flat" => true,
                    "hi" => false,
                    other => return Err(hit_core::Error::Config(format!("unknown model {other:?}"))),
                }
            }
            _ => {
                rest.push_str(line);
                rest.push('\n');
            }
        }
    }
    Ok((flat, ModelConfig::from_kv_str(&rest)?))
}

pub fn save_checkpoint(weights: &Path, ckpt: &Checkpoint) -> Result<CheckpointPaths> {
    let paths = CheckpointPaths::new(weights);
    if let Some(dir) = weights.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).at(dir)?;
    }
    fs::write(&paths.weights, checkpoint::encode(&ckpt.params)).at(&paths.weights)?;
    fs::write(&paths.config, config_text(ckpt.flat, &ckpt.config)).at(&paths.config)?;
    fs::write(&paths.vocab, ckpt.vocab.to_text()).at(&paths.vocab)?;
    Ok(paths)
}

/// Loads weights and sidecars and checks that every parameter the model
/// expects is present with the right shape.
pub fn load_checkpoint(weights: &Path) -> Result<Checkpoint> {
    use hit_core::model::{Model, Network};
    let paths = CheckpointPaths::new(weights);
    let bytes = fs::read(&paths.weights).at(&paths.weights)?;
    let params = checkpoint::decode(&bytes).at(&paths.weights)?;
    let text = fs::read_to_string(&paths.config).at(&paths.config)?;
    let (flat, config) = parse_config_text(&text).at(&paths.config)?;
    let text = fs::read_to_string(&paths.vocab).at(&paths.vocab)?;
    let vocab = Vocab::from_text(&text).at(&paths.vocab)?;
    if vocab.len() != config.vocab_size {
        return Err(Error::file(
            &paths.vocab,
            hit_core::Error::Config(format!(
                "{} tokens but the model expects {}",
                vocab.len(),
                config.vocab_size
            )),
        ));
    }
    let expected: ParamStore<f32> = Model::new(config.clone(), flat)?.init_params()?;
    for p in expected.iter() {
        let found = params.get(&p.name).map(|q| q.tensor.shape());
        if found != Some(p.tensor.shape()) {
            return Err(Error::file(
                &paths.weights,
                hit_core::Error::Format {
                    line: 0,
                    msg: format!(
                        "parameter {} should be {:?}, found {:?}",
                        p.name,
                        p.tensor.shape(),
                        found
                    ),
                },
            ));
        }
    }
    if params.len() != expected.len() {
        return Err(Error::file(
            &paths.weights,
            hit_core::Error::Format {
                line: 0,
                msg: format!("{} parameters, model has {}", params.len(), expected.len()),
            },
        ));
    }
    Ok(Checkpoint {
        flat,
        config,
        params,
        vocab,
    })
}
