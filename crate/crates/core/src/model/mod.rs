//! Hierarchical model, flat baseline and the pieces they share.

mod config;
pub mod embed;
mod flat;
mod hi;
mod pool;

use alloc::format;
use alloc::vec::Vec;

use rand::SeedableRng;

pub use config::{ModelConfig, MODEL_KEYS};
pub use embed::{embed_document, embed_flat, flat_batch, install_word_table, FlatBatch};
pub use flat::FlatTransformer;
pub use hi::HiTransformer;
pub use pool::{attentive_pool, hierarchical_pool, AttentivePool, PoolParams};

use crate::data::TokenizedDoc;
use crate::numerics::{init, Dropout, ParamStore, Real, Rng, Tape, Tensor, Var};
use crate::{Error, Result};

pub const HEAD_WEIGHT: &str = "head.weight";
pub const HEAD_BIAS: &str = "head.bias";

/// A document classifier over tape parameters.
pub trait Network {
    fn config(&self) -> &ModelConfig;

    /// Closed-form scalar count; always equals the initialised store's size.
    fn num_params(&self) -> usize;

    /// Fresh parameters drawn from a generator seeded with `config().seed`.
    fn init_params<T: Real>(&self) -> Result<ParamStore<T>>;

    /// Logits `[B, num_classes]` for a batch of documents.
    fn logits<T: Real>(
        &self,
        tape: &mut Tape<T>,
        store: &ParamStore<T>,
        docs: &[&TokenizedDoc],
        dropout: &mut Dropout<'_>,
    ) -> Result<Var>;
}

/// Either model family behind one type, chosen at run time.
#[derive(Clone, Debug)]
pub enum Model {
    Hi(HiTransformer),
    Flat(FlatTransformer),
}

impl Model {
    pub fn new(cfg: ModelConfig, flat: bool) -> Result<Self> {
        Ok(if flat {
            Model::Flat(FlatTransformer::new(cfg)?)
        } else {
            Model::Hi(HiTransformer::new(cfg)?)
        })
    }

    pub fn is_flat(&self) -> bool {
        matches!(self, Model::Flat(_))
    }
}

impl Network for Model {
    fn config(&self) -> &ModelConfig {
        match self {
            Model::Hi(m) => m.config(),
            Model::Flat(m) => m.config(),
        }
    }

    fn num_params(&self) -> usize {
        match self {
            Model::Hi(m) => m.num_params(),
            Model::Flat(m) => m.num_params(),
        }
    }

    fn init_params<T: Real>(&self) -> Result<ParamStore<T>> {
        match self {
            Model::Hi(m) => m.init_params(),
            Model::Flat(m) => m.init_params(),
        }
    }

    fn logits<T: Real>(
        &self,
        tape: &mut Tape<T>,
        store: &ParamStore<T>,
        docs: &[&TokenizedDoc],
        dropout: &mut Dropout<'_>,
    ) -> Result<Var> {
        match self {
            Model::Hi(m) => m.logits(tape, store, docs, dropout),
            Model::Flat(m) => m.logits(tape, store, docs, dropout),
        }
    }
}

pub(crate) fn seeded_rng(cfg: &ModelConfig) -> Rng {
    Rng::seed_from_u64(cfg.seed)
}

pub(crate) fn init_head<T: Real>(cfg: &ModelConfig, store: &mut ParamStore<T>, rng: &mut Rng) -> Result<()> {
    let (d, c) = (cfg.d, cfg.num_classes);
    store.insert(HEAD_WEIGHT, init::xavier_uniform(&[d, c], d, c, rng))?;
    store.insert(HEAD_BIAS, Tensor::zeros(&[c]))
}

pub(crate) fn head_params(cfg: &ModelConfig) -> usize {
    cfg.d * cfg.num_classes + cfg.num_classes
}

/// Affine classifier on the document embedding.
pub(crate) fn classify<T: Real>(tape: &mut Tape<T>, store: &ParamStore<T>, doc: Var) -> Result<Var> {
    let w = tape.param(store, HEAD_WEIGHT)?;
    let b = tape.param(store, HEAD_BIAS)?;
    let z = tape.matmul(doc, w)?;
    tape.add(z, b)
}

/// Rejects labels the classifier cannot produce.
pub(crate) fn check_labels(cfg: &ModelConfig, docs: &[&TokenizedDoc]) -> Result<()> {
    match docs.iter().position(|d| d.label >= cfg.num_classes) {
        Some(i) => Err(Error::Data(format!(
            "document {i}: label {} outside {} classes",
            docs[i].label, cfg.num_classes
        ))),
        None => Ok(()),
    }
}

/// Index of the largest logit in each row; ties go to the lowest index.
pub fn argmax_rows<T: Real>(logits: &Tensor<T>) -> Vec<usize> {
    let c = logits.last_dim();
    logits
        .data()
        .chunks(c)
        .map(|row| {
            let mut best = 0;
            for (j, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}
