use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::ModelConfig;
use crate::data::{DocumentBatch, PAD};
use crate::hi_layer::HiddenStates;
use crate::numerics::{init, Dropout, ParamStore, Real, Rng, Tape, Tensor, Var};
use crate::{Error, Result};

pub const WORD: &str = "embed.word";
pub const WORD_PROJ: &str = "embed.word_proj";
pub const WORD_POS: &str = "embed.word_pos";
pub const CLS: &str = "embed.cls";
pub const SENT_POS: &str = "embed.sent_pos";
/// Position table of the flat baseline.
pub const FLAT_POS: &str = "embed.pos";

/// Word table plus the optional projection from pretrained width to `d`.
pub(crate) fn init_word_table<T: Real>(cfg: &ModelConfig, store: &mut ParamStore<T>, rng: &mut Rng) -> Result<()> {
    let wd = cfg.word_dim();
    store.insert(WORD, init::normal(&[cfg.vocab_size, wd], init::EMBEDDING_STD, rng))?;
    if cfg.embed_dim.is_some() {
        store.insert(WORD_PROJ, init::xavier_uniform(&[wd, cfg.d], wd, cfg.d, rng))?;
    }
    Ok(())
}

pub(crate) fn word_table_params(cfg: &ModelConfig) -> usize {
    let wd = cfg.word_dim();
    cfg.vocab_size * wd + cfg.embed_dim.map_or(0, |e| e * cfg.d)
}

pub(crate) fn init_hierarchical<T: Real>(cfg: &ModelConfig, store: &mut ParamStore<T>, rng: &mut Rng) -> Result<()> {
    let d = cfg.d;
    init_word_table(cfg, store, rng)?;
    store.insert(WORD_POS, init::normal(&[cfg.k_max + 1, d], init::EMBEDDING_STD, rng))?;
    store.insert(CLS, init::normal(&[d], init::EMBEDDING_STD, rng))?;
    store.insert(SENT_POS, init::normal(&[cfg.m_max, d], init::EMBEDDING_STD, rng))?;
    Ok(())
}

pub(crate) fn hierarchical_params(cfg: &ModelConfig) -> usize {
    word_table_params(cfg) + (cfg.k_max + 1) * cfg.d + cfg.d + cfg.m_max * cfg.d
}

/// Looks up `ids` in the word table (projecting to `d` when the table is
/// pretrained-width). `doc_of(j)` names the document of id `j` in errors.
pub(crate) fn lookup_words<T: Real>(
    tape: &mut Tape<T>,
    store: &ParamStore<T>,
    cfg: &ModelConfig,
    ids: &[u32],
    doc_of: impl Fn(usize) -> usize,
) -> Result<Var> {
    if let Some(j) = ids.iter().position(|&id| id as usize >= cfg.vocab_size) {
        return Err(Error::Data(format!(
            "document {}: word id {} outside vocabulary of {}",
            doc_of(j),
            ids[j],
            cfg.vocab_size
        )));
    }
    let idx: Vec<usize> = ids.iter().map(|&i| i as usize).collect();
    let table = tape.param(store, WORD)?;
    let rows = tape.gather_rows(table, &idx, cfg.word_dim())?;
    match cfg.embed_dim {
        Some(_) => {
            let proj = tape.param(store, WORD_PROJ)?;
            tape.matmul(rows, proj)
        }
        None => Ok(rows),
    }
}

/// Word + position embeddings for every slot of `batch`; the summary slot of
/// each sentence gets the shared [CLS] vector plus position row `K_max`, so
/// the result does not depend on how far the batch was padded.
pub fn embed_document<T: Real>(
    tape: &mut Tape<T>,
    store: &ParamStore<T>,
    cfg: &ModelConfig,
    batch: &DocumentBatch,
    dropout: &mut Dropout<'_>,
) -> Result<HiddenStates> {
    let (b, m, k, d) = (batch.batch, batch.sentences, batch.words, cfg.d);
    if k > cfg.k_max || m > cfg.m_max {
        return Err(Error::Config(format!(
            "batch of {m} sentences x {k} words exceeds the model's {} x {}",
            cfg.m_max, cfg.k_max
        )));
    }
    let s = k + 1;
    let n = b * m * s;
    let words = lookup_words(tape, store, cfg, &batch.word_ids, |j| j / (m * s))?;

    let cls_rows: Vec<usize> = (0..b * m).map(|i| i * s + k).collect();
    let cls = tape.param(store, CLS)?;
    let cls = tape.gather_rows(cls, &vec![0; cls_rows.len()], d)?;
    let words = tape.replace_rows(words, cls, &cls_rows, d)?;

    let pos_idx: Vec<usize> = (0..n)
        .map(|i| match i % s {
            j if j == k => cfg.k_max,
            j => j,
        })
        .collect();
    let table = tape.param(store, WORD_POS)?;
    let pos = tape.gather_rows(table, &pos_idx, d)?;
    let x = tape.add(words, pos)?;
    let x = tape.reshape(x, &[b, m, s, d])?;
    let x = dropout.apply(tape, x)?;
    Ok(HiddenStates {
        words: x,
        word_mask: batch.word_mask.clone(),
        sent_mask: batch.sent_mask.clone(),
        batch: b,
        sentences: m,
        slots: s,
        dim: d,
    })
}

/// Token ids of each document concatenated in reading order, truncated to
/// `max_len` and padded to the longest kept stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatBatch {
    pub batch: usize,
    pub len: usize,
    pub ids: Vec<u32>,
    pub mask: Vec<bool>,
    pub lengths: Vec<usize>,
    pub labels: Vec<usize>,
}

pub fn flat_batch(docs: &[&crate::data::TokenizedDoc], max_len: usize) -> Result<FlatBatch> {
    if docs.is_empty() {
        return Err(Error::Data("empty batch".into()));
    }
    let lengths: Vec<usize> = docs.iter().map(|d| d.num_tokens().min(max_len)).collect();
    if let Some(i) = lengths.iter().position(|&l| l == 0) {
        return Err(Error::Data(format!("document {i} has no tokens")));
    }
    let len = lengths.iter().copied().max().unwrap_or(0);
    let mut ids = vec![PAD; docs.len() * len];
    let mut mask = vec![false; docs.len() * len];
    for (i, doc) in docs.iter().enumerate() {
        for (j, id) in doc.flat_tokens().take(len).enumerate() {
            ids[i * len + j] = id;
            mask[i * len + j] = true;
        }
    }
    Ok(FlatBatch {
        batch: docs.len(),
        len,
        ids,
        mask,
        lengths,
        labels: docs.iter().map(|d| d.label).collect(),
    })
}

/// Word + position embeddings `[B, L, d]` for the flat baseline.
pub fn embed_flat<T: Real>(
    tape: &mut Tape<T>,
    store: &ParamStore<T>,
    cfg: &ModelConfig,
    batch: &FlatBatch,
    dropout: &mut Dropout<'_>,
) -> Result<Var> {
    let (b, l, d) = (batch.batch, batch.len, cfg.d);
    if l > cfg.flat_max_len {
        return Err(Error::Config(format!(
            "flat batch of {l} tokens exceeds flat_max_len={}",
            cfg.flat_max_len
        )));
    }
    let words = lookup_words(tape, store, cfg, &batch.ids, |j| j / l)?;
    let table = tape.param(store, FLAT_POS)?;
    let idx: Vec<usize> = (0..b * l).map(|i| i % l).collect();
    let pos = tape.gather_rows(table, &idx, d)?;
    let x = tape.add(words, pos)?;
    let x = tape.reshape(x, &[b, l, d])?;
    dropout.apply(tape, x)
}

/// Overwrites the word table with pretrained vectors of matching shape.
pub fn install_word_table(store: &mut ParamStore<f32>, table: Tensor<f32>) -> Result<()> {
    let p = store
        .get_mut(WORD)
        .ok_or_else(|| Error::Invariant("model has no word table".into()))?;
    if p.tensor.shape() != table.shape() {
        return Err(Error::Config(format!(
            "pretrained table {:?} does not match word table {:?}",
            table.shape(),
            p.tensor.shape()
        )));
    }
    p.tensor.data_mut().copy_from_slice(table.data());
    Ok(())
}
