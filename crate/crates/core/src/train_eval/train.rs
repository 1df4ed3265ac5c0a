use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;

use super::{evaluate_metrics, Metrics};
use crate::data::TokenizedDoc;
use crate::model::{argmax_rows, Network};
use crate::numerics::{adam_step, AdamState, Dropout, ParamStore, Rng, Tape, DEFAULT_LR};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f32,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 3,
            batch_size: 16,
            lr: DEFAULT_LR,
            seed: 42,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Mean training loss per example over the epoch.
    pub train_loss: f64,
    pub val: Metrics,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
}

pub const HISTORY_HEADER: &str = "epoch,train_loss,val_accuracy,val_macro_f";

impl History {
    /// One row per epoch. Floats use shortest round-trip formatting so equal
    /// histories give byte-equal files.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(HISTORY_HEADER);
        s.push('\n');
        for r in &self.epochs {
            let _ = writeln!(s, "{},{},{},{}", r.epoch, r.train_loss, r.val.accuracy, r.val.macro_f);
        }
        s
    }
}

// separates the dropout stream from the shuffling stream
const DROPOUT_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

pub fn train_epochs<N: Network>(
    model: &N,
    params: &mut ParamStore<f32>,
    train: &[TokenizedDoc],
    val: &[TokenizedDoc],
    cfg: &TrainConfig,
) -> Result<History> {
    train_epochs_with(model, params, train, val, cfg, |_| {})
}

/// [`train_epochs`] with a callback after every epoch.
pub fn train_epochs_with<N: Network>(
    model: &N,
    params: &mut ParamStore<f32>,
    train: &[TokenizedDoc],
    val: &[TokenizedDoc],
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<History> {
    if train.is_empty() || val.is_empty() {
        return Err(Error::Data("training and validation sets must be non-empty".into()));
    }
    if cfg.batch_size == 0 {
        return Err(Error::Config("batch size must be at least 1".into()));
    }
    let rate = model.config().dropout;
    let mut shuffle_rng = Rng::seed_from_u64(cfg.seed);
    let mut dropout_rng = Rng::seed_from_u64(cfg.seed ^ DROPOUT_STREAM);
    let mut adam = AdamState::new(cfg.lr);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = History::default();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut total = 0.0f64;
        for (bi, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let docs: Vec<&TokenizedDoc> = chunk.iter().map(|&i| &train[i]).collect();
            let labels: Vec<usize> = docs.iter().map(|d| d.label).collect();
            let mut tape = Tape::new();
            let mut dropout = Dropout::train(rate, &mut dropout_rng);
            let logits = model.logits(&mut tape, params, &docs, &mut dropout)?;
            let loss = tape.cross_entropy(logits, &labels)?;
            let value = tape.value(loss).data()[0];
            if !value.is_finite() {
                return Err(Error::Numeric(format!(
                    "epoch {epoch}, batch {bi}: loss is {value}"
                )));
            }
            tape.backward(loss)?.write_to(params);
            adam_step(params, &mut adam)?;
            total += f64::from(value) * docs.len() as f64;
        }
        let record = EpochRecord {
            epoch,
            train_loss: total / train.len() as f64,
            val: evaluate(model, params, val, cfg.batch_size)?,
        };
        on_epoch(&record);
        history.epochs.push(record);
    }
    Ok(history)
}

/// Arg-max class of every document, ties going to the lowest index.
pub fn predict<N: Network>(
    model: &N,
    params: &ParamStore<f32>,
    docs: &[TokenizedDoc],
    batch_size: usize,
) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(docs.len());
    for chunk in docs.chunks(batch_size.max(1)) {
        let refs: Vec<&TokenizedDoc> = chunk.iter().collect();
        let mut tape = Tape::new();
        let logits = model.logits(&mut tape, params, &refs, &mut Dropout::eval())?;
        out.extend(argmax_rows(tape.value(logits)));
    }
    Ok(out)
}

pub fn evaluate<N: Network>(
    model: &N,
    params: &ParamStore<f32>,
    docs: &[TokenizedDoc],
    batch_size: usize,
) -> Result<Metrics> {
    let preds = predict(model, params, docs, batch_size)?;
    let labels: Vec<usize> = docs.iter().map(|d| d.label).collect();
    evaluate_metrics(&preds, &labels, model.config().num_classes)
}
