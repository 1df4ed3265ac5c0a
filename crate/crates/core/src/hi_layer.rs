//! One hierarchical layer: a sentence encoder over each sentence, a document
//! encoder over the sentence summaries, and a second sentence encoder that
//! sees the document-aware summary in place of its own.

use alloc::format;
use alloc::vec::Vec;

use crate::attention::{additive_mask_from_flags, encoder_block_forward, EncoderBlock, EncoderBlockParams};
use crate::numerics::{Dropout, ParamStore, Real, Tape, Tensor, Var};
use crate::{Error, Result};

/// Word-level states `[B, M, K+1, d]`; slot `K` of each sentence holds its
/// summary state. Masks are `[B, M, K+1]` and `[B, M]`.
#[derive(Clone, Debug)]
pub struct HiddenStates {
    pub words: Var,
    pub word_mask: Vec<bool>,
    pub sent_mask: Vec<bool>,
    pub batch: usize,
    pub sentences: usize,
    pub slots: usize,
    pub dim: usize,
}

impl HiddenStates {
    pub fn with_words(&self, words: Var) -> Self {
        HiddenStates {
            words,
            ..self.clone()
        }
    }

    /// Row index of every sentence's summary slot when `words` is viewed as
    /// `[B·M·(K+1), d]`.
    pub fn cls_rows(&self) -> Vec<usize> {
        (0..self.batch * self.sentences)
            .map(|s| s * self.slots + self.slots - 1)
            .collect()
    }

    /// Flat `b·M + i` index of every real sentence.
    pub fn real_sentences(&self) -> Vec<usize> {
        (0..self.batch * self.sentences)
            .filter(|&s| self.sent_mask[s])
            .collect()
    }

    /// Every document must keep at least one sentence.
    pub fn check_nonempty(&self) -> Result<()> {
        for b in 0..self.batch {
            if !self.sent_mask[b * self.sentences..(b + 1) * self.sentences]
                .iter()
                .any(|&x| x)
            {
                return Err(Error::Data(format!("document {b} has no real sentences")));
            }
        }
        Ok(())
    }
}

/// Parameter naming for one layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HiLayer {
    pub sent1: EncoderBlock,
    pub doc: EncoderBlock,
    pub sent2: EncoderBlock,
}

#[derive(Clone, Copy, Debug)]
pub struct HiLayerParams {
    pub sent1: EncoderBlockParams,
    pub doc: EncoderBlockParams,
    pub sent2: EncoderBlockParams,
}

impl HiLayer {
    pub fn new(prefix: &str, d: usize, heads: usize, d_ff: usize) -> Result<Self> {
        Ok(HiLayer {
            sent1: EncoderBlock::new(format!("{prefix}.sent1"), d, heads, d_ff)?,
            doc: EncoderBlock::new(format!("{prefix}.doc"), d, heads, d_ff)?,
            sent2: EncoderBlock::new(format!("{prefix}.sent2"), d, heads, d_ff)?,
        })
    }

    pub fn num_params(&self) -> usize {
        self.sent1.num_params() + self.doc.num_params() + self.sent2.num_params()
    }

    pub fn init<T: Real>(&self, store: &mut ParamStore<T>, rng: &mut crate::numerics::Rng) -> Result<()> {
        self.sent1.init(store, rng)?;
        self.doc.init(store, rng)?;
        self.sent2.init(store, rng)
    }

    pub fn load<T: Real>(&self, tape: &mut Tape<T>, store: &ParamStore<T>) -> Result<HiLayerParams> {
        Ok(HiLayerParams {
            sent1: self.sent1.load(tape, store)?,
            doc: self.doc.load(tape, store)?,
            sent2: self.sent2.load(tape, store)?,
        })
    }
}

/// Runs `block` independently over each real sentence of `words`; padded
/// sentences pass through untouched.
fn encode_sentences<T: Real>(
    tape: &mut Tape<T>,
    h: &HiddenStates,
    words: Var,
    block: &EncoderBlockParams,
    dropout: &mut Dropout<'_>,
) -> Result<Var> {
    h.check_nonempty()?;
    let (s, d) = (h.slots, h.dim);
    let real = h.real_sentences();
    let flags: Vec<bool> = real
        .iter()
        .flat_map(|&i| h.word_mask[i * s..(i + 1) * s].iter().copied())
        .collect();
    let mask: Tensor<T> = additive_mask_from_flags(&flags, real.len(), s)?;
    let all_real = real.len() == h.batch * h.sentences;
    let x = if all_real {
        words
    } else {
        tape.gather_rows(words, &real, s * d)?
    };
    let x = tape.reshape(x, &[real.len(), s, d])?;
    let y = encoder_block_forward(tape, x, &mask, block, dropout)?;
    let full = [h.batch, h.sentences, s, d];
    if all_real {
        return tape.reshape(y, &full);
    }
    let y = tape.reshape(y, &[real.len(), s * d])?;
    tape.replace_rows(words, y, &real, s * d)
}

/// Sentence encoder applied to each sentence's `K+1` slots on its own.
pub fn sentence_pass<T: Real>(
    tape: &mut Tape<T>,
    h: &HiddenStates,
    params: &EncoderBlockParams,
    dropout: &mut Dropout<'_>,
) -> Result<HiddenStates> {
    let words = encode_sentences(tape, h, h.words, params, dropout)?;
    Ok(h.with_words(words))
}

/// Gathers the summary slots, adds sentence position embeddings and runs the
/// document encoder across sentences. Returns `[B, M, d]`.
pub fn document_pass<T: Real>(
    tape: &mut Tape<T>,
    h: &HiddenStates,
    params: &EncoderBlockParams,
    sent_pos_table: Var,
    dropout: &mut Dropout<'_>,
) -> Result<Var> {
    h.check_nonempty()?;
    let (b, m, d) = (h.batch, h.sentences, h.dim);
    let table_rows = tape.shape(sent_pos_table)[0];
    if m > table_rows {
        return Err(Error::Config(format!(
            "{m} sentences exceed the {table_rows}-row sentence position table"
        )));
    }
    let cls = tape.gather_rows(h.words, &h.cls_rows(), d)?;
    let cls = tape.reshape(cls, &[b, m, d])?;
    let idx: Vec<usize> = (0..m).collect();
    let pos = tape.gather_rows(sent_pos_table, &idx, d)?;
    let x = tape.add(cls, pos)?;
    let mask: Tensor<T> = additive_mask_from_flags(&h.sent_mask, b, m)?;
    encoder_block_forward(tape, x, &mask, params, dropout)
}

/// Writes the document-aware summaries `r[B, M, d]` into the summary slots.
pub fn substitute_summaries<T: Real>(tape: &mut Tape<T>, h: &HiddenStates, r: Var) -> Result<HiddenStates> {
    let rows = tape.reshape(r, &[h.batch * h.sentences, h.dim])?;
    let words = tape.replace_rows(h.words, rows, &h.cls_rows(), h.dim)?;
    Ok(h.with_words(words))
}

/// Second sentence encoder over `[h_1..h_K, r]` for every sentence.
pub fn propagate_pass<T: Real>(
    tape: &mut Tape<T>,
    h: &HiddenStates,
    r: Var,
    params: &EncoderBlockParams,
    dropout: &mut Dropout<'_>,
) -> Result<HiddenStates> {
    let with_r = substitute_summaries(tape, h, r)?;
    sentence_pass(tape, &with_r, params, dropout)
}

/// Sentence pass, document pass, propagation pass. Shape and masks are
/// preserved so layers stack.
pub fn hi_layer_forward<T: Real>(
    tape: &mut Tape<T>,
    h: &HiddenStates,
    params: &HiLayerParams,
    sent_pos_table: Var,
    dropout: &mut Dropout<'_>,
) -> Result<HiddenStates> {
    let local = sentence_pass(tape, h, &params.sent1, dropout)?;
    let r = document_pass(tape, &local, &params.doc, sent_pos_table, dropout)?;
    propagate_pass(tape, &local, r, &params.sent2, dropout)
}

/// The layer with propagation switched off: the document pass still runs and
/// its output replaces the summary slots, but word states never see it.
pub fn hi_layer_forward_without_propagation<T: Real>(
    tape: &mut Tape<T>,
    h: &HiddenStates,
    sent1: &EncoderBlockParams,
    doc: &EncoderBlockParams,
    sent_pos_table: Var,
    dropout: &mut Dropout<'_>,
) -> Result<HiddenStates> {
    let local = sentence_pass(tape, h, sent1, dropout)?;
    let r = document_pass(tape, &local, doc, sent_pos_table, dropout)?;
    substitute_summaries(tape, &local, r)
}
