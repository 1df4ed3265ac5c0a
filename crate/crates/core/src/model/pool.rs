use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::attention::additive_mask_from_flags;
use crate::hi_layer::HiddenStates;
use crate::numerics::{init, ParamStore, Real, Rng, Tape, Tensor, Var};
use crate::Result;

/// Names of one attentive-pooling triple: projection `[d, d]`, bias `[d]`
/// and query `[d]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttentivePool {
    pub prefix: String,
    pub d: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct PoolParams {
    pub proj: Var,
    pub bias: Var,
    /// Query as a `[d, 1]` column.
    pub query: Var,
}

impl AttentivePool {
    pub fn new(prefix: impl Into<String>, d: usize) -> Self {
        AttentivePool {
            prefix: prefix.into(),
            d,
        }
    }

    fn name(&self, leaf: &str) -> String {
        format!("{}.{leaf}", self.prefix)
    }

    pub fn num_params(&self) -> usize {
        self.d * self.d + 2 * self.d
    }

    pub fn init<T: Real>(&self, store: &mut ParamStore<T>, rng: &mut Rng) -> Result<()> {
        let d = self.d;
        store.insert(&self.name("proj"), init::xavier_uniform(&[d, d], d, d, rng))?;
        store.insert(&self.name("bias"), Tensor::zeros(&[d]))?;
        store.insert(&self.name("query"), init::xavier_uniform(&[d], d, 1, rng))?;
        Ok(())
    }

    pub fn load<T: Real>(&self, tape: &mut Tape<T>, store: &ParamStore<T>) -> Result<PoolParams> {
        let query = tape.param(store, &self.name("query"))?;
        Ok(PoolParams {
            proj: tape.param(store, &self.name("proj"))?,
            bias: tape.param(store, &self.name("bias"))?,
            query: tape.reshape(query, &[self.d, 1])?,
        })
    }
}

/// `softmax(qᵀ tanh(W x_l + b))`-weighted sum of `x[B, L, d]` over the
/// unmasked positions of each row. Returns `[B, d]`.
pub fn attentive_pool<T: Real>(tape: &mut Tape<T>, x: Var, mask: &Tensor<T>, params: &PoolParams) -> Result<Var> {
    let shape = tape.shape(x).to_vec();
    let (b, l, d) = (shape[0], shape[1], shape[2]);
    let u = tape.matmul(x, params.proj)?;
    let u = tape.add(u, params.bias)?;
    let u = tape.tanh(u);
    let scores = tape.matmul(u, params.query)?;
    let scores = tape.reshape(scores, &[b, l])?;
    let w = tape.masked_softmax(scores, mask)?;
    let w = tape.reshape(w, &[b, 1, l])?;
    let out = tape.matmul(w, x)?;
    tape.reshape(out, &[b, d])
}

/// Word-level pooling inside every real sentence (summary slot included),
/// then sentence-level pooling across the document. Returns `[B, d]`.
pub fn hierarchical_pool<T: Real>(
    tape: &mut Tape<T>,
    h: &HiddenStates,
    word: &PoolParams,
    sent: &PoolParams,
) -> Result<Var> {
    h.check_nonempty()?;
    let (b, m, s, d) = (h.batch, h.sentences, h.slots, h.dim);
    let real = h.real_sentences();
    let flags: Vec<bool> = real
        .iter()
        .flat_map(|&i| h.word_mask[i * s..(i + 1) * s].iter().copied())
        .collect();
    let word_mask: Tensor<T> = additive_mask_from_flags(&flags, real.len(), s)?;
    let x = tape.gather_rows(h.words, &real, s * d)?;
    let x = tape.reshape(x, &[real.len(), s, d])?;
    let sents = attentive_pool(tape, x, &word_mask, word)?;
    let sents = if real.len() == b * m {
        sents
    } else {
        let zeros = tape.constant(Tensor::zeros(&[b * m, d]));
        tape.replace_rows(zeros, sents, &real, d)?
    };
    let sents = tape.reshape(sents, &[b, m, d])?;
    let sent_mask: Tensor<T> = additive_mask_from_flags(&h.sent_mask, b, m)?;
    attentive_pool(tape, sents, &sent_mask, sent)
}
