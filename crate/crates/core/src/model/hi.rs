use alloc::format;
use alloc::vec::Vec;

use super::embed::{self, embed_document};
use super::pool::{hierarchical_pool, AttentivePool};
use super::{check_labels, classify, head_params, init_head, seeded_rng, ModelConfig, Network};
use crate::data::{pad_batch, DocumentBatch, TokenizedDoc};
use crate::hi_layer::{hi_layer_forward, hi_layer_forward_without_propagation, HiLayer, HiddenStates};
use crate::numerics::{Dropout, ParamStore, Real, Tape, Var};
use crate::Result;

/// Embedding → stacked hierarchical layers → hierarchical pooling → affine
/// classifier.
#[derive(Clone, Debug)]
pub struct HiTransformer {
    pub cfg: ModelConfig,
    pub layers: Vec<HiLayer>,
    pub word_pool: AttentivePool,
    pub sent_pool: AttentivePool,
}

impl HiTransformer {
    pub fn new(cfg: ModelConfig) -> Result<Self> {
        cfg.validate()?;
        let layers = (0..cfg.layers)
            .map(|i| HiLayer::new(&format!("layer{i}"), cfg.d, cfg.heads, cfg.d_ff))
            .collect::<Result<_>>()?;
        Ok(HiTransformer {
            word_pool: AttentivePool::new("pool.word", cfg.d),
            sent_pool: AttentivePool::new("pool.sent", cfg.d),
            layers,
            cfg,
        })
    }

    /// Pads `docs` no further than they need: `K` is the longest kept
    /// sentence and `M` the most kept sentences.
    pub fn batch(&self, docs: &[&TokenizedDoc]) -> Result<DocumentBatch> {
        let m = docs.iter().map(|d| d.sentences.len()).max().unwrap_or(0);
        let k = docs
            .iter()
            .flat_map(|d| d.sentences.iter().take(self.cfg.m_max).map(Vec::len))
            .max()
            .unwrap_or(0);
        pad_batch(docs, k.clamp(1, self.cfg.k_max), m.clamp(1, self.cfg.m_max))
    }

    /// Final-layer word states.
    pub fn encode<T: Real>(
        &self,
        tape: &mut Tape<T>,
        store: &ParamStore<T>,
        batch: &DocumentBatch,
        dropout: &mut Dropout<'_>,
    ) -> Result<HiddenStates> {
        let mut h = embed_document(tape, store, &self.cfg, batch, dropout)?;
        let sent_pos = tape.param(store, embed::SENT_POS)?;
        for layer in &self.layers {
            h = if self.cfg.use_context_propagation {
                let p = layer.load(tape, store)?;
                hi_layer_forward(tape, &h, &p, sent_pos, dropout)?
            } else {
                // the second sentence encoder is never loaded, so it gets no gradient
                let sent1 = layer.sent1.load(tape, store)?;
                let doc = layer.doc.load(tape, store)?;
                hi_layer_forward_without_propagation(tape, &h, &sent1, &doc, sent_pos, dropout)?
            };
        }
        Ok(h)
    }

    /// Document embeddings `[B, d]`.
    pub fn document_embedding<T: Real>(
        &self,
        tape: &mut Tape<T>,
        store: &ParamStore<T>,
        batch: &DocumentBatch,
        dropout: &mut Dropout<'_>,
    ) -> Result<Var> {
        let h = self.encode(tape, store, batch, dropout)?;
        let word = self.word_pool.load(tape, store)?;
        let sent = self.sent_pool.load(tape, store)?;
        hierarchical_pool(tape, &h, &word, &sent)
    }

    /// Logits for an already padded batch.
    pub fn forward_batch<T: Real>(
        &self,
        tape: &mut Tape<T>,
        store: &ParamStore<T>,
        batch: &DocumentBatch,
        dropout: &mut Dropout<'_>,
    ) -> Result<Var> {
        let doc = self.document_embedding(tape, store, batch, dropout)?;
        classify(tape, store, doc)
    }
}

impl Network for HiTransformer {
    fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    fn num_params(&self) -> usize {
        embed::hierarchical_params(&self.cfg)
            + self.layers.iter().map(HiLayer::num_params).sum::<usize>()
            + self.word_pool.num_params()
            + self.sent_pool.num_params()
            + head_params(&self.cfg)
    }

    fn init_params<T: Real>(&self) -> Result<ParamStore<T>> {
        let mut rng = seeded_rng(&self.cfg);
        let mut store = ParamStore::new();
        embed::init_hierarchical(&self.cfg, &mut store, &mut rng)?;
        for layer in &self.layers {
            layer.init(&mut store, &mut rng)?;
        }
        self.word_pool.init(&mut store, &mut rng)?;
        self.sent_pool.init(&mut store, &mut rng)?;
        init_head(&self.cfg, &mut store, &mut rng)?;
        Ok(store)
    }

    fn logits<T: Real>(
        &self,
        tape: &mut Tape<T>,
        store: &ParamStore<T>,
        docs: &[&TokenizedDoc],
        dropout: &mut Dropout<'_>,
    ) -> Result<Var> {
        check_labels(&self.cfg, docs)?;
        let batch = self.batch(docs)?;
        self.forward_batch(tape, store, &batch, dropout)
    }
}
