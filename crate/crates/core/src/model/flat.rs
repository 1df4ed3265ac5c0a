use alloc::format;
use alloc::vec::Vec;

use super::embed::{self, embed_flat, flat_batch, FlatBatch};
use super::pool::{attentive_pool, AttentivePool};
use super::{check_labels, classify, head_params, init_head, seeded_rng, ModelConfig, Network};
use crate::attention::{additive_mask_from_flags, encoder_block_forward, EncoderBlock};
use crate::data::TokenizedDoc;
use crate::numerics::{init, Dropout, ParamStore, Real, Tape, Tensor, Var};
use crate::Result;

/// Vanilla Transformer over the concatenated word stream, truncated to
/// `flat_max_len` tokens.
#[derive(Clone, Debug)]
pub struct FlatTransformer {
    pub cfg: ModelConfig,
    pub blocks: Vec<EncoderBlock>,
    pub pool: AttentivePool,
}

impl FlatTransformer {
    pub fn new(cfg: ModelConfig) -> Result<Self> {
        cfg.validate()?;
        let blocks = (0..cfg.layers)
            .map(|i| EncoderBlock::new(format!("layer{i}.block"), cfg.d, cfg.heads, cfg.d_ff))
            .collect::<Result<_>>()?;
        Ok(FlatTransformer {
            pool: AttentivePool::new("pool", cfg.d),
            blocks,
            cfg,
        })
    }

    pub fn batch(&self, docs: &[&TokenizedDoc]) -> Result<FlatBatch> {
        flat_batch(docs, self.cfg.flat_max_len)
    }

    pub fn forward_batch<T: Real>(
        &self,
        tape: &mut Tape<T>,
        store: &ParamStore<T>,
        batch: &FlatBatch,
        dropout: &mut Dropout<'_>,
    ) -> Result<Var> {
        let mut x = embed_flat(tape, store, &self.cfg, batch, dropout)?;
        let mask: Tensor<T> = additive_mask_from_flags(&batch.mask, batch.batch, batch.len)?;
        for block in &self.blocks {
            let p = block.load(tape, store)?;
            x = encoder_block_forward(tape, x, &mask, &p, dropout)?;
        }
        let pool = self.pool.load(tape, store)?;
        let doc = attentive_pool(tape, x, &mask, &pool)?;
        classify(tape, store, doc)
    }
}

impl Network for FlatTransformer {
    fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    fn num_params(&self) -> usize {
        embed::word_table_params(&self.cfg)
            + self.cfg.flat_max_len * self.cfg.d
            + self.blocks.iter().map(EncoderBlock::num_params).sum::<usize>()
            + self.pool.num_params()
            + head_params(&self.cfg)
    }

    fn init_params<T: Real>(&self) -> Result<ParamStore<T>> {
        let mut rng = seeded_rng(&self.cfg);
        let mut store = ParamStore::new();
        embed::init_word_table(&self.cfg, &mut store, &mut rng)?;
        store.insert(
            embed::FLAT_POS,
            init::normal(&[self.cfg.flat_max_len, self.cfg.d], init::EMBEDDING_STD, &mut rng),
        )?;
        for block in &self.blocks {
            block.init(&mut store, &mut rng)?;
        }
        self.pool.init(&mut store, &mut rng)?;
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
