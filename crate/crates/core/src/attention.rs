//! Multi-head scaled dot-product self-attention and the post-norm Transformer
//! encoder block every pass of the hierarchy is built from.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::numerics::{init, Dropout, ParamStore, Real, Rng, Tape, Tensor, Var};
use crate::{Error, Result};

pub const LAYER_NORM_EPS: f64 = 1e-5;

/// Additive key mask: 0 for the first `len` positions of each row, the mask
/// constant for the rest.
pub fn build_additive_mask<T: Real>(valid_lengths: &[usize], width: usize) -> Result<Tensor<T>> {
    let mut data = Vec::with_capacity(valid_lengths.len() * width);
    for &len in valid_lengths {
        if len > width {
            return Err(Error::Dimension(format!(
                "valid length {len} exceeds mask width {width}"
            )));
        }
        data.extend((0..width).map(|j| if j < len { T::zero() } else { T::MASK }));
    }
    Tensor::new(&[valid_lengths.len(), width], data)
}

/// Additive mask from per-slot validity flags laid out `[rows, width]`.
pub fn additive_mask_from_flags<T: Real>(flags: &[bool], rows: usize, width: usize) -> Result<Tensor<T>> {
    let data = flags
        .iter()
        .map(|&ok| if ok { T::zero() } else { T::MASK })
        .collect();
    Tensor::new(&[rows, width], data)
}

/// Attention projections loaded onto a tape.
#[derive(Clone, Copy, Debug)]
pub struct AttentionParams {
    pub wq: Var,
    pub wk: Var,
    pub wv: Var,
    pub wo: Var,
    pub heads: usize,
    pub head_dim: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct EncoderBlockParams {
    pub attn: AttentionParams,
    pub ffn_w1: Var,
    pub ffn_w2: Var,
    pub ln1_gain: Var,
    pub ln1_bias: Var,
    pub ln2_gain: Var,
    pub ln2_bias: Var,
}

/// Naming and sizes of one encoder block inside a [`ParamStore`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncoderBlock {
    pub prefix: String,
    pub d: usize,
    pub heads: usize,
    pub d_ff: usize,
}

impl EncoderBlock {
    pub fn new(prefix: impl Into<String>, d: usize, heads: usize, d_ff: usize) -> Result<Self> {
        if heads == 0 || d == 0 || d % heads != 0 {
            return Err(Error::Config(format!("{heads} heads do not divide d={d}")));
        }
        if d_ff < d {
            return Err(Error::Config(format!("d_ff={d_ff} is smaller than d={d}")));
        }
        Ok(EncoderBlock {
            prefix: prefix.into(),
            d,
            heads,
            d_ff,
        })
    }

    fn name(&self, leaf: &str) -> String {
        format!("{}.{}", self.prefix, leaf)
    }

    /// Weight count: four `d×d` projections, the two FFN matrices and two
    /// layer-norm gain/bias pairs.
    pub fn num_params(&self) -> usize {
        4 * self.d * self.d + 2 * self.d * self.d_ff + 4 * self.d
    }

    pub fn init<T: Real>(&self, store: &mut ParamStore<T>, rng: &mut Rng) -> Result<()> {
        let d = self.d;
        for w in ["attn.wq", "attn.wk", "attn.wv", "attn.wo"] {
            store.insert(&self.name(w), init::xavier_uniform(&[d, d], d, d, rng))?;
        }
        store.insert(
            &self.name("ffn.w1"),
            init::xavier_uniform(&[d, self.d_ff], d, self.d_ff, rng),
        )?;
        store.insert(
            &self.name("ffn.w2"),
            init::xavier_uniform(&[self.d_ff, d], self.d_ff, d, rng),
        )?;
        for ln in ["ln1", "ln2"] {
            store.insert(&self.name(&format!("{ln}.gain")), Tensor::full(&[d], T::one()))?;
            store.insert(&self.name(&format!("{ln}.bias")), Tensor::zeros(&[d]))?;
        }
        Ok(())
    }

    pub fn load<T: Real>(&self, tape: &mut Tape<T>, store: &ParamStore<T>) -> Result<EncoderBlockParams> {
        let mut p = |leaf: &str| tape.param(store, &self.name(leaf));
        Ok(EncoderBlockParams {
            attn: AttentionParams {
                wq: p("attn.wq")?,
                wk: p("attn.wk")?,
                wv: p("attn.wv")?,
                wo: p("attn.wo")?,
                heads: self.heads,
                head_dim: self.d / self.heads,
            },
            ffn_w1: p("ffn.w1")?,
            ffn_w2: p("ffn.w2")?,
            ln1_gain: p("ln1.gain")?,
            ln1_bias: p("ln1.bias")?,
            ln2_gain: p("ln2.gain")?,
            ln2_bias: p("ln2.bias")?,
        })
    }
}

fn split_heads<T: Real>(tape: &mut Tape<T>, x: Var, b: usize, l: usize, heads: usize, hd: usize) -> Result<Var> {
    let x = tape.reshape(x, &[b, l, heads, hd])?;
    tape.permute(x, &[0, 2, 1, 3])
}

/// Self-attention over `x[B, L, d]` with a `[B, L]` key mask. Returns the
/// projected output and the attention weights `[B, heads, L, L]`.
pub fn attention_with_weights<T: Real>(
    tape: &mut Tape<T>,
    x: Var,
    mask: &Tensor<T>,
    params: &AttentionParams,
) -> Result<(Var, Var)> {
    let shape = tape.shape(x).to_vec();
    let &[b, l, d] = shape.as_slice() else {
        return Err(Error::shape("multi_head_attention", &shape, mask.shape()));
    };
    let (h, hd) = (params.heads, params.head_dim);
    if h * hd != d {
        return Err(Error::Config(format!("{h} heads x {hd} != d={d}")));
    }
    if mask.shape() != [b, l] {
        return Err(Error::shape("multi_head_attention", &shape, mask.shape()));
    }
    let q = tape.matmul(x, params.wq)?;
    let k = tape.matmul(x, params.wk)?;
    let v = tape.matmul(x, params.wv)?;
    let q = split_heads(tape, q, b, l, h, hd)?;
    let k = split_heads(tape, k, b, l, h, hd)?;
    let v = split_heads(tape, v, b, l, h, hd)?;
    let scores = tape.matmul_t(q, k)?;
    let scores = tape.scale(scores, T::one() / T::of(hd as f64).sqrt());
    let weights = tape.masked_softmax(scores, mask)?;
    let ctx = tape.matmul(weights, v)?;
    let ctx = tape.permute(ctx, &[0, 2, 1, 3])?;
    let ctx = tape.reshape(ctx, &[b, l, d])?;
    let out = tape.matmul(ctx, params.wo)?;
    Ok((out, weights))
}

/// Output rows at padded query positions are computed but meaningless;
/// callers must ignore them.
pub fn multi_head_attention<T: Real>(
    tape: &mut Tape<T>,
    x: Var,
    mask: &Tensor<T>,
    params: &AttentionParams,
    dropout: &mut Dropout<'_>,
) -> Result<Var> {
    let (out, _) = attention_with_weights(tape, x, mask, params)?;
    dropout.apply(tape, out)
}

/// `y = LN(x + Drop(MHA(x)))`, `out = LN(y + Drop(W2·relu(W1·y)))`.
pub fn encoder_block_forward<T: Real>(
    tape: &mut Tape<T>,
    x: Var,
    mask: &Tensor<T>,
    params: &EncoderBlockParams,
    dropout: &mut Dropout<'_>,
) -> Result<Var> {
    let eps = T::of(LAYER_NORM_EPS);
    let a = multi_head_attention(tape, x, mask, &params.attn, dropout)?;
    let y = tape.add(x, a)?;
    let y = tape.layer_norm(y, params.ln1_gain, params.ln1_bias, eps)?;
    let f = tape.matmul(y, params.ffn_w1)?;
    let f = tape.relu(f);
    let f = tape.matmul(f, params.ffn_w2)?;
    let f = dropout.apply(tape, f)?;
    let z = tape.add(y, f)?;
    tape.layer_norm(z, params.ln2_gain, params.ln2_bias, eps)
}
