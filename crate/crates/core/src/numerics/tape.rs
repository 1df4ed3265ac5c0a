//! Reverse-mode differentiation over an append-only tape.
//!
//! Every operation evaluates eagerly and records enough state on the tape to
//! run its adjoint later. Nodes are only differentiated when some leaf below
//! them asked for a gradient.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::kernels::{gemm_nn, gemm_nt, gemm_tn};
use super::scalar::is_masked;
use super::{ParamStore, Real, Tensor};
use crate::{Error, Result};

/// Handle to a value on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op<T> {
    Leaf,
    MatMul {
        a: Var,
        b: Var,
        trans_b: bool,
        batch: usize,
        b_shared: bool,
        m: usize,
        k: usize,
        n: usize,
    },
    Add {
        a: Var,
        b: Var,
    },
    Mul {
        a: Var,
        b: Var,
    },
    Scale {
        a: Var,
        s: T,
    },
    Relu(Var),
    Tanh(Var),
    Softmax(Var),
    LayerNorm {
        x: Var,
        gain: Var,
        bias: Var,
        xhat: Vec<T>,
        inv_std: Vec<T>,
    },
    Dropout {
        x: Var,
        keep: Vec<T>,
    },
    Reshape(Var),
    Permute {
        a: Var,
        perm: Vec<usize>,
    },
    GatherRows {
        src: Var,
        idx: Vec<usize>,
        width: usize,
    },
    ReplaceRows {
        base: Var,
        rows: Var,
        idx: Vec<usize>,
        width: usize,
    },
    CrossEntropy {
        logits: Var,
        labels: Vec<usize>,
        probs: Vec<T>,
    },
    Sum(Var),
}

#[derive(Debug)]
struct Node<T> {
    value: Tensor<T>,
    op: Op<T>,
    needs_grad: bool,
}

/// Append-only computation record.
#[derive(Debug, Default)]
pub struct Tape<T = f32> {
    nodes: Vec<Node<T>>,
    params: BTreeMap<String, Var>,
}

/// Adjoints produced by [`Tape::backward`].
#[derive(Debug)]
pub struct Gradients<T> {
    grads: Vec<Option<Vec<T>>>,
    params: BTreeMap<String, Var>,
}

impl<T: Real> Gradients<T> {
    pub fn wrt(&self, v: Var) -> Option<&[T]> {
        self.grads.get(v.0).and_then(|g| g.as_deref())
    }

    /// Overwrites the gradient of every parameter in `store`. Parameters the
    /// tape never touched get an all-zero gradient.
    pub fn write_to(&self, store: &mut ParamStore<T>) {
        for p in store.iter_mut() {
            let n = p.tensor.numel();
            let g = self
                .params
                .get(&p.name)
                .and_then(|v| self.grads[v.0].clone())
                .unwrap_or_else(|| vec![T::zero(); n]);
            p.tensor.grad = Some(g);
        }
    }
}

fn accumulate<T: Real>(slot: &mut Option<Vec<T>>, len: usize) -> &mut Vec<T> {
    slot.get_or_insert_with(|| vec![T::zero(); len])
}

fn batch_of(shape: &[usize]) -> usize {
    shape[..shape.len() - 2].iter().product()
}

impl<T: Real> Tape<T> {
    pub fn new() -> Self {
        Tape {
            nodes: Vec::new(),
            params: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    fn push(&mut self, value: Tensor<T>, op: Op<T>, needs_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    /// A value that never receives a gradient.
    pub fn constant(&mut self, t: Tensor<T>) -> Var {
        self.push(t, Op::Leaf, false)
    }

    /// A free variable that receives a gradient.
    pub fn leaf(&mut self, t: Tensor<T>) -> Var {
        self.push(t, Op::Leaf, true)
    }

    /// Loads a named parameter. Repeated loads of the same name return the same
    /// node so gradients from every use accumulate in one place.
    pub fn param(&mut self, store: &ParamStore<T>, name: &str) -> Result<Var> {
        if let Some(v) = self.params.get(name) {
            return Ok(*v);
        }
        let p = store
            .get(name)
            .ok_or_else(|| Error::Invariant(format!("unknown parameter {name}")))?;
        let mut value = p.tensor.clone();
        value.grad = None;
        let v = self.push(value, Op::Leaf, true);
        self.params.insert(name.to_string(), v);
        Ok(v)
    }

    /// Batched matrix product `a[.., m, k] · b[.., k, n]`. `b` either has the
    /// same leading dimensions as `a` or is a plain matrix shared by every batch.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.matmul_impl(a, b, false)
    }

    /// `a[.., m, k] · b[.., n, k]ᵀ`
    pub fn matmul_t(&mut self, a: Var, b: Var) -> Result<Var> {
        self.matmul_impl(a, b, true)
    }

    fn matmul_impl(&mut self, a: Var, b: Var, trans_b: bool) -> Result<Var> {
        let sa = self.shape(a).to_vec();
        let sb = self.shape(b).to_vec();
        let op = if trans_b { "matmul_t" } else { "matmul" };
        if sa.len() < 2 || sb.len() < 2 {
            return Err(Error::shape(op, &sa, &sb));
        }
        let (m, k) = (sa[sa.len() - 2], sa[sa.len() - 1]);
        let (kb, n) = if trans_b {
            (sb[sb.len() - 1], sb[sb.len() - 2])
        } else {
            (sb[sb.len() - 2], sb[sb.len() - 1])
        };
        if k != kb {
            return Err(Error::shape(op, &sa, &sb));
        }
        let b_shared = sb.len() == 2;
        if !b_shared && sa[..sa.len() - 2] != sb[..sb.len() - 2] {
            return Err(Error::shape(op, &sa, &sb));
        }
        let batch = batch_of(&sa);
        let mut out = vec![T::zero(); batch * m * n];
        {
            let av = self.value(a).data();
            let bv = self.value(b).data();
            let bstride = if b_shared { 0 } else { k * n };
            for i in 0..batch {
                let ab = &av[i * m * k..(i + 1) * m * k];
                let bb = &bv[i * bstride..i * bstride + k * n];
                let cb = &mut out[i * m * n..(i + 1) * m * n];
                if trans_b {
                    gemm_nt(ab, bb, cb, m, k, n);
                } else {
                    gemm_nn(ab, bb, cb, m, k, n);
                }
            }
        }
        let mut shape = sa.clone();
        let r = shape.len();
        shape[r - 1] = n;
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(
            Tensor::new(&shape, out)?,
            Op::MatMul {
                a,
                b,
                trans_b,
                batch,
                b_shared,
                m,
                k,
                n,
            },
            needs,
        ))
    }

    /// `a + b` where `b`'s shape is a suffix of `a`'s (bias-style broadcast).
    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let sa = self.shape(a);
        let sb = self.shape(b);
        if sb.len() > sa.len() || sa[sa.len() - sb.len()..] != *sb {
            return Err(Error::shape("add", sa, sb));
        }
        let bv = self.value(b).data();
        let chunk = bv.len().max(1);
        let mut out = self.value(a).data().to_vec();
        for row in out.chunks_mut(chunk) {
            for (o, x) in row.iter_mut().zip(bv) {
                *o += *x;
            }
        }
        let shape = self.shape(a).to_vec();
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(Tensor::new(&shape, out)?, Op::Add { a, b }, needs))
    }

    /// Elementwise product of equally shaped values.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        if self.shape(a) != self.shape(b) {
            return Err(Error::shape("mul", self.shape(a), self.shape(b)));
        }
        let out: Vec<T> = self
            .value(a)
            .data()
            .iter()
            .zip(self.value(b).data())
            .map(|(x, y)| *x * *y)
            .collect();
        let shape = self.shape(a).to_vec();
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(Tensor::new(&shape, out)?, Op::Mul { a, b }, needs))
    }

    pub fn scale(&mut self, a: Var, s: T) -> Var {
        let t = self.map(a, |x| x * s);
        let needs = self.needs(a);
        self.push(t, Op::Scale { a, s }, needs)
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let t = self.map(a, |x| x.max(T::zero()));
        let needs = self.needs(a);
        self.push(t, Op::Relu(a), needs)
    }

    /// Which side of zero every ReLU input fell on, in tape order. Two
    /// evaluations with equal patterns lie on the same smooth piece.
    pub fn relu_pattern(&self) -> Vec<bool> {
        let mut out = Vec::new();
        for node in &self.nodes {
            if let Op::Relu(a) = node.op {
                out.extend(self.value(a).data().iter().map(|&x| x > T::zero()));
            }
        }
        out
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let t = self.map(a, |x| x.tanh());
        let needs = self.needs(a);
        self.push(t, Op::Tanh(a), needs)
    }

    fn map(&self, a: Var, f: impl Fn(T) -> T) -> Tensor<T> {
        let src = self.value(a);
        let data = src.data().iter().map(|x| f(*x)).collect();
        Tensor::new(src.shape(), data).expect("same element count")
    }

    /// Softmax over the last axis after adding an additive mask.
    ///
    /// `mask` has shape `[R_m, L]` (or any shape with last axis `L`) and its
    /// rows are broadcast over consecutive groups of logit rows: logit row `r`
    /// uses mask row `r / (R / R_m)`. This lets a `[B, L]` key mask serve
    /// `[B, heads, L_q, L]` scores. Masked slots come out exactly zero.
    pub fn masked_softmax(&mut self, logits: Var, mask: &Tensor<T>) -> Result<Var> {
        let shape = self.shape(logits).to_vec();
        let l = *shape.last().ok_or_else(|| Error::shape("masked_softmax", &shape, mask.shape()))?;
        if mask.last_dim() != l || l == 0 {
            return Err(Error::shape("masked_softmax", &shape, mask.shape()));
        }
        let rows = self.value(logits).numel() / l;
        let mask_rows = mask.numel() / l;
        if mask_rows == 0 || rows % mask_rows != 0 {
            return Err(Error::shape("masked_softmax", &shape, mask.shape()));
        }
        let group = rows / mask_rows;
        let x = self.value(logits).data();
        let md = mask.data();
        let mut out = vec![T::zero(); x.len()];
        for r in 0..rows {
            let xr = &x[r * l..(r + 1) * l];
            let mr = &md[(r / group) * l..(r / group + 1) * l];
            if mr.iter().all(|m| is_masked(*m)) {
                return Err(Error::Domain(format!(
                    "masked_softmax: row {r} has no valid slot"
                )));
            }
            let mut max = T::neg_infinity();
            for (xv, mv) in xr.iter().zip(mr) {
                if !is_masked(*mv) {
                    max = max.max(*xv + *mv);
                }
            }
            let or = &mut out[r * l..(r + 1) * l];
            let mut sum = T::zero();
            for ((o, xv), mv) in or.iter_mut().zip(xr).zip(mr) {
                if !is_masked(*mv) {
                    *o = (*xv + *mv - max).exp();
                    sum += *o;
                }
            }
            let inv = T::one() / sum;
            for o in or.iter_mut() {
                *o *= inv;
            }
        }
        let needs = self.needs(logits);
        Ok(self.push(Tensor::new(&shape, out)?, Op::Softmax(logits), needs))
    }

    /// Normalizes each row of the last axis, then applies `gain` and `bias`.
    pub fn layer_norm(&mut self, x: Var, gain: Var, bias: Var, eps: T) -> Result<Var> {
        let shape = self.shape(x).to_vec();
        let d = *shape.last().unwrap_or(&0);
        if d == 0 || self.shape(gain) != [d] || self.shape(bias) != [d] {
            return Err(Error::shape("layer_norm", &shape, self.shape(gain)));
        }
        let xv = self.value(x).data();
        let g = self.value(gain).data();
        let b = self.value(bias).data();
        let rows = xv.len() / d;
        let mut out = vec![T::zero(); xv.len()];
        let mut xhat = vec![T::zero(); xv.len()];
        let mut inv_std = vec![T::zero(); rows];
        let dn = T::of(d as f64);
        for r in 0..rows {
            let xr = &xv[r * d..(r + 1) * d];
            let mean = xr.iter().copied().sum::<T>() / dn;
            let var = xr.iter().map(|v| (*v - mean) * (*v - mean)).sum::<T>() / dn;
            let inv = T::one() / (var + eps).sqrt();
            inv_std[r] = inv;
            for j in 0..d {
                let h = (xr[j] - mean) * inv;
                xhat[r * d + j] = h;
                out[r * d + j] = h * g[j] + b[j];
            }
        }
        let needs = self.needs(x) || self.needs(gain) || self.needs(bias);
        Ok(self.push(
            Tensor::new(&shape, out)?,
            Op::LayerNorm {
                x,
                gain,
                bias,
                xhat,
                inv_std,
            },
            needs,
        ))
    }

    /// Inverted dropout: survivors are scaled by `1/(1-rate)`. With no rng
    /// (evaluation) or a zero rate this is the identity and records nothing.
    pub fn dropout<R: Rng + ?Sized>(&mut self, x: Var, rate: f32, rng: Option<&mut R>) -> Result<Var> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::Config(format!("dropout rate {rate} outside [0, 1)")));
        }
        let rng = match rng {
            Some(r) if rate > 0.0 => r,
            _ => return Ok(x),
        };
        let scale = T::of(1.0 / (1.0 - rate as f64));
        let n = self.value(x).numel();
        let keep: Vec<T> = (0..n)
            .map(|_| {
                if rng.random::<f32>() < rate {
                    T::zero()
                } else {
                    scale
                }
            })
            .collect();
        let src = self.value(x);
        let data = src.data().iter().zip(&keep).map(|(v, k)| *v * *k).collect();
        let t = Tensor::new(src.shape(), data)?;
        let needs = self.needs(x);
        Ok(self.push(t, Op::Dropout { x, keep }, needs))
    }

    pub fn reshape(&mut self, a: Var, shape: &[usize]) -> Result<Var> {
        let t = self.value(a).clone().reshape(shape)?;
        let needs = self.needs(a);
        Ok(self.push(t, Op::Reshape(a), needs))
    }

    /// Axis permutation: output axis `i` is input axis `perm[i]`.
    pub fn permute(&mut self, a: Var, perm: &[usize]) -> Result<Var> {
        let src_shape = self.shape(a).to_vec();
        let r = src_shape.len();
        let mut seen = vec![false; r];
        if perm.len() != r || perm.iter().any(|&p| p >= r || core::mem::replace(&mut seen[p], true)) {
            return Err(Error::shape("permute", &src_shape, perm));
        }
        let out_shape: Vec<usize> = perm.iter().map(|&p| src_shape[p]).collect();
        let data = permute_data(self.value(a).data(), &src_shape, perm);
        let needs = self.needs(a);
        Ok(self.push(
            Tensor::new(&out_shape, data)?,
            Op::Permute {
                a,
                perm: perm.to_vec(),
            },
            needs,
        ))
    }

    /// Gathers rows of width `width` from `src` (viewed as `[N, width]`).
    /// Output shape is `[idx.len(), width]`.
    pub fn gather_rows(&mut self, src: Var, idx: &[usize], width: usize) -> Result<Var> {
        let s = self.value(src);
        if width == 0 || s.numel() % width != 0 {
            return Err(Error::shape("gather_rows", s.shape(), &[width]));
        }
        let rows = s.numel() / width;
        let mut out = Vec::with_capacity(idx.len() * width);
        for &i in idx {
            if i >= rows {
                return Err(Error::Dimension(format!(
                    "gather_rows: row {i} out of range for {rows} rows"
                )));
            }
            out.extend_from_slice(&s.data()[i * width..(i + 1) * width]);
        }
        let needs = self.needs(src);
        Ok(self.push(
            Tensor::new(&[idx.len(), width], out)?,
            Op::GatherRows {
                src,
                idx: idx.to_vec(),
                width,
            },
            needs,
        ))
    }

    /// Copy of `base` (viewed as `[N, width]`) with row `idx[j]` replaced by
    /// row `j` of `rows`. Indices must be distinct.
    pub fn replace_rows(&mut self, base: Var, rows: Var, idx: &[usize], width: usize) -> Result<Var> {
        let b = self.value(base);
        let r = self.value(rows);
        if width == 0 || b.numel() % width != 0 || r.numel() != idx.len() * width {
            return Err(Error::shape("replace_rows", b.shape(), r.shape()));
        }
        let n = b.numel() / width;
        let mut seen = vec![false; n];
        for &i in idx {
            if i >= n || core::mem::replace(&mut seen[i], true) {
                return Err(Error::Dimension(format!(
                    "replace_rows: row index {i} out of range or repeated"
                )));
            }
        }
        let mut out = b.data().to_vec();
        for (j, &i) in idx.iter().enumerate() {
            out[i * width..(i + 1) * width].copy_from_slice(&r.data()[j * width..(j + 1) * width]);
        }
        let shape = b.shape().to_vec();
        let needs = self.needs(base) || self.needs(rows);
        Ok(self.push(
            Tensor::new(&shape, out)?,
            Op::ReplaceRows {
                base,
                rows,
                idx: idx.to_vec(),
                width,
            },
            needs,
        ))
    }

    /// Mean softmax cross-entropy of `logits[B, C]` against class indices.
    pub fn cross_entropy(&mut self, logits: Var, labels: &[usize]) -> Result<Var> {
        let shape = self.shape(logits).to_vec();
        if shape.len() != 2 || shape[0] != labels.len() || shape[0] == 0 {
            return Err(Error::shape("cross_entropy", &shape, &[labels.len()]));
        }
        let c = shape[1];
        if let Some(bad) = labels.iter().find(|&&y| y >= c) {
            return Err(Error::Data(format!("label {bad} out of range for {c} classes")));
        }
        let x = self.value(logits).data();
        let mut probs = vec![T::zero(); x.len()];
        let mut loss = T::zero();
        for (i, &y) in labels.iter().enumerate() {
            let row = &x[i * c..(i + 1) * c];
            let max = row.iter().fold(T::neg_infinity(), |m, v| m.max(*v));
            let pr = &mut probs[i * c..(i + 1) * c];
            let mut sum = T::zero();
            for (p, v) in pr.iter_mut().zip(row) {
                *p = (*v - max).exp();
                sum += *p;
            }
            for p in pr.iter_mut() {
                *p /= sum;
            }
            loss += -(row[y] - max - sum.ln());
        }
        loss /= T::of(labels.len() as f64);
        let needs = self.needs(logits);
        Ok(self.push(
            Tensor::scalar(loss),
            Op::CrossEntropy {
                logits,
                labels: labels.to_vec(),
                probs,
            },
            needs,
        ))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).data().iter().copied().sum::<T>();
        let needs = self.needs(a);
        self.push(Tensor::scalar(s), Op::Sum(a), needs)
    }

    /// Reverse sweep from a scalar `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients<T>> {
        if self.value(loss).numel() != 1 {
            return Err(Error::shape("backward", self.shape(loss), &[]));
        }
        let mut grads: Vec<Option<Vec<T>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(vec![T::one()]);
        for i in (0..=loss.0).rev() {
            let node = &self.nodes[i];
            if !node.needs_grad {
                continue;
            }
            if matches!(node.op, Op::Leaf) {
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            // interior adjoints are dropped once propagated; leaves keep theirs
            self.backprop(&node.op, &node.value, &g, &mut grads);
        }
        Ok(Gradients {
            grads,
            params: self.params.clone(),
        })
    }

    fn backprop(&self, op: &Op<T>, out: &Tensor<T>, g: &[T], grads: &mut [Option<Vec<T>>]) {
        match op {
            Op::Leaf => {}
            Op::MatMul {
                a,
                b,
                trans_b,
                batch,
                b_shared,
                m,
                k,
                n,
            } => {
                let (m, k, n) = (*m, *k, *n);
                let av = self.value(*a).data();
                let bv = self.value(*b).data();
                let bstride = if *b_shared { 0 } else { k * n };
                if self.needs(*a) {
                    let ga = accumulate(&mut grads[a.0], av.len());
                    for i in 0..*batch {
                        let gc = &g[i * m * n..(i + 1) * m * n];
                        let bb = &bv[i * bstride..i * bstride + k * n];
                        let gab = &mut ga[i * m * k..(i + 1) * m * k];
                        if *trans_b {
                            gemm_nn(gc, bb, gab, m, n, k);
                        } else {
                            gemm_nt(gc, bb, gab, m, n, k);
                        }
                    }
                }
                if self.needs(*b) {
                    let gb = accumulate(&mut grads[b.0], bv.len());
                    for i in 0..*batch {
                        let gc = &g[i * m * n..(i + 1) * m * n];
                        let ab = &av[i * m * k..(i + 1) * m * k];
                        let gbb = &mut gb[i * bstride..i * bstride + k * n];
                        if *trans_b {
                            gemm_tn(gc, ab, gbb, m, n, k);
                        } else {
                            gemm_tn(ab, gc, gbb, m, k, n);
                        }
                    }
                }
            }
            Op::Add { a, b } => {
                if self.needs(*a) {
                    let ga = accumulate(&mut grads[a.0], g.len());
                    for (x, y) in ga.iter_mut().zip(g) {
                        *x += *y;
                    }
                }
                if self.needs(*b) {
                    let nb = self.value(*b).numel();
                    let gb = accumulate(&mut grads[b.0], nb);
                    for row in g.chunks(nb.max(1)) {
                        for (x, y) in gb.iter_mut().zip(row) {
                            *x += *y;
                        }
                    }
                }
            }
            Op::Mul { a, b } => {
                let av = self.value(*a).data();
                let bv = self.value(*b).data();
                if self.needs(*a) {
                    let ga = accumulate(&mut grads[a.0], g.len());
                    for ((x, y), w) in ga.iter_mut().zip(g).zip(bv) {
                        *x += *y * *w;
                    }
                }
                if self.needs(*b) {
                    let gb = accumulate(&mut grads[b.0], g.len());
                    for ((x, y), w) in gb.iter_mut().zip(g).zip(av) {
                        *x += *y * *w;
                    }
                }
            }
            Op::Scale { a, s } => {
                let ga = accumulate(&mut grads[a.0], g.len());
                for (x, y) in ga.iter_mut().zip(g) {
                    *x += *y * *s;
                }
            }
            Op::Relu(a) => {
                let av = self.value(*a).data();
                let ga = accumulate(&mut grads[a.0], g.len());
                for ((x, y), v) in ga.iter_mut().zip(g).zip(av) {
                    if *v > T::zero() {
                        *x += *y;
                    }
                }
            }
            Op::Tanh(a) => {
                let ga = accumulate(&mut grads[a.0], g.len());
                for ((x, y), t) in ga.iter_mut().zip(g).zip(out.data()) {
                    *x += *y * (T::one() - *t * *t);
                }
            }
            Op::Softmax(a) => {
                let l = out.last_dim();
                let ga = accumulate(&mut grads[a.0], g.len());
                for ((gr, yr), dr) in g.chunks(l).zip(out.data().chunks(l)).zip(ga.chunks_mut(l)) {
                    let s: T = gr.iter().zip(yr).map(|(a, b)| *a * *b).sum();
                    for ((d, gv), yv) in dr.iter_mut().zip(gr).zip(yr) {
                        *d += *yv * (*gv - s);
                    }
                }
            }
            Op::LayerNorm {
                x,
                gain,
                bias,
                xhat,
                inv_std,
            } => {
                let d = out.last_dim();
                let gv = self.value(*gain).data();
                if self.needs(*gain) {
                    let gg = accumulate(&mut grads[gain.0], d);
                    for (gr, hr) in g.chunks(d).zip(xhat.chunks(d)) {
                        for j in 0..d {
                            gg[j] += gr[j] * hr[j];
                        }
                    }
                }
                if self.needs(*bias) {
                    let gb = accumulate(&mut grads[bias.0], d);
                    for gr in g.chunks(d) {
                        for j in 0..d {
                            gb[j] += gr[j];
                        }
                    }
                }
                if self.needs(*x) {
                    let dn = T::of(d as f64);
                    let gx = accumulate(&mut grads[x.0], g.len());
                    let mut dh = vec![T::zero(); d];
                    for (r, ((gr, hr), xr)) in g
                        .chunks(d)
                        .zip(xhat.chunks(d))
                        .zip(gx.chunks_mut(d))
                        .enumerate()
                    {
                        let mut s1 = T::zero();
                        let mut s2 = T::zero();
                        for j in 0..d {
                            dh[j] = gr[j] * gv[j];
                            s1 += dh[j];
                            s2 += dh[j] * hr[j];
                        }
                        let c = inv_std[r] / dn;
                        for j in 0..d {
                            xr[j] += c * (dn * dh[j] - s1 - hr[j] * s2);
                        }
                    }
                }
            }
            Op::Dropout { x, keep } => {
                let gx = accumulate(&mut grads[x.0], g.len());
                for ((d, gv), k) in gx.iter_mut().zip(g).zip(keep) {
                    *d += *gv * *k;
                }
            }
            Op::Reshape(a) => {
                let ga = accumulate(&mut grads[a.0], g.len());
                for (x, y) in ga.iter_mut().zip(g) {
                    *x += *y;
                }
            }
            Op::Permute { a, perm } => {
                let mut inv = vec![0; perm.len()];
                for (i, &p) in perm.iter().enumerate() {
                    inv[p] = i;
                }
                let back = permute_data(g, out.shape(), &inv);
                let ga = accumulate(&mut grads[a.0], g.len());
                for (x, y) in ga.iter_mut().zip(&back) {
                    *x += *y;
                }
            }
            Op::GatherRows { src, idx, width } => {
                let n = self.value(*src).numel();
                let gs = accumulate(&mut grads[src.0], n);
                for (j, &i) in idx.iter().enumerate() {
                    let dst = &mut gs[i * width..(i + 1) * width];
                    for (x, y) in dst.iter_mut().zip(&g[j * width..(j + 1) * width]) {
                        *x += *y;
                    }
                }
            }
            Op::ReplaceRows {
                base,
                rows,
                idx,
                width,
            } => {
                if self.needs(*base) {
                    let gb = accumulate(&mut grads[base.0], g.len());
                    let mut replaced = vec![false; g.len() / width];
                    for &i in idx {
                        replaced[i] = true;
                    }
                    for (r, (dst, src)) in gb.chunks_mut(*width).zip(g.chunks(*width)).enumerate() {
                        if !replaced[r] {
                            for (x, y) in dst.iter_mut().zip(src) {
                                *x += *y;
                            }
                        }
                    }
                }
                if self.needs(*rows) {
                    let gr = accumulate(&mut grads[rows.0], idx.len() * width);
                    for (j, &i) in idx.iter().enumerate() {
                        let dst = &mut gr[j * width..(j + 1) * width];
                        for (x, y) in dst.iter_mut().zip(&g[i * width..(i + 1) * width]) {
                            *x += *y;
                        }
                    }
                }
            }
            Op::CrossEntropy {
                logits,
                labels,
                probs,
            } => {
                let c = probs.len() / labels.len();
                let scale = g[0] / T::of(labels.len() as f64);
                let gl = accumulate(&mut grads[logits.0], probs.len());
                for (i, &y) in labels.iter().enumerate() {
                    for j in 0..c {
                        let onehot = if j == y { T::one() } else { T::zero() };
                        gl[i * c + j] += (probs[i * c + j] - onehot) * scale;
                    }
                }
            }
            Op::Sum(a) => {
                let n = self.value(*a).numel();
                let ga = accumulate(&mut grads[a.0], n);
                for x in ga.iter_mut() {
                    *x += g[0];
                }
            }
        }
    }
}

/// Row-major transpose generalised to any axis order.
fn permute_data<T: Copy>(src: &[T], shape: &[usize], perm: &[usize]) -> Vec<T> {
    let r = shape.len();
    if r == 0 {
        return src.to_vec();
    }
    let mut strides = vec![1usize; r];
    for i in (0..r - 1).rev() {
        strides[i] = strides[i + 1] * shape[i + 1];
    }
    let out_shape: Vec<usize> = perm.iter().map(|&p| shape[p]).collect();
    let out_strides: Vec<usize> = perm.iter().map(|&p| strides[p]).collect();
    let inner = out_shape[r - 1];
    let inner_stride = out_strides[r - 1];
    let mut out = Vec::with_capacity(src.len());
    if src.is_empty() {
        return out;
    }
    let mut counter = vec![0usize; r - 1];
    loop {
        let base: usize = counter.iter().zip(&out_strides).map(|(c, s)| c * s).sum();
        if inner_stride == 1 {
            out.extend_from_slice(&src[base..base + inner]);
        } else {
            out.extend((0..inner).map(|j| src[base + j * inner_stride]));
        }
        // odometer increment over all but the last axis
        let mut ax = r - 1;
        loop {
            if ax == 0 {
                return out;
            }
            ax -= 1;
            counter[ax] += 1;
            if counter[ax] < out_shape[ax] {
                break;
            }
            counter[ax] = 0;
        }
    }
}
