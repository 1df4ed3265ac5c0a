use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;


use super::{ParamStore, Real};
use crate::{Error, Result};

pub const DEFAULT_LR: f32 = 1e-4;

/// Bias-corrected Adam moments for every parameter of a model.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<T = f32> {
    pub step: u64,
    pub lr: f32,
    pub beta1: f32,
    pub beta2: f32,
    pub eps: f32,
    m: BTreeMap<String, Vec<T>>,
    v: BTreeMap<String, Vec<T>>,
}

impl<T: Real> Default for AdamState<T> {
    fn default() -> Self {
        Self::new(DEFAULT_LR)
    }
}

impl<T: Real> AdamState<T> {
    pub fn new(lr: f32) -> Self {
        AdamState {
            step: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: BTreeMap::new(),
            v: BTreeMap::new(),
        }
    }

    pub fn first_moment(&self, name: &str) -> Option<&[T]> {
        self.m.get(name).map(Vec::as_slice)
    }

    pub fn second_moment(&self, name: &str) -> Option<&[T]> {
        self.v.get(name).map(Vec::as_slice)
    }
}

/// One Adam update over every parameter, in name order. Gradients are reset to
/// zero afterwards.
pub fn adam_step<T: Real>(params: &mut ParamStore<T>, state: &mut AdamState<T>) -> Result<()> {
    if let Some(p) = params.iter().find(|p| p.tensor.grad.is_none()) {
        return Err(Error::Invariant(format!("parameter {} has no gradient", p.name)));
    }
    state.step += 1;
    let t = state.step as i32;
    let (b1, b2) = (state.beta1 as f64, state.beta2 as f64);
    let bc1 = 1.0 - num_traits::Float::powi(b1, t);
    let bc2 = 1.0 - num_traits::Float::powi(b2, t);
    let lr = T::of(state.lr as f64);
    let eps = T::of(state.eps as f64);
    let (b1t, b2t) = (T::of(b1), T::of(b2));
    let (bc1t, bc2t) = (T::of(bc1), T::of(bc2));
    for p in params.iter_mut() {
        let n = p.tensor.numel();
        let m = state.m.entry(p.name.clone()).or_insert_with(|| vec![T::zero(); n]);
        let v = state.v.entry(p.name.clone()).or_insert_with(|| vec![T::zero(); n]);
        if m.len() != n || v.len() != n {
            return Err(Error::Invariant(format!(
                "optimizer moments for {} do not match its shape",
                p.name
            )));
        }
        let mut grad = p.tensor.grad.take().expect("checked above");
        let w = p.tensor.data_mut();
        for i in 0..n {
            let g = grad[i];
            m[i] = b1t * m[i] + (T::one() - b1t) * g;
            v[i] = b2t * v[i] + (T::one() - b2t) * g * g;
            let mhat = m[i] / bc1t;
            let vhat = v[i] / bc2t;
            w[i] -= lr * mhat / (vhat.sqrt() + eps);
            grad[i] = T::zero();
        }
        p.tensor.grad = Some(grad);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Tensor;

    fn store(value: f32, grad: f32) -> ParamStore<f32> {
        let mut s = ParamStore::new();
        s.insert("w", Tensor::new(&[1], alloc::vec![value]).unwrap()).unwrap();
        s.get_mut("w").unwrap().tensor.grad = Some(alloc::vec![grad]);
        s
    }

    #[test]
    fn zero_gradient_leaves_params_and_counts_step() {
        let mut s = store(0.7, 0.0);
        let mut st = AdamState::default();
        adam_step(&mut s, &mut st).unwrap();
        assert_eq!(s.get("w").unwrap().tensor.data(), &[0.7]);
        assert_eq!(st.step, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        // bias-corrected first step: -lr * g / (|g| + eps)
        let mut s = store(0.0, 0.5);
        let mut st = AdamState::default();
        adam_step(&mut s, &mut st).unwrap();
        let w = s.get("w").unwrap().tensor.data()[0] as f64;
        let want = -1e-4 * 0.5 / (0.5 + 1e-8);
        assert!((w - want).abs() < 1e-9, "{w} vs {want}");
        assert_eq!(s.get("w").unwrap().tensor.grad.as_deref(), Some(&[0.0f32][..]));
    }

    #[test]
    fn default_learning_rate() {
        let st: AdamState<f32> = AdamState::default();
        assert_eq!(st.lr, 1e-4);
        assert_eq!((st.beta1, st.beta2, st.eps), (0.9, 0.999, 1e-8));
    }

    #[test]
    fn missing_gradient_names_the_parameter() {
        let mut s = store(0.0, 0.0);
        s.insert("v", Tensor::zeros(&[2])).unwrap();
        let err = adam_step(&mut s, &mut AdamState::default()).unwrap_err();
        assert!(matches!(&err, Error::Invariant(m) if m.contains('v')), "{err}");
    }
}
