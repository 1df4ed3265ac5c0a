use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{Real, Tensor};
use crate::{Error, Result};

/// A named trainable tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct Parameter<T = f32> {
    pub name: String,
    pub tensor: Tensor<T>,
}

/// Parameters of one model, kept sorted by name so every traversal (optimizer
/// updates, checkpoints, gradient checks) visits them in the same order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamStore<T = f32> {
    params: Vec<Parameter<T>>,
}

impl<T: Real> ParamStore<T> {
    pub fn new() -> Self {
        ParamStore { params: Vec::new() }
    }

    pub fn insert(&mut self, name: &str, mut tensor: Tensor<T>) -> Result<()> {
        match self.params.binary_search_by(|p| p.name.as_str().cmp(name)) {
            Ok(_) => Err(Error::Invariant(format!("duplicate parameter name {name}"))),
            Err(pos) => {
                tensor.requires_grad = true;
                self.params.insert(
                    pos,
                    Parameter {
                        name: name.to_string(),
                        tensor,
                    },
                );
                Ok(())
            }
        }
    }

    pub fn get(&self, name: &str) -> Option<&Parameter<T>> {
        self.params
            .binary_search_by(|p| p.name.as_str().cmp(name))
            .ok()
            .map(|i| &self.params[i])
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Parameter<T>> {
        self.params
            .binary_search_by(|p| p.name.as_str().cmp(name))
            .ok()
            .map(move |i| &mut self.params[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = &Parameter<T>> {
        self.params.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut Parameter<T>> {
        self.params.iter_mut()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.params.iter().map(|p| p.name.as_str())
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Total number of scalar weights.
    pub fn num_scalars(&self) -> usize {
        self.params.iter().map(|p| p.tensor.numel()).sum()
    }

    pub fn zero_grad(&mut self) {
        for p in &mut self.params {
            p.tensor.grad = None;
        }
    }

    pub fn cast<U: Real>(&self) -> ParamStore<U> {
        ParamStore {
            params: self
                .params
                .iter()
                .map(|p| Parameter {
                    name: p.name.clone(),
                    tensor: p.tensor.cast(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iteration_is_lexicographic_and_names_unique() {
        let mut s = ParamStore::<f32>::new();
        for n in ["layer1.w", "embed.word", "layer0.w", "head.bias"] {
            s.insert(n, Tensor::zeros(&[1])).unwrap();
        }
        let names: Vec<&str> = s.names().collect();
        assert_eq!(names, ["embed.word", "head.bias", "layer0.w", "layer1.w"]);
        assert!(s.insert("layer0.w", Tensor::zeros(&[1])).is_err());
        assert!(s.get("head.bias").unwrap().tensor.requires_grad);
    }
}
