//! Named parameter storage with paired gradient buffers.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::tensor::Tensor;

/// One trainable entry: a value tensor and a gradient buffer of identical shape.
#[derive(Debug, Clone)]
pub struct Param {
    pub value: Tensor,
    pub grad: Tensor,
    /// Frozen entries keep zero gradients and are skipped by the optimizer.
    pub frozen: bool,
}

/// Named collection of trainable tensors.
///
/// A `BTreeMap` keeps iteration order deterministic, which the optimizer and
/// checkpoint writer rely on.
#[derive(Debug, Clone, Default)]
pub struct ParamStore {
    entries: BTreeMap<String, Param>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register a tensor under a unique name. The gradient buffer starts at zero.
    pub fn insert(&mut self, name: &str, value: Tensor) -> Result<()> {
        if self.entries.contains_key(name) {
            return Err(Error::Config(format!("duplicate param name: {name}")));
        }
        let grad = Tensor::zeros(value.shape());
        self.entries.insert(
            name.to_string(),
            Param {
                value,
                grad,
                frozen: false,
            },
        );
        Ok(())
    }

    /// Register a tensor initialized with uniform Kaiming-style scaling by fan-in.
    pub fn insert_kaiming(&mut self, name: &str, shape: &[usize], fan_in: usize, rng: &mut Rng) -> Result<()> {
        let bound = (1.0 / fan_in.max(1) as f64).sqrt() as f32;
        let len: usize = shape.iter().product();
        let data: Vec<f32> = (0..len).map(|_| rng.uniform(-bound, bound)).collect();
        self.insert(name, Tensor::from_vec(shape, data)?)
    }

    /// Register an embedding table initialized N(0, 0.01).
    pub fn insert_embedding(&mut self, name: &str, shape: &[usize], rng: &mut Rng) -> Result<()> {
        let len: usize = shape.iter().product();
        let data: Vec<f32> = (0..len).map(|_| rng.normal(0.0, 0.01)).collect();
        self.insert(name, Tensor::from_vec(shape, data)?)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn get(&self, name: &str) -> &Tensor {
        &self
            .entries
            .get(name)
            .unwrap_or_else(|| panic!("missing param: {name}"))
            .value
    }

    pub fn get_mut(&mut self, name: &str) -> &mut Tensor {
        &mut self
            .entries
            .get_mut(name)
            .unwrap_or_else(|| panic!("missing param: {name}"))
            .value
    }

    pub fn grad(&self, name: &str) -> &Tensor {
        &self
            .entries
            .get(name)
            .unwrap_or_else(|| panic!("missing param: {name}"))
            .grad
    }

    /// Accumulate `delta` into the gradient buffer of `name`.
    ///
    /// Frozen entries silently discard the contribution so a frozen module
    /// keeps an all-zero gradient buffer through any training step.
    pub fn accumulate_grad(&mut self, name: &str, delta: &Tensor) -> Result<()> {
        let p = self
            .entries
            .get_mut(name)
            .ok_or_else(|| Error::Config(format!("missing param: {name}")))?;
        if p.frozen {
            return Ok(());
        }
        p.grad.add_assign(delta)
    }

    /// Accumulate into a slice of the gradient buffer (used by scatter backwards).
    pub fn grad_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        let p = self
            .entries
            .get_mut(name)
            .unwrap_or_else(|| panic!("missing param: {name}"));
        if p.frozen {
            None
        } else {
            Some(&mut p.grad)
        }
    }

    pub fn zero_grads(&mut self) {
        for p in self.entries.values_mut() {
            p.grad.fill_zero();
        }
    }

    /// Mark every entry whose name starts with `prefix` as frozen and clear its gradient.
    pub fn freeze_prefix(&mut self, prefix: &str) {
        for (name, p) in self.entries.iter_mut() {
            if name.starts_with(prefix) {
                p.frozen = true;
                p.grad.fill_zero();
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Param)> {
        self.entries.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&String, &mut Param)> {
        self.entries.iter_mut()
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of scalar parameters.
    pub fn num_scalars(&self) -> usize {
        self.entries.values().map(|p| p.value.len()).sum()
    }

    /// Move every entry of `other` into `self`, erroring on name clashes.
    pub fn merge(&mut self, other: ParamStore) -> Result<()> {
        for (name, param) in other.entries {
            if self.entries.contains_key(&name) {
                return Err(Error::Config(format!("duplicate param name: {name}")));
            }
            self.entries.insert(name, param);
        }
        Ok(())
    }

    /// Extract the entries under `prefix` into a new store, keeping names intact.
    pub fn split_prefix(&mut self, prefix: &str) -> ParamStore {
        let keys: Vec<String> = self
            .entries
            .keys()
            .filter(|k| k.starts_with(prefix))
            .cloned()
            .collect();
        let mut out = ParamStore::new();
        for k in keys {
            let p = self.entries.remove(&k).unwrap();
            out.entries.insert(k, p);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_names_rejected() {
        let mut s = ParamStore::new();
        s.insert("w", Tensor::zeros(&[2])).unwrap();
        assert!(s.insert("w", Tensor::zeros(&[2])).is_err());
    }

    #[test]
    fn frozen_entries_keep_zero_grads() {
        let mut s = ParamStore::new();
        s.insert("enc.w", Tensor::zeros(&[2])).unwrap();
        s.freeze_prefix("enc.");
        s.accumulate_grad("enc.w", &Tensor::full(&[2], 1.0)).unwrap();
        assert_eq!(s.grad("enc.w").data(), &[0.0, 0.0]);
    }

    #[test]
    fn grad_shape_matches_value() {
        let mut s = ParamStore::new();
        s.insert("w", Tensor::zeros(&[3, 4])).unwrap();
        assert_eq!(s.grad("w").shape(), &[3, 4]);
    }
}
