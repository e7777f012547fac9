//! Adam optimizer over a [`ParamStore`].

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::param::ParamStore;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy)]
pub struct AdamConfig {
    pub lr: f32,
    pub beta1: f32,
    pub beta2: f32,
    pub eps: f32,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Adam state: first/second moment buffers keyed by parameter name plus the
/// shared step counter. Iteration order is the store's name order, so two
/// runs with the same seed update parameters identically.
pub struct Adam {
    pub cfg: AdamConfig,
    m: BTreeMap<String, Tensor>,
    v: BTreeMap<String, Tensor>,
    t: u64,
    /// (prefix, lr) overrides checked in insertion order; first match wins.
    lr_overrides: Vec<(String, f32)>,
}

impl Adam {
    pub fn new(cfg: AdamConfig) -> Self {
        Adam {
            cfg,
            m: BTreeMap::new(),
            v: BTreeMap::new(),
            t: 0,
            lr_overrides: Vec::new(),
        }
    }

    /// Use a different learning rate for parameters whose name starts with `prefix`.
    pub fn with_lr_override(mut self, prefix: &str, lr: f32) -> Self {
        self.lr_overrides.push((prefix.to_string(), lr));
        self
    }

    fn lr_for(&self, name: &str) -> f32 {
        for (prefix, lr) in &self.lr_overrides {
            if name.starts_with(prefix.as_str()) {
                return *lr;
            }
        }
        self.cfg.lr
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// One Adam update over all unfrozen entries. Gradients are validated
    /// first; a non-finite gradient aborts the step before any parameter
    /// moves. Gradients are zeroed after a successful step.
    pub fn step(&mut self, store: &mut ParamStore) -> Result<()> {
        for (name, p) in store.iter() {
            if p.frozen {
                continue;
            }
            if let Err(e) = p.grad.check_finite(&format!("grad({name})")) {
                return Err(Error::NonFinite(format!("adam step aborted: {e}")));
            }
        }

        self.t += 1;
        let t = self.t as f64;
        let b1 = self.cfg.beta1 as f64;
        let b2 = self.cfg.beta2 as f64;
        let bias1 = 1.0 - b1.powf(t);
        let bias2 = 1.0 - b2.powf(t);
        let eps = self.cfg.eps as f64;

        for (name, p) in store.iter_mut() {
            if p.frozen {
                continue;
            }
            let lr = self.lr_for(name) as f64;
            let m = self
                .m
                .entry(name.clone())
                .or_insert_with(|| Tensor::zeros(p.value.shape()));
            let v = self
                .v
                .entry(name.clone())
                .or_insert_with(|| Tensor::zeros(p.value.shape()));
            let g = p.grad.data();
            let md = m.data_mut();
            let vd = v.data_mut();
            let pd = p.value.data_mut();
            for i in 0..g.len() {
                let gi = g[i] as f64;
                let mi = b1 * md[i] as f64 + (1.0 - b1) * gi;
                let vi = b2 * vd[i] as f64 + (1.0 - b2) * gi * gi;
                md[i] = mi as f32;
                vd[i] = vi as f32;
                let m_hat = mi / bias1;
                let v_hat = vi / bias2;
                pd[i] = (pd[i] as f64 - lr * m_hat / (v_hat.sqrt() + eps)) as f32;
            }
            p.grad.fill_zero();
        }
        Ok(())
    }
}
