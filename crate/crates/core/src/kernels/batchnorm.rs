//! Batch normalization over the batch and time axes of [B,C,T] tensors.

use crate::error::{Error, Result};
use crate::param::ParamStore;
use crate::tensor::Tensor;

pub const BN_EPS: f64 = 1e-5;

/// Per-channel statistics saved by the train-mode forward for the backward pass.
pub struct BnCache {
    pub x_hat: Tensor,
    pub inv_std: Vec<f64>,
}

/// Named batchnorm layer. `gamma`/`beta` are trainable; the running statistics
/// are stored as frozen entries so they ride along in checkpoints but are
/// never touched by the optimizer.
#[derive(Debug, Clone)]
pub struct BatchNorm1dLayer {
    pub name: String,
    pub channels: usize,
    pub momentum: f32,
}

impl BatchNorm1dLayer {
    pub fn new(name: &str, channels: usize) -> Self {
        BatchNorm1dLayer {
            name: name.to_string(),
            channels,
            momentum: 0.1,
        }
    }

    fn gamma(&self) -> String {
        format!("{}.gamma", self.name)
    }
    fn beta(&self) -> String {
        format!("{}.beta", self.name)
    }
    fn rmean(&self) -> String {
        format!("{}.running_mean", self.name)
    }
    fn rvar(&self) -> String {
        format!("{}.running_var", self.name)
    }

    pub fn init(&self, store: &mut ParamStore) -> Result<()> {
        store.insert(&self.gamma(), Tensor::full(&[self.channels], 1.0))?;
        store.insert(&self.beta(), Tensor::zeros(&[self.channels]))?;
        store.insert(&self.rmean(), Tensor::zeros(&[self.channels]))?;
        store.insert(&self.rvar(), Tensor::full(&[self.channels], 1.0))?;
        store.freeze_prefix(&self.rmean());
        store.freeze_prefix(&self.rvar());
        Ok(())
    }

    fn check_x(&self, x: &Tensor) -> Result<(usize, usize, usize)> {
        if x.rank() != 3 || x.dim(1) != self.channels {
            return Err(Error::Shape(format!(
                "batchnorm expects x[B,{},T], got {:?}",
                self.channels,
                x.shape()
            )));
        }
        Ok((x.dim(0), x.dim(1), x.dim(2)))
    }

    /// Train-mode forward: normalizes with batch statistics and updates the
    /// running estimates in place.
    pub fn forward_train(&self, store: &mut ParamStore, x: &Tensor) -> Result<(Tensor, BnCache)> {
        let (b, c, t) = self.check_x(x)?;
        let n = b * t;
        if n < 2 {
            return Err(Error::Config(format!(
                "batchnorm train mode needs a population of at least 2, got {n}"
            )));
        }
        let xd = x.data();
        let mut x_hat = vec![0.0f32; xd.len()];
        let mut inv_std = vec![0.0f64; c];
        let mut batch_mean = vec![0.0f32; c];
        let mut batch_var = vec![0.0f32; c];

        for ci in 0..c {
            let mut sum = 0.0f64;
            let mut sum_sq = 0.0f64;
            for bi in 0..b {
                let row = &xd[(bi * c + ci) * t..(bi * c + ci + 1) * t];
                for &v in row {
                    sum += v as f64;
                    sum_sq += (v as f64) * (v as f64);
                }
            }
            let mean = sum / n as f64;
            let var = (sum_sq / n as f64 - mean * mean).max(0.0);
            let istd = 1.0 / (var + BN_EPS).sqrt();
            inv_std[ci] = istd;
            batch_mean[ci] = mean as f32;
            batch_var[ci] = var as f32;
            for bi in 0..b {
                let src = &xd[(bi * c + ci) * t..(bi * c + ci + 1) * t];
                let dst = &mut x_hat[(bi * c + ci) * t..(bi * c + ci + 1) * t];
                for (d, &v) in dst.iter_mut().zip(src.iter()) {
                    *d = ((v as f64 - mean) * istd) as f32;
                }
            }
        }

        // running <- (1-m)*running + m*batch
        let m = self.momentum;
        {
            let rm = store.get_mut(&self.rmean());
            for (r, &bm) in rm.data_mut().iter_mut().zip(batch_mean.iter()) {
                *r = (1.0 - m) * *r + m * bm;
            }
        }
        {
            let rv = store.get_mut(&self.rvar());
            for (r, &bv) in rv.data_mut().iter_mut().zip(batch_var.iter()) {
                *r = (1.0 - m) * *r + m * bv;
            }
        }

        let x_hat = Tensor::from_vec(x.shape(), x_hat)?;
        let y = self.scale_shift(store, &x_hat)?;
        Ok((y, BnCache { x_hat, inv_std }))
    }

    /// Eval-mode forward: normalize with the stored running statistics.
    pub fn forward_eval(&self, store: &ParamStore, x: &Tensor) -> Result<Tensor> {
        let (b, c, t) = self.check_x(x)?;
        let rm = store.get(&self.rmean()).data().to_vec();
        let rv = store.get(&self.rvar()).data().to_vec();
        let xd = x.data();
        let mut x_hat = vec![0.0f32; xd.len()];
        for ci in 0..c {
            let istd = 1.0 / ((rv[ci] as f64) + BN_EPS).sqrt();
            let mean = rm[ci] as f64;
            for bi in 0..b {
                let src = &xd[(bi * c + ci) * t..(bi * c + ci + 1) * t];
                let dst = &mut x_hat[(bi * c + ci) * t..(bi * c + ci + 1) * t];
                for (d, &v) in dst.iter_mut().zip(src.iter()) {
                    *d = ((v as f64 - mean) * istd) as f32;
                }
            }
        }
        self.scale_shift(store, &Tensor::from_vec(x.shape(), x_hat)?)
    }

    fn scale_shift(&self, store: &ParamStore, x_hat: &Tensor) -> Result<Tensor> {
        let (b, c, t) = self.check_x(x_hat)?;
        let g = store.get(&self.gamma()).data();
        let be = store.get(&self.beta()).data();
        let mut y = vec![0.0f32; x_hat.len()];
        let xh = x_hat.data();
        for bi in 0..b {
            for ci in 0..c {
                let src = &xh[(bi * c + ci) * t..(bi * c + ci + 1) * t];
                let dst = &mut y[(bi * c + ci) * t..(bi * c + ci + 1) * t];
                for (d, &v) in dst.iter_mut().zip(src.iter()) {
                    *d = g[ci] * v + be[ci];
                }
            }
        }
        Tensor::from_vec(x_hat.shape(), y)
    }

    /// Train-mode backward through the batch statistics.
    pub fn backward(&self, store: &mut ParamStore, cache: &BnCache, upstream: &Tensor) -> Result<Tensor> {
        let (b, c, t) = self.check_x(upstream)?;
        let n = (b * t) as f64;
        let g = store.get(&self.gamma()).data().to_vec();
        let xh = cache.x_hat.data();
        let ud = upstream.data();

        let mut dgamma = vec![0.0f32; c];
        let mut dbeta = vec![0.0f32; c];
        let mut dx = vec![0.0f32; ud.len()];

        for ci in 0..c {
            let mut sum_u = 0.0f64;
            let mut sum_u_xh = 0.0f64;
            for bi in 0..b {
                let base = (bi * c + ci) * t;
                for ti in 0..t {
                    let u = ud[base + ti] as f64;
                    sum_u += u;
                    sum_u_xh += u * xh[base + ti] as f64;
                }
            }
            dbeta[ci] = sum_u as f32;
            dgamma[ci] = sum_u_xh as f32;

            // dx = gamma*istd/N * (N*u - sum_u - x_hat * sum_u_xh)
            let coeff = g[ci] as f64 * cache.inv_std[ci] / n;
            for bi in 0..b {
                let base = (bi * c + ci) * t;
                for ti in 0..t {
                    let u = ud[base + ti] as f64;
                    let xhv = xh[base + ti] as f64;
                    dx[base + ti] = (coeff * (n * u - sum_u - xhv * sum_u_xh)) as f32;
                }
            }
        }

        store.accumulate_grad(&self.gamma(), &Tensor::from_vec(&[c], dgamma)?)?;
        store.accumulate_grad(&self.beta(), &Tensor::from_vec(&[c], dbeta)?)?;
        Tensor::from_vec(upstream.shape(), dx)
    }
}


#[cfg(test)]
mod grad_tests {
    use super::*;
    use crate::gradcheck::grad_check_param;
    use crate::rng::Rng;
    use crate::tensor::Tensor;

    #[test]
    fn input_and_affine_gradients_match_finite_differences() {
        let bn = BatchNorm1dLayer::new("bn", 2);
        let mut store = ParamStore::new();
        bn.init(&mut store).unwrap();
        let mut rng = Rng::new(5);
        let x: Vec<f32> = (0..12).map(|_| rng.uniform(-1.0, 1.0)).collect();
        store.insert("x", Tensor::from_vec(&[1, 2, 6], x).unwrap()).unwrap();
        let weights: Vec<f32> = (0..12).map(|i| ((i as f32) * 0.7).sin() / 12.0).collect();

        let loss = |s: &ParamStore| -> crate::error::Result<f64> {
            let mut s2 = s.clone();
            let x = s.get("x").clone();
            let (y, _) = bn.forward_train(&mut s2, &x)?;
            Ok(y.data()
                .iter()
                .zip(&weights)
                .map(|(&v, &w)| v as f64 * w as f64)
                .sum())
        };

        // analytic gradients for x, gamma, beta
        let x = store.get("x").clone();
        let mut fwd_store = store.clone();
        let (y, cache) = bn.forward_train(&mut fwd_store, &x).unwrap();
        let up = Tensor::from_vec(y.shape(), weights.clone()).unwrap();
        let dx = bn.backward(&mut store, &cache, &up).unwrap();
        store.grad_mut("x").unwrap().add_assign(&dx).unwrap();

        for name in ["x", "bn.gamma", "bn.beta"] {
            let mut probe = store.clone();
            let report = grad_check_param(loss, &mut probe, name, 2e-3).unwrap();
            assert!(report.passes(1e-4), "{name}: rel err {}", report.max_rel_err);
        }
    }
}
