//! Fully-connected layer: y = xW + b.

use crate::error::{Error, Result};
use crate::math::{axpy, dot};
use crate::param::ParamStore;
use crate::rng::Rng;
use crate::tensor::Tensor;

/// y[b, o] = sum_i x[b, i] * w[i, o] + bias[o]
pub fn linear_forward(x: &Tensor, w: &Tensor, bias: &Tensor) -> Result<Tensor> {
    if x.rank() != 2 || w.rank() != 2 || bias.rank() != 1 {
        return Err(Error::Shape(format!(
            "linear expects x[B,Din], w[Din,Dout], b[Dout]; got {:?} {:?} {:?}",
            x.shape(),
            w.shape(),
            bias.shape()
        )));
    }
    let (b, din) = (x.dim(0), x.dim(1));
    let (wdin, dout) = (w.dim(0), w.dim(1));
    if din != wdin || bias.dim(0) != dout {
        return Err(Error::Shape(format!(
            "linear dims do not conform: x {:?}, w {:?}, b {:?}",
            x.shape(),
            w.shape(),
            bias.shape()
        )));
    }
    let mut out = vec![0.0f32; b * dout];
    let xd = x.data();
    let wd = w.data();
    for bi in 0..b {
        let row = &xd[bi * din..(bi + 1) * din];
        let dst = &mut out[bi * dout..(bi + 1) * dout];
        dst.copy_from_slice(bias.data());
        for (i, &xi) in row.iter().enumerate() {
            axpy(xi, &wd[i * dout..(i + 1) * dout], dst);
        }
    }
    Tensor::from_vec(&[b, dout], out)
}

/// Gradients of the linear map for one upstream signal.
pub struct LinearGrads {
    pub dx: Tensor,
    pub dw: Tensor,
    pub db: Tensor,
}

pub fn linear_backward(x: &Tensor, w: &Tensor, upstream: &Tensor) -> Result<LinearGrads> {
    let (b, din) = (x.dim(0), x.dim(1));
    let dout = w.dim(1);
    if upstream.shape() != [b, dout] {
        return Err(Error::Shape(format!(
            "linear backward upstream {:?}, expected [{b}, {dout}]",
            upstream.shape()
        )));
    }
    let xd = x.data();
    let wd = w.data();
    let ud = upstream.data();

    let mut dx = vec![0.0f32; b * din];
    let mut dw = vec![0.0f32; din * dout];
    let mut db = vec![0.0f32; dout];
    for bi in 0..b {
        let urow = &ud[bi * dout..(bi + 1) * dout];
        let xrow = &xd[bi * din..(bi + 1) * din];
        for i in 0..din {
            // dx[b,i] = sum_o u[b,o] w[i,o]
            dx[bi * din + i] = dot(urow, &wd[i * dout..(i + 1) * dout]);
            // dw[i,o] += x[b,i] u[b,o]
            axpy(xrow[i], urow, &mut dw[i * dout..(i + 1) * dout]);
        }
        axpy(1.0, urow, &mut db);
    }
    Ok(LinearGrads {
        dx: Tensor::from_vec(&[b, din], dx)?,
        dw: Tensor::from_vec(&[din, dout], dw)?,
        db: Tensor::from_vec(&[dout], db)?,
    })
}

/// Named linear layer over a [`ParamStore`].
#[derive(Debug, Clone)]
pub struct LinearLayer {
    pub name: String,
    pub din: usize,
    pub dout: usize,
}

impl LinearLayer {
    pub fn new(name: &str, din: usize, dout: usize) -> Self {
        LinearLayer {
            name: name.to_string(),
            din,
            dout,
        }
    }

    fn w_name(&self) -> String {
        format!("{}.w", self.name)
    }

    fn b_name(&self) -> String {
        format!("{}.b", self.name)
    }

    pub fn init(&self, store: &mut ParamStore, rng: &mut Rng) -> Result<()> {
        store.insert_kaiming(&self.w_name(), &[self.din, self.dout], self.din, rng)?;
        store.insert(&self.b_name(), Tensor::zeros(&[self.dout]))
    }

    /// Register zero-valued weights and bias (used where the identity or a
    /// constant output at init is part of the contract).
    pub fn init_zero(&self, store: &mut ParamStore) -> Result<()> {
        store.insert(&self.w_name(), Tensor::zeros(&[self.din, self.dout]))?;
        store.insert(&self.b_name(), Tensor::zeros(&[self.dout]))
    }

    pub fn forward(&self, store: &ParamStore, x: &Tensor) -> Result<Tensor> {
        linear_forward(x, store.get(&self.w_name()), store.get(&self.b_name()))
    }

    /// Accumulates parameter gradients into the store and returns dx.
    pub fn backward(&self, store: &mut ParamStore, x: &Tensor, upstream: &Tensor) -> Result<Tensor> {
        let grads = linear_backward(x, store.get(&self.w_name()), upstream)?;
        store.accumulate_grad(&self.w_name(), &grads.dw)?;
        store.accumulate_grad(&self.b_name(), &grads.db)?;
        Ok(grads.dx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_weights_pass_input_through() {
        let x = Tensor::from_vec(&[1, 2], vec![1.0, 2.0]).unwrap();
        let w = Tensor::from_vec(&[2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let b = Tensor::zeros(&[2]);
        let y = linear_forward(&x, &w, &b).unwrap();
        assert_eq!(y.data(), &[1.0, 2.0]);
    }

    #[test]
    fn hand_matrix_multiply() {
        // x=[[1,0]], W=[[2,3],[4,5]], b=[1,1] -> [[3,4]]
        let x = Tensor::from_vec(&[1, 2], vec![1.0, 0.0]).unwrap();
        let w = Tensor::from_vec(&[2, 2], vec![2.0, 3.0, 4.0, 5.0]).unwrap();
        let b = Tensor::from_vec(&[2], vec![1.0, 1.0]).unwrap();
        let y = linear_forward(&x, &w, &b).unwrap();
        assert_eq!(y.data(), &[3.0, 4.0]);
    }

    #[test]
    fn backward_weight_grad_hand_case() {
        // y = xW at x=[[1,2]], upstream=[[1,1]] -> dW=[[1,1],[2,2]]
        let x = Tensor::from_vec(&[1, 2], vec![1.0, 2.0]).unwrap();
        let w = Tensor::zeros(&[2, 2]);
        let upstream = Tensor::from_vec(&[1, 2], vec![1.0, 1.0]).unwrap();
        let g = linear_backward(&x, &w, &upstream).unwrap();
        assert_eq!(g.dw.data(), &[1.0, 1.0, 2.0, 2.0]);
        assert_eq!(g.db.data(), &[1.0, 1.0]);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let x = Tensor::zeros(&[1, 3]);
        let w = Tensor::zeros(&[2, 2]);
        let b = Tensor::zeros(&[2]);
        assert!(linear_forward(&x, &w, &b).is_err());
    }
}
