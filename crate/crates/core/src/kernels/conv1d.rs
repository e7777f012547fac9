//! 1-D convolution (cross-correlation) with same-length zero padding.

use crate::error::{Error, Result};
use crate::math::{axpy, dot};
use crate::param::ParamStore;
use crate::rng::Rng;
use crate::tensor::Tensor;

fn check_args(x: &Tensor, w: &Tensor, bias: &Tensor) -> Result<(usize, usize, usize, usize, usize)> {
    if x.rank() != 3 || w.rank() != 3 || bias.rank() != 1 {
        return Err(Error::Shape(format!(
            "conv1d expects x[B,C,T], w[Cout,Cin,K], b[Cout]; got {:?} {:?} {:?}",
            x.shape(),
            w.shape(),
            bias.shape()
        )));
    }
    let (b, cin, t) = (x.dim(0), x.dim(1), x.dim(2));
    let (cout, wcin, k) = (w.dim(0), w.dim(1), w.dim(2));
    if k % 2 == 0 {
        return Err(Error::Config(format!("conv1d kernel size must be odd, got {k}")));
    }
    if cin != wcin || bias.dim(0) != cout {
        return Err(Error::Shape(format!(
            "conv1d dims do not conform: x {:?}, w {:?}, b {:?}",
            x.shape(),
            w.shape(),
            bias.shape()
        )));
    }
    Ok((b, cin, t, cout, k))
}

/// y[b,o,t] = bias[o] + sum_{c,k} w[o,c,k] * x[b,c,t+k-K/2], zero outside [0,T).
pub fn conv1d_forward(x: &Tensor, w: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let (b, cin, t, cout, k) = check_args(x, w, bias)?;
    let pad = k / 2;
    let xd = x.data();
    let wd = w.data();
    let mut out = vec![0.0f32; b * cout * t];
    for bi in 0..b {
        for o in 0..cout {
            let y_row = &mut out[(bi * cout + o) * t..(bi * cout + o + 1) * t];
            y_row.iter_mut().for_each(|v| *v = bias.data()[o]);
            for c in 0..cin {
                let x_row = &xd[(bi * cin + c) * t..(bi * cin + c + 1) * t];
                for ki in 0..k {
                    let off = ki as isize - pad as isize;
                    let t0 = (-off).max(0) as usize;
                    let t1 = (t as isize).min(t as isize - off) as usize;
                    if t0 >= t1 {
                        continue;
                    }
                    let wv = wd[(o * cin + c) * k + ki];
                    let src = &x_row[(t0 as isize + off) as usize..(t1 as isize + off) as usize];
                    axpy(wv, src, &mut y_row[t0..t1]);
                }
            }
        }
    }
    Tensor::from_vec(&[b, cout, t], out)
}

pub struct Conv1dGrads {
    pub dx: Tensor,
    pub dw: Tensor,
    pub db: Tensor,
}

pub fn conv1d_backward(x: &Tensor, w: &Tensor, upstream: &Tensor) -> Result<Conv1dGrads> {
    let (b, cin, t, cout, k) = check_args(x, w, &Tensor::zeros(&[w.dim(0)]))?;
    if upstream.shape() != [b, cout, t] {
        return Err(Error::Shape(format!(
            "conv1d backward upstream {:?}, expected [{b}, {cout}, {t}]",
            upstream.shape()
        )));
    }
    let pad = k / 2;
    let xd = x.data();
    let wd = w.data();
    let ud = upstream.data();

    let mut dx = vec![0.0f32; b * cin * t];
    let mut dw = vec![0.0f32; cout * cin * k];
    let mut db = vec![0.0f32; cout];

    for bi in 0..b {
        for o in 0..cout {
            let u_row = &ud[(bi * cout + o) * t..(bi * cout + o + 1) * t];
            db[o] += u_row.iter().sum::<f32>();
            for c in 0..cin {
                let x_row = &xd[(bi * cin + c) * t..(bi * cin + c + 1) * t];
                let dx_row = &mut dx[(bi * cin + c) * t..(bi * cin + c + 1) * t];
                for ki in 0..k {
                    let off = ki as isize - pad as isize;
                    let t0 = (-off).max(0) as usize;
                    let t1 = (t as isize).min(t as isize - off) as usize;
                    if t0 >= t1 {
                        continue;
                    }
                    let src_range = (t0 as isize + off) as usize..(t1 as isize + off) as usize;
                    dw[(o * cin + c) * k + ki] += dot(&u_row[t0..t1], &x_row[src_range.clone()]);
                    axpy(wd[(o * cin + c) * k + ki], &u_row[t0..t1], &mut dx_row[src_range]);
                }
            }
        }
    }
    Ok(Conv1dGrads {
        dx: Tensor::from_vec(&[b, cin, t], dx)?,
        dw: Tensor::from_vec(&[cout, cin, k], dw)?,
        db: Tensor::from_vec(&[cout], db)?,
    })
}

/// Named conv layer over a [`ParamStore`].
#[derive(Debug, Clone)]
pub struct Conv1dLayer {
    pub name: String,
    pub cin: usize,
    pub cout: usize,
    pub kernel: usize,
}

impl Conv1dLayer {
    pub fn new(name: &str, cin: usize, cout: usize, kernel: usize) -> Self {
        Conv1dLayer {
            name: name.to_string(),
            cin,
            cout,
            kernel,
        }
    }

    fn w_name(&self) -> String {
        format!("{}.w", self.name)
    }

    fn b_name(&self) -> String {
        format!("{}.b", self.name)
    }

    pub fn init(&self, store: &mut ParamStore, rng: &mut Rng) -> Result<()> {
        if self.kernel % 2 == 0 {
            return Err(Error::Config(format!(
                "conv1d kernel size must be odd, got {}",
                self.kernel
            )));
        }
        store.insert_kaiming(
            &self.w_name(),
            &[self.cout, self.cin, self.kernel],
            self.cin * self.kernel,
            rng,
        )?;
        store.insert(&self.b_name(), Tensor::zeros(&[self.cout]))
    }

    pub fn init_zero(&self, store: &mut ParamStore) -> Result<()> {
        store.insert(&self.w_name(), Tensor::zeros(&[self.cout, self.cin, self.kernel]))?;
        store.insert(&self.b_name(), Tensor::zeros(&[self.cout]))
    }

    pub fn forward(&self, store: &ParamStore, x: &Tensor) -> Result<Tensor> {
        conv1d_forward(x, store.get(&self.w_name()), store.get(&self.b_name()))
    }

    pub fn backward(&self, store: &mut ParamStore, x: &Tensor, upstream: &Tensor) -> Result<Tensor> {
        let grads = conv1d_backward(x, store.get(&self.w_name()), upstream)?;
        store.accumulate_grad(&self.w_name(), &grads.dw)?;
        store.accumulate_grad(&self.b_name(), &grads.db)?;
        Ok(grads.dx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_delta_kernel_is_identity() {
        let x = Tensor::from_vec(&[1, 1, 5], vec![0.5, -1.0, 2.0, 0.0, 3.0]).unwrap();
        let w = Tensor::from_vec(&[1, 1, 3], vec![0.0, 1.0, 0.0]).unwrap();
        let b = Tensor::zeros(&[1]);
        let y = conv1d_forward(&x, &w, &b).unwrap();
        assert_eq!(y.data(), x.data());
    }

    #[test]
    fn hand_convolution_box_kernel() {
        // x=[0,1,0], kernel=[1,1,1] -> [1,1,1]
        let x = Tensor::from_vec(&[1, 1, 3], vec![0.0, 1.0, 0.0]).unwrap();
        let w = Tensor::from_vec(&[1, 1, 3], vec![1.0, 1.0, 1.0]).unwrap();
        let b = Tensor::zeros(&[1]);
        let y = conv1d_forward(&x, &w, &b).unwrap();
        assert_eq!(y.data(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn zero_kernel_with_bias_is_constant() {
        let x = Tensor::from_vec(&[1, 1, 4], vec![3.0, -2.0, 5.0, 7.0]).unwrap();
        let w = Tensor::zeros(&[1, 1, 3]);
        let b = Tensor::from_vec(&[1], vec![0.25]).unwrap();
        let y = conv1d_forward(&x, &w, &b).unwrap();
        assert_eq!(y.data(), &[0.25, 0.25, 0.25, 0.25]);
    }

    #[test]
    fn even_kernel_rejected() {
        let x = Tensor::zeros(&[1, 1, 4]);
        let w = Tensor::zeros(&[1, 1, 2]);
        let b = Tensor::zeros(&[1]);
        match conv1d_forward(&x, &w, &b) {
            Err(Error::Config(_)) => {}
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn time_shift_equivariance_in_the_interior() {
        // Shifting the input by one frame shifts the output by one frame away
        // from the padded boundary.
        let t = 8;
        let mut rng = crate::rng::Rng::new(5);
        let x: Vec<f32> = (0..t).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let mut x_shift = vec![0.0f32; t];
        x_shift[1..].copy_from_slice(&x[..t - 1]);
        let w = Tensor::from_vec(&[1, 1, 3], vec![0.3, -0.5, 0.2]).unwrap();
        let b = Tensor::from_vec(&[1], vec![0.1]).unwrap();
        let y = conv1d_forward(&Tensor::from_vec(&[1, 1, t], x).unwrap(), &w, &b).unwrap();
        let ys = conv1d_forward(&Tensor::from_vec(&[1, 1, t], x_shift).unwrap(), &w, &b).unwrap();
        for i in 2..t - 1 {
            assert!((ys.data()[i] - y.data()[i - 1]).abs() < 1e-6);
        }
    }
}
