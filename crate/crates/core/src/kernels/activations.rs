//! Elementwise activations with exact analytic derivatives.
//!
//! Each scalar function lives here in f64 and the tensor wrappers cast
//! through it, so finite-difference probes of the forward agree with the
//! backward to well under the 1e-4 gradient budget.

use crate::tensor::Tensor;

/// Scalar f64 definitions. The tanh form of GeLU is used in both the forward
/// and its derivative, so the pair is self-consistent under differentiation.
pub mod scalar {
    const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;
    const GELU_C: f64 = 0.044_715;

    pub fn gelu(x: f64) -> f64 {
        let u = SQRT_2_OVER_PI * (x + GELU_C * x * x * x);
        0.5 * x * (1.0 + u.tanh())
    }

    pub fn dgelu(x: f64) -> f64 {
        let u = SQRT_2_OVER_PI * (x + GELU_C * x * x * x);
        let t = u.tanh();
        let du = SQRT_2_OVER_PI * (1.0 + 3.0 * GELU_C * x * x);
        0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du
    }

    pub fn sigmoid(x: f64) -> f64 {
        if x >= 0.0 {
            1.0 / (1.0 + (-x).exp())
        } else {
            let e = x.exp();
            e / (1.0 + e)
        }
    }

    /// d sigmoid / dx expressed through the output y = sigmoid(x).
    pub fn dsigmoid_from_y(y: f64) -> f64 {
        y * (1.0 - y)
    }

    /// Numerically stable ln(1 + e^x).
    pub fn softplus(x: f64) -> f64 {
        x.max(0.0) + (-(x.abs())).exp().ln_1p()
    }

    pub fn dsoftplus(x: f64) -> f64 {
        sigmoid(x)
    }
}

fn map(x: &Tensor, f: impl Fn(f64) -> f64) -> Tensor {
    let data = x.data().iter().map(|&v| f(v as f64) as f32).collect();
    Tensor::from_vec(x.shape(), data).expect("same shape")
}

fn map_grad(x: &Tensor, upstream: &Tensor, df: impl Fn(f64) -> f64) -> Tensor {
    debug_assert_eq!(x.shape(), upstream.shape());
    let data = x
        .data()
        .iter()
        .zip(upstream.data().iter())
        .map(|(&v, &u)| (df(v as f64) * u as f64) as f32)
        .collect();
    Tensor::from_vec(x.shape(), data).expect("same shape")
}

pub fn gelu(x: &Tensor) -> Tensor {
    map(x, scalar::gelu)
}

pub fn gelu_backward(x: &Tensor, upstream: &Tensor) -> Tensor {
    map_grad(x, upstream, scalar::dgelu)
}

pub fn sigmoid(x: &Tensor) -> Tensor {
    map(x, scalar::sigmoid)
}

pub fn sigmoid_backward(x: &Tensor, upstream: &Tensor) -> Tensor {
    map_grad(x, upstream, |v| scalar::dsigmoid_from_y(scalar::sigmoid(v)))
}

pub fn softplus(x: &Tensor) -> Tensor {
    map(x, scalar::softplus)
}

pub fn softplus_backward(x: &Tensor, upstream: &Tensor) -> Tensor {
    map_grad(x, upstream, scalar::dsoftplus)
}

pub fn exp(x: &Tensor) -> Tensor {
    map(x, f64::exp)
}

pub fn exp_backward(x: &Tensor, upstream: &Tensor) -> Tensor {
    map_grad(x, upstream, f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gelu_at_zero_is_zero() {
        assert_eq!(scalar::gelu(0.0), 0.0);
        let t = gelu(&Tensor::from_slice(&[0.0]));
        assert_eq!(t.data()[0], 0.0);
    }

    #[test]
    fn gelu_grad_matches_central_difference_at_one() {
        let eps = 1e-4;
        let fd = (scalar::gelu(1.0 + eps) - scalar::gelu(1.0 - eps)) / (2.0 * eps);
        assert!((scalar::dgelu(1.0) - fd).abs() < 1e-5);
    }

    #[test]
    fn scalar_grads_match_central_difference_on_a_grid() {
        let eps = 1e-5;
        for i in -40..=40 {
            let x = i as f64 * 0.25;
            for (f, df) in [
                (scalar::gelu as fn(f64) -> f64, scalar::dgelu as fn(f64) -> f64),
                (scalar::softplus, scalar::dsoftplus),
            ] {
                let fd = (f(x + eps) - f(x - eps)) / (2.0 * eps);
                assert!(
                    (df(x) - fd).abs() < 1e-5 * (1.0 + fd.abs()),
                    "mismatch at {x}: {} vs {}",
                    df(x),
                    fd
                );
            }
        }
    }

    #[test]
    fn softplus_is_stable_at_large_magnitudes() {
        assert!(scalar::softplus(1e4).is_finite());
        assert!(scalar::softplus(-1e4) >= 0.0);
        assert!((scalar::softplus(0.0) - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn activations_stay_finite_within_bound() {
        // |x| <= 1e4 must not produce NaN/Inf anywhere in the activation set.
        let xs = Tensor::from_slice(&[-1e4, -10.0, -1.0, 0.0, 1.0, 10.0, 1e4]);
        for t in [gelu(&xs), sigmoid(&xs), softplus(&xs)] {
            t.check_finite("act").unwrap();
        }
    }
}
