//! Inverted dropout with a seeded mask.

use crate::rng::Rng;
use crate::tensor::Tensor;

/// Train-mode dropout: zero with probability `p`, scale survivors by 1/(1-p).
/// Returns the output and the applied multiplier mask for the backward pass.
pub fn dropout_forward(x: &Tensor, p: f32, rng: &mut Rng) -> (Tensor, Vec<f32>) {
    assert!((0.0..1.0).contains(&p), "dropout rate must be in [0,1)");
    if p == 0.0 {
        return (x.clone(), vec![1.0; x.len()]);
    }
    let keep = 1.0 / (1.0 - p);
    let mask: Vec<f32> = (0..x.len())
        .map(|_| if rng.bernoulli(p) { 0.0 } else { keep })
        .collect();
    let data = x
        .data()
        .iter()
        .zip(mask.iter())
        .map(|(&v, &m)| v * m)
        .collect();
    (
        Tensor::from_vec(x.shape(), data).expect("same shape"),
        mask,
    )
}

pub fn dropout_backward(mask: &[f32], upstream: &Tensor) -> Tensor {
    let data = upstream
        .data()
        .iter()
        .zip(mask.iter())
        .map(|(&u, &m)| u * m)
        .collect();
    Tensor::from_vec(upstream.shape(), data).expect("same shape")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate_is_identity() {
        let x = Tensor::from_slice(&[1.0, 2.0, 3.0]);
        let (y, mask) = dropout_forward(&x, 0.0, &mut Rng::new(1));
        assert_eq!(y.data(), x.data());
        assert!(mask.iter().all(|&m| m == 1.0));
    }

    #[test]
    fn survivors_are_rescaled() {
        let x = Tensor::full(&[1000], 1.0);
        let (y, _) = dropout_forward(&x, 0.25, &mut Rng::new(2));
        let mean = y.sum_f64() / 1000.0;
        assert!((mean - 1.0).abs() < 0.12, "inverted dropout keeps the mean, got {mean}");
    }
}
