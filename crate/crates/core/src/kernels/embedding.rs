//! Token embedding: row gather with a scatter backward.

use crate::error::{Error, Result};
use crate::param::ParamStore;
use crate::rng::Rng;
use crate::tensor::Tensor;

/// Gather rows of `table` ([V,E]) at `tokens`, producing [T,E].
pub fn embedding_forward(tokens: &[u32], table: &Tensor) -> Result<Tensor> {
    if table.rank() != 2 {
        return Err(Error::Shape(format!(
            "embedding table must be [V,E], got {:?}",
            table.shape()
        )));
    }
    let (v, e) = (table.dim(0), table.dim(1));
    let mut out = vec![0.0f32; tokens.len() * e];
    for (i, &tok) in tokens.iter().enumerate() {
        let tok = tok as usize;
        if tok >= v {
            return Err(Error::Index(format!("token {tok} >= vocab size {v}")));
        }
        out[i * e..(i + 1) * e].copy_from_slice(&table.data()[tok * e..(tok + 1) * e]);
    }
    Tensor::from_vec(&[tokens.len(), e], out)
}

/// Scatter `upstream` rows into the table gradient.
pub fn embedding_backward(tokens: &[u32], table_shape: &[usize], upstream: &Tensor) -> Result<Tensor> {
    let e = table_shape[1];
    if upstream.shape() != [tokens.len(), e] {
        return Err(Error::Shape(format!(
            "embedding backward upstream {:?}, expected [{}, {e}]",
            upstream.shape(),
            tokens.len()
        )));
    }
    let mut dtable = Tensor::zeros(table_shape);
    for (i, &tok) in tokens.iter().enumerate() {
        let tok = tok as usize;
        let dst = &mut dtable.data_mut()[tok * e..(tok + 1) * e];
        for (d, &u) in dst.iter_mut().zip(&upstream.data()[i * e..(i + 1) * e]) {
            *d += u;
        }
    }
    Ok(dtable)
}

/// Named embedding table over a [`ParamStore`].
#[derive(Debug, Clone)]
pub struct EmbeddingLayer {
    pub name: String,
    pub vocab: usize,
    pub dim: usize,
}

impl EmbeddingLayer {
    pub fn new(name: &str, vocab: usize, dim: usize) -> Self {
        EmbeddingLayer {
            name: name.to_string(),
            vocab,
            dim,
        }
    }

    fn table(&self) -> String {
        format!("{}.table", self.name)
    }

    pub fn init(&self, store: &mut ParamStore, rng: &mut Rng) -> Result<()> {
        store.insert_embedding(&self.table(), &[self.vocab, self.dim], rng)
    }

    pub fn forward(&self, store: &ParamStore, tokens: &[u32]) -> Result<Tensor> {
        embedding_forward(tokens, store.get(&self.table()))
    }

    pub fn backward(&self, store: &mut ParamStore, tokens: &[u32], upstream: &Tensor) -> Result<()> {
        let d = embedding_backward(tokens, &[self.vocab, self.dim], upstream)?;
        store.accumulate_grad(&self.table(), &d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gathers_the_requested_row() {
        let table = Tensor::from_vec(&[4, 2], vec![0., 1., 2., 3., 4., 5., 6., 7.]).unwrap();
        let y = embedding_forward(&[3], &table).unwrap();
        assert_eq!(y.data(), &[6.0, 7.0]);
    }

    #[test]
    fn out_of_range_token_is_an_index_error() {
        let table = Tensor::zeros(&[4, 2]);
        match embedding_forward(&[4], &table) {
            Err(Error::Index(_)) => {}
            other => panic!("expected index error, got {other:?}"),
        }
    }

    #[test]
    fn backward_accumulates_repeated_tokens() {
        let upstream = Tensor::from_vec(&[2, 2], vec![1.0, 2.0, 10.0, 20.0]).unwrap();
        let d = embedding_backward(&[1, 1], &[3, 2], &upstream).unwrap();
        assert_eq!(&d.data()[2..4], &[11.0, 22.0]);
    }
}
