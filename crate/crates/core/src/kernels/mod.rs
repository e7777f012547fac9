//! The fixed set of differentiable tensor operations every model here is
//! composed of. Each op ships a forward and an explicit backward; there is no
//! graph machinery.

pub mod activations;
pub mod batchnorm;
pub mod conv1d;
pub mod dropout;
pub mod embedding;
pub mod linear;

pub use activations::{exp, exp_backward, gelu, gelu_backward, sigmoid, sigmoid_backward, softplus, softplus_backward};
pub use batchnorm::{BatchNorm1dLayer, BnCache};
pub use conv1d::{conv1d_backward, conv1d_forward, Conv1dLayer};
pub use dropout::{dropout_backward, dropout_forward};
pub use embedding::{embedding_backward, embedding_forward, EmbeddingLayer};
pub use linear::{linear_backward, linear_forward, LinearLayer};
