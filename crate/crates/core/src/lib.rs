//! Audio-driven facial animation at desk scale.
//!
//! The crate covers the full path from a waveform to rendered frames:
//!
//! 1. pitch extraction, log-scale tokenization, and a learned pitch encoder;
//! 2. a conditional sequence VAE (with a flow prior) that maps per-frame audio
//!    features and pitch encodings to 68-point 3-D facial landmarks, plus an
//!    adversarially trained refinement net;
//! 3. a locally-linear-embedding projector that pulls predicted landmarks
//!    toward the renderer's trusted landmark set;
//! 4. a landmark-conditioned volume renderer built on multiresolution feature
//!    grids with occupancy-pruned ray marching.
//!
//! Everything runs on CPU with hand-written backward passes; a fixed seed
//! reproduces any run bit for bit.

pub mod audio;
pub mod checkpoint;
pub mod config;
pub mod dataset;
pub mod error;
pub mod gradcheck;
pub mod infer;
pub mod kernels;
pub mod landmark;
pub mod lle;
pub mod math;
pub mod metrics;
pub mod motion;
pub mod optim;
pub mod param;
pub mod pitch;
pub mod render;
pub mod rng;
pub mod synth;
pub mod tensor;

pub use error::{Error, Result};
pub use param::ParamStore;
pub use rng::Rng;
pub use tensor::Tensor;
