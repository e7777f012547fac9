//! Learned pitch encoder: embedding lookup followed by a shallow conv stack.

use crate::error::Result;
use crate::kernels::{BatchNorm1dLayer, BnCache, Conv1dLayer, EmbeddingLayer};
use crate::kernels::activations;
use crate::param::ParamStore;
use crate::pitch::PitchTokens;
use crate::rng::Rng;
use crate::tensor::Tensor;

/// Dimensions of the encoder; defaults follow the published configuration
/// (300 bins, 64-wide embedding, two kernel-3 conv layers at 64 channels).
#[derive(Debug, Clone, Copy)]
pub struct PitchEncoderConfig {
    pub bins: usize,
    pub embed_dim: usize,
    pub channels: usize,
    pub kernel: usize,
}

impl Default for PitchEncoderConfig {
    fn default() -> Self {
        PitchEncoderConfig {
            bins: crate::pitch::DEFAULT_PITCH_BINS,
            embed_dim: 64,
            channels: 64,
            kernel: 3,
        }
    }
}

/// Token sequence -> [T, channels] feature sequence.
///
/// Structure: embedding, conv1d + batchnorm + GeLU, conv1d.
#[derive(Debug, Clone)]
pub struct PitchEncoder {
    pub cfg: PitchEncoderConfig,
    embed: EmbeddingLayer,
    conv1: Conv1dLayer,
    bn: BatchNorm1dLayer,
    conv2: Conv1dLayer,
}

/// Intermediates saved by the train forward for the backward pass.
pub struct PitchEncodeCache {
    tokens: Vec<u32>,
    emb_ct: Tensor,
    bn_cache: BnCache,
    bn_out: Tensor,
}

impl PitchEncoder {
    pub fn new(prefix: &str, cfg: PitchEncoderConfig) -> Self {
        PitchEncoder {
            cfg,
            embed: EmbeddingLayer::new(&format!("{prefix}.embed"), cfg.bins, cfg.embed_dim),
            conv1: Conv1dLayer::new(&format!("{prefix}.conv1"), cfg.embed_dim, cfg.channels, cfg.kernel),
            bn: BatchNorm1dLayer::new(&format!("{prefix}.bn"), cfg.channels),
            conv2: Conv1dLayer::new(&format!("{prefix}.conv2"), cfg.channels, cfg.channels, cfg.kernel),
        }
    }

    pub fn out_dim(&self) -> usize {
        self.cfg.channels
    }

    pub fn init(&self, store: &mut ParamStore, rng: &mut Rng) -> Result<()> {
        self.embed.init(store, rng)?;
        self.conv1.init(store, rng)?;
        self.bn.init(store)?;
        self.conv2.init(store, rng)
    }

    fn embed_ct(&self, store: &ParamStore, tokens: &[u32]) -> Result<Tensor> {
        // [T,E] -> [1,E,T] for the conv stack
        let emb = self.embed.forward(store, tokens)?;
        let t = tokens.len();
        emb.transpose_2d()?.reshape(&[1, self.cfg.embed_dim, t])
    }

    /// Inference forward using running batchnorm statistics.
    pub fn forward(&self, store: &ParamStore, tokens: &PitchTokens) -> Result<Tensor> {
        let t = tokens.len();
        let emb_ct = self.embed_ct(store, &tokens.tokens)?;
        let c1 = self.conv1.forward(store, &emb_ct)?;
        let bn = self.bn.forward_eval(store, &c1)?;
        let act = activations::gelu(&bn);
        let c2 = self.conv2.forward(store, &act)?;
        c2.reshape(&[self.cfg.channels, t])?.transpose_2d()
    }

    /// Train forward with batch statistics; returns [T, channels] and a cache.
    pub fn forward_train(
        &self,
        store: &mut ParamStore,
        tokens: &PitchTokens,
    ) -> Result<(Tensor, PitchEncodeCache)> {
        let t = tokens.len();
        let emb_ct = self.embed_ct(store, &tokens.tokens)?;
        let c1 = self.conv1.forward(store, &emb_ct)?;
        let (bn_out, bn_cache) = self.bn.forward_train(store, &c1)?;
        let act = activations::gelu(&bn_out);
        let c2 = self.conv2.forward(store, &act)?;
        let out = c2.reshape(&[self.cfg.channels, t])?.transpose_2d()?;
        Ok((
            out,
            PitchEncodeCache {
                tokens: tokens.tokens.clone(),
                emb_ct,
                bn_cache,
                bn_out,
            },
        ))
    }

    /// Accumulate gradients for an upstream [T, channels] signal.
    pub fn backward(
        &self,
        store: &mut ParamStore,
        cache: &PitchEncodeCache,
        upstream: &Tensor,
    ) -> Result<()> {
        let t = cache.tokens.len();
        let up_ct = upstream.transpose_2d()?.reshape(&[1, self.cfg.channels, t])?;
        let act = activations::gelu(&cache.bn_out);
        let d_act = self.conv2.backward(store, &act, &up_ct)?;
        let d_bn_out = activations::gelu_backward(&cache.bn_out, &d_act);
        let d_c1 = self.bn.backward(store, &cache.bn_cache, &d_bn_out)?;
        let d_emb_ct = self.conv1.backward(store, &cache.emb_ct, &d_c1)?;
        let d_emb = d_emb_ct.reshape(&[self.cfg.embed_dim, t])?.transpose_2d()?;
        self.embed.backward(store, &cache.tokens, &d_emb)
    }
}
