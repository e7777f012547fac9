//! Pitch: fundamental-frequency extraction, log-scale tokenization, and the
//! learned pitch encoder that turns token sequences into per-frame features.

mod encoder;
mod f0;

pub use encoder::{PitchEncodeCache, PitchEncoder, PitchEncoderConfig};
pub use f0::{extract_f0, F0Config};

use crate::error::{Error, Result};

/// Video-rate default shared by pitch, audio features, and landmarks.
pub const DEFAULT_FRAME_RATE: u32 = 25;
/// Token count; token 0 is reserved for unvoiced frames.
pub const DEFAULT_PITCH_BINS: usize = 300;
pub const DEFAULT_F_MIN: f32 = 80.0;
pub const DEFAULT_F_MAX: f32 = 600.0;

/// Per-frame fundamental frequency in Hz; 0 marks an unvoiced frame.
#[derive(Debug, Clone)]
pub struct PitchContour {
    pub f0: Vec<f32>,
    pub frame_rate: u32,
}

impl PitchContour {
    pub fn new(f0: Vec<f32>, frame_rate: u32) -> Result<Self> {
        if frame_rate == 0 {
            return Err(Error::Config("frame_rate must be positive".into()));
        }
        for (i, &v) in f0.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!("f0[{i}] = {v} must be finite and >= 0")));
            }
        }
        Ok(PitchContour { f0, frame_rate })
    }

    pub fn len(&self) -> usize {
        self.f0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f0.is_empty()
    }
}

/// Per-frame discrete pitch tokens in [0, bins).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PitchTokens {
    pub tokens: Vec<u32>,
    pub bins: usize,
}

impl PitchTokens {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Map a contour to log-spaced tokens.
///
/// Unvoiced frames get token 0. A voiced frequency f is clamped to
/// [f_min, f_max] and mapped to
/// `1 + floor((bins-2) * (ln f - ln f_min) / (ln f_max - ln f_min))`,
/// capped at bins-1.
pub fn log_discretize(
    contour: &PitchContour,
    bins: usize,
    f_min: f32,
    f_max: f32,
) -> Result<PitchTokens> {
    if bins < 2 {
        return Err(Error::Config(format!("need at least 2 bins, got {bins}")));
    }
    if !(f_min > 0.0 && f_max > f_min) {
        return Err(Error::Config(format!(
            "invalid pitch range [{f_min}, {f_max}]"
        )));
    }
    let ln_min = (f_min as f64).ln();
    let span = (f_max as f64).ln() - ln_min;
    let tokens = contour
        .f0
        .iter()
        .map(|&f| {
            if f <= 0.0 {
                0
            } else {
                let f = f.clamp(f_min, f_max) as f64;
                let pos = (f.ln() - ln_min) / span;
                let tok = 1 + ((bins - 2) as f64 * pos).floor() as u32;
                tok.min(bins as u32 - 1)
            }
        })
        .collect();
    Ok(PitchTokens { tokens, bins })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn contour(f0: &[f32]) -> PitchContour {
        PitchContour::new(f0.to_vec(), DEFAULT_FRAME_RATE).unwrap()
    }

    #[test]
    fn unvoiced_maps_to_token_zero() {
        let t = log_discretize(&contour(&[0.0]), 300, 80.0, 600.0).unwrap();
        assert_eq!(t.tokens, vec![0]);
    }

    #[test]
    fn boundary_frequencies_hit_first_and_last_voiced_tokens() {
        let t = log_discretize(&contour(&[80.0, 600.0]), 300, 80.0, 600.0).unwrap();
        assert_eq!(t.tokens[0], 1);
        assert_eq!(t.tokens[1], 299);
    }

    #[test]
    fn geometric_midpoint_lands_mid_scale() {
        // sqrt(80*600) ~ 219.09: pos = 0.5, token = 1 + floor(298*0.5) = 150
        let t = log_discretize(&contour(&[219.09]), 300, 80.0, 600.0).unwrap();
        assert_eq!(t.tokens[0], 150);
    }

    #[test]
    fn out_of_range_frequencies_are_clamped() {
        let t = log_discretize(&contour(&[10.0, 4000.0]), 300, 80.0, 600.0).unwrap();
        assert_eq!(t.tokens, vec![1, 299]);
    }

    #[test]
    fn invalid_range_is_a_config_error() {
        assert!(log_discretize(&contour(&[100.0]), 1, 80.0, 600.0).is_err());
        assert!(log_discretize(&contour(&[100.0]), 300, 0.0, 600.0).is_err());
        assert!(log_discretize(&contour(&[100.0]), 300, 600.0, 80.0).is_err());
    }

    #[test]
    fn tokenization_is_monotone_in_frequency() {
        let freqs: Vec<f32> = (0..200).map(|i| 80.0 + i as f32 * 2.5).collect();
        let t = log_discretize(&contour(&freqs), 300, 80.0, 600.0).unwrap();
        for w in t.tokens.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn octave_steps_are_log_uniform() {
        // One octave apart maps to a constant token distance (+-1 from flooring)
        // regardless of where the octave sits.
        let t = log_discretize(&contour(&[100.0, 200.0, 150.0, 300.0]), 300, 80.0, 600.0).unwrap();
        let d1 = t.tokens[1] as i64 - t.tokens[0] as i64;
        let d2 = t.tokens[3] as i64 - t.tokens[2] as i64;
        assert!((d1 - d2).abs() <= 1, "octave distances {d1} vs {d2}");
    }
}
