//! Fundamental-frequency estimation by normalized autocorrelation.

use crate::audio::AudioClip;
use crate::error::{Error, Result};
use crate::pitch::PitchContour;

/// Extraction parameters. The search range doubles as the clamp range for
/// reported frequencies.
#[derive(Debug, Clone, Copy)]
pub struct F0Config {
    pub f_min: f32,
    pub f_max: f32,
    /// A frame is voiced when its best normalized autocorrelation peak
    /// reaches this value.
    pub voicing_threshold: f32,
}

impl Default for F0Config {
    fn default() -> Self {
        F0Config {
            f_min: crate::pitch::DEFAULT_F_MIN,
            f_max: crate::pitch::DEFAULT_F_MAX,
            voicing_threshold: 0.3,
        }
    }
}

// Small preference for shorter lags so a pure tone's one-period peak wins
// over its two-period alias.
const OCTAVE_COST: f64 = 0.01;
const ENERGY_FLOOR: f64 = 1e-8;

/// Estimate one f0 value per output frame.
///
/// Each frame is analyzed with a mean-removed window centered on the frame;
/// the best normalized autocorrelation peak in the lag range [sr/f_max,
/// sr/f_min] is refined by parabolic interpolation. Frames whose peak falls
/// below the voicing threshold (or that are digitally silent) report 0.
pub fn extract_f0(clip: &AudioClip, frame_rate: u32, cfg: &F0Config) -> Result<PitchContour> {
    if clip.samples.is_empty() {
        return Err(Error::Config("empty audio".into()));
    }
    if (clip.sample_rate as f32) < 2.0 * cfg.f_max {
        return Err(Error::Config(format!(
            "sample_rate {} below Nyquist for f_max {}",
            clip.sample_rate, cfg.f_max
        )));
    }
    if !(cfg.f_min > 0.0 && cfg.f_max > cfg.f_min) {
        return Err(Error::Config(format!(
            "invalid pitch range [{}, {}]",
            cfg.f_min, cfg.f_max
        )));
    }
    let n_frames = clip.num_frames(frame_rate);
    if n_frames < 2 {
        return Err(Error::Config(format!(
            "clip too short: {n_frames} frame(s), need at least 2"
        )));
    }

    let sr = clip.sample_rate as f64;
    let lag_min = (sr / cfg.f_max as f64).floor().max(2.0) as usize;
    let lag_max = (sr / cfg.f_min as f64).ceil() as usize;
    let window = 2 * lag_max;
    let span = window + lag_max;

    let sample_at = |idx: isize| -> f64 {
        if idx >= 0 && (idx as usize) < clip.samples.len() {
            clip.samples[idx as usize] as f64
        } else {
            0.0
        }
    };

    let mut f0 = Vec::with_capacity(n_frames);
    let mut frame = vec![0.0f64; span];
    for t in 0..n_frames {
        let center = ((t as f64 + 0.5) / frame_rate as f64 * sr) as isize;
        let start = center - (span / 2) as isize;
        for (i, v) in frame.iter_mut().enumerate() {
            *v = sample_at(start + i as isize);
        }
        let mean = frame.iter().sum::<f64>() / span as f64;
        frame.iter_mut().for_each(|v| *v -= mean);

        f0.push(frame_f0(&frame, window, lag_min, lag_max, sr, cfg) as f32);
    }
    PitchContour::new(f0, frame_rate)
}

/// Returns the voiced frequency for this frame or 0.0.
fn frame_f0(
    frame: &[f64],
    window: usize,
    lag_min: usize,
    lag_max: usize,
    sr: f64,
    cfg: &F0Config,
) -> f64 {
    let e0: f64 = frame[..window].iter().map(|v| v * v).sum();
    if e0 < ENERGY_FLOOR {
        return 0.0;
    }

    // Normalized autocorrelation over the lag range.
    let mut r = vec![0.0f64; lag_max + 2];
    for lag in lag_min..=lag_max {
        let mut num = 0.0f64;
        let mut e1 = 0.0f64;
        for i in 0..window {
            num += frame[i] * frame[i + lag];
            e1 += frame[i + lag] * frame[i + lag];
        }
        r[lag] = if e1 < ENERGY_FLOOR {
            0.0
        } else {
            num / (e0 * e1).sqrt()
        };
    }

    // Best local maximum with a mild short-lag preference.
    let mut best: Option<(usize, f64)> = None;
    for lag in lag_min..=lag_max {
        let left = if lag > lag_min { r[lag - 1] } else { f64::MIN };
        let right = if lag < lag_max { r[lag + 1] } else { f64::MIN };
        if r[lag] < left || r[lag] < right {
            continue;
        }
        let score = r[lag] - OCTAVE_COST * (lag as f64 / lag_min as f64).log2();
        if best.map_or(true, |(_, s)| score > s) {
            best = Some((lag, score));
        }
    }
    let Some((lag, _)) = best else { return 0.0 };
    if r[lag] < cfg.voicing_threshold as f64 {
        return 0.0;
    }

    // Parabolic refinement around the integer peak.
    let mut refined = lag as f64;
    if lag > lag_min && lag < lag_max {
        let (a, b, c) = (r[lag - 1], r[lag], r[lag + 1]);
        let denom = a - 2.0 * b + c;
        if denom.abs() > 1e-12 {
            let delta = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
            refined += delta;
        }
    }
    (sr / refined).clamp(cfg.f_min as f64, cfg.f_max as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(freq: f64, secs: f64, sr: u32, amp: f64) -> AudioClip {
        let n = (secs * sr as f64) as usize;
        let samples: Vec<f32> = (0..n)
            .map(|i| (amp * (2.0 * std::f64::consts::PI * freq * i as f64 / sr as f64).sin()) as f32)
            .collect();
        AudioClip::new(samples, sr).unwrap()
    }

    #[test]
    fn pure_220hz_tone_tracks_within_2hz() {
        let clip = tone(220.0, 1.0, 16_000, 0.5);
        let contour = extract_f0(&clip, 25, &F0Config::default()).unwrap();
        assert_eq!(contour.len(), 25);
        for (i, &f) in contour.f0.iter().enumerate() {
            assert!(f > 0.0, "frame {i} unvoiced");
            assert!((f - 220.0).abs() < 2.0, "frame {i}: {f} Hz");
        }
    }

    #[test]
    fn pure_440hz_tone_tracks_within_4hz() {
        let clip = tone(440.0, 1.0, 16_000, 0.5);
        let contour = extract_f0(&clip, 25, &F0Config::default()).unwrap();
        for &f in &contour.f0 {
            assert!((f - 440.0).abs() < 4.0, "{f} Hz");
        }
    }

    #[test]
    fn digital_silence_is_unvoiced() {
        let clip = AudioClip::new(vec![0.0; 16_000], 16_000).unwrap();
        let contour = extract_f0(&clip, 25, &F0Config::default()).unwrap();
        assert!(contour.f0.iter().all(|&f| f == 0.0));
    }

    #[test]
    fn empty_audio_is_an_error() {
        let clip = AudioClip::new(vec![], 16_000).unwrap();
        assert!(extract_f0(&clip, 25, &F0Config::default()).is_err());
    }

    #[test]
    fn low_sample_rate_is_an_error() {
        let clip = AudioClip::new(vec![0.0; 1000], 1_000).unwrap();
        assert!(extract_f0(&clip, 25, &F0Config::default()).is_err());
    }

    #[test]
    fn single_frame_clip_is_an_error() {
        let clip = AudioClip::new(vec![0.1; 320], 16_000).unwrap();
        assert!(extract_f0(&clip, 25, &F0Config::default()).is_err());
    }
}
