//! Audio input: WAV loading and per-frame log-mel features.
//!
//! The filterbank stands in for a pretrained speech encoder: any per-frame
//! feature matrix of width `n_mels` can be swapped in through
//! [`AudioFeatureSequence`](crate::motion::AudioFeatureSequence).

use std::path::Path;

use rustfft::num_complex::Complex32;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

pub const DEFAULT_SAMPLE_RATE: u32 = 16_000;
/// Feature channels of the default filterbank.
pub const DEFAULT_N_MELS: usize = 29;

/// Mono PCM clip in [-1, 1].
#[derive(Debug, Clone)]
pub struct AudioClip {
    pub samples: Vec<f32>,
    pub sample_rate: u32,
}

impl AudioClip {
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Config("sample_rate must be positive".into()));
        }
        for (i, &s) in samples.iter().enumerate() {
            if !s.is_finite() || !(-1.0..=1.0).contains(&s) {
                return Err(Error::Config(format!(
                    "sample {i} = {s} outside [-1, 1]"
                )));
            }
        }
        Ok(AudioClip {
            samples,
            sample_rate,
        })
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Number of analysis frames at `frame_rate` (ceil of duration x rate).
    pub fn num_frames(&self, frame_rate: u32) -> usize {
        let n = self.samples.len() as u64 * frame_rate as u64;
        n.div_ceil(self.sample_rate as u64) as usize
    }

    /// Load a PCM16 mono WAV file.
    pub fn load_wav(path: &Path) -> Result<Self> {
        let reader = hound::WavReader::open(path)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        let spec = reader.spec();
        if spec.channels != 1 {
            return Err(Error::Format(format!(
                "{}: expected mono, got {} channels",
                path.display(),
                spec.channels
            )));
        }
        if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
            return Err(Error::Format(format!(
                "{}: expected 16-bit PCM",
                path.display()
            )));
        }
        let samples: Vec<f32> = reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f32 / 32768.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        AudioClip::new(samples, spec.sample_rate)
    }

    /// Write the clip as PCM16 mono WAV.
    pub fn save_wav(&self, path: &Path) -> Result<()> {
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: self.sample_rate,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut writer = hound::WavWriter::create(path, spec)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        for &s in &self.samples {
            let v = (s * 32767.0).round().clamp(-32768.0, 32767.0) as i16;
            writer
                .write_sample(v)
                .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        }
        writer
            .finalize()
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        Ok(())
    }
}

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Per-frame log-mel filterbank features aligned to `frame_rate`.
///
/// Frame t covers samples centered at t / frame_rate; a Hann window of
/// `fft_size` samples is analyzed per frame. Returns a T x n_mels matrix.
pub fn log_mel_features(clip: &AudioClip, frame_rate: u32, n_mels: usize) -> Result<Vec<Vec<f32>>> {
    if clip.samples.is_empty() {
        return Err(Error::Config("empty audio".into()));
    }
    let sr = clip.sample_rate as f64;
    let fft_size = 1024;
    let n_frames = clip.num_frames(frame_rate);
    let hop = sr / frame_rate as f64;

    let mut planner = FftPlanner::<f32>::new();
    let fft = planner.plan_fft_forward(fft_size);

    // Triangular mel filters between 0 Hz and Nyquist.
    let n_bins = fft_size / 2 + 1;
    let mel_lo = hz_to_mel(0.0);
    let mel_hi = hz_to_mel(sr / 2.0);
    let centers: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (n_mels + 1) as f64))
        .collect();
    let bin_hz = sr / fft_size as f64;

    let hann: Vec<f32> = (0..fft_size)
        .map(|i| {
            let x = std::f64::consts::PI * i as f64 / (fft_size - 1) as f64;
            (x.sin() * x.sin()) as f32
        })
        .collect();

    let mut feats = Vec::with_capacity(n_frames);
    let mut buf = vec![Complex32::new(0.0, 0.0); fft_size];
    for t in 0..n_frames {
        let center = (t as f64 * hop) as isize + (hop / 2.0) as isize;
        let start = center - (fft_size / 2) as isize;
        for (i, b) in buf.iter_mut().enumerate() {
            let idx = start + i as isize;
            let s = if idx >= 0 && (idx as usize) < clip.samples.len() {
                clip.samples[idx as usize]
            } else {
                0.0
            };
            *b = Complex32::new(s * hann[i], 0.0);
        }
        fft.process(&mut buf);
        let power: Vec<f64> = buf[..n_bins]
            .iter()
            .map(|c| (c.norm_sqr() as f64) / fft_size as f64)
            .collect();

        let mut row = vec![0.0f32; n_mels];
        for (m, r) in row.iter_mut().enumerate() {
            let (lo, mid, hi) = (centers[m], centers[m + 1], centers[m + 2]);
            let mut acc = 0.0f64;
            let b0 = (lo / bin_hz).floor().max(0.0) as usize;
            let b1 = ((hi / bin_hz).ceil() as usize).min(n_bins - 1);
            for b in b0..=b1 {
                let f = b as f64 * bin_hz;
                let w = if f <= mid {
                    (f - lo) / (mid - lo).max(1e-9)
                } else {
                    (hi - f) / (hi - mid).max(1e-9)
                };
                if w > 0.0 {
                    acc += w * power[b];
                }
            }
            *r = (acc + 1e-10).ln() as f32;
        }
        feats.push(row);
    }
    Ok(feats)
}
