//! Facial landmarks: 68 3-D keypoints per frame.
//!
//! Sequence file layout (little-endian): magic "MFLM", u32 frame count, then
//! frame-major 68x3 f32 coordinates. A JSON alternative exists for small
//! fixtures.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NUM_POINTS: usize = 68;
/// Flattened landmark width: 68 points x 3 coordinates.
pub const DIM: usize = NUM_POINTS * 3;

const MAGIC: &[u8; 4] = b"MFLM";

/// One frame of 68 3-D keypoints, stored flattened (x0,y0,z0,x1,...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landmark(pub Vec<f32>);

impl Landmark {
    pub fn zeros() -> Self {
        Landmark(vec![0.0; DIM])
    }

    pub fn from_flat(coords: Vec<f32>) -> Result<Self> {
        if coords.len() != DIM {
            return Err(Error::Shape(format!(
                "landmark needs {DIM} coordinates, got {}",
                coords.len()
            )));
        }
        for (i, &v) in coords.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("landmark coord {i} = {v}")));
            }
        }
        Ok(Landmark(coords))
    }

    pub fn point(&self, i: usize) -> [f32; 3] {
        [self.0[i * 3], self.0[i * 3 + 1], self.0[i * 3 + 2]]
    }

    pub fn set_point(&mut self, i: usize, p: [f32; 3]) {
        self.0[i * 3] = p[0];
        self.0[i * 3 + 1] = p[1];
        self.0[i * 3 + 2] = p[2];
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }
}

/// Uniformly spaced landmark frames.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSequence {
    pub frames: Vec<Landmark>,
    pub frame_rate: u32,
}

impl LandmarkSequence {
    pub fn new(frames: Vec<Landmark>, frame_rate: u32) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::Config("landmark sequence needs at least one frame".into()));
        }
        if frame_rate == 0 {
            return Err(Error::Config("frame_rate must be positive".into()));
        }
        Ok(LandmarkSequence { frames, frame_rate })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Frame-major [T, 204] view of the coordinates.
    pub fn flat(&self) -> Vec<f32> {
        let mut out = Vec::with_capacity(self.frames.len() * DIM);
        for f in &self.frames {
            out.extend_from_slice(&f.0);
        }
        out
    }

    pub fn from_flat(data: &[f32], frame_rate: u32) -> Result<Self> {
        if data.len() % DIM != 0 {
            return Err(Error::Shape(format!(
                "flat landmark buffer length {} is not a multiple of {DIM}",
                data.len()
            )));
        }
        let frames = data
            .chunks_exact(DIM)
            .map(|c| Landmark::from_flat(c.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        LandmarkSequence::new(frames, frame_rate)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&(self.frames.len() as u32).to_le_bytes())?;
        for frame in &self.frames {
            for &v in &frame.0 {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::load_with_rate(path, crate::pitch::DEFAULT_FRAME_RATE)
    }

    pub fn load_with_rate(path: &Path, frame_rate: u32) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!(
                "bad landmark magic {:?} in {}",
                magic,
                path.display()
            )));
        }
        let mut cnt = [0u8; 4];
        r.read_exact(&mut cnt)?;
        let count = u32::from_le_bytes(cnt) as usize;
        let mut frames = Vec::with_capacity(count);
        let mut buf = [0u8; 4];
        for _ in 0..count {
            let mut coords = Vec::with_capacity(DIM);
            for _ in 0..DIM {
                r.read_exact(&mut buf)?;
                coords.push(f32::from_le_bytes(buf));
            }
            frames.push(Landmark::from_flat(coords)?);
        }
        LandmarkSequence::new(frames, frame_rate)
    }

    /// JSON fixture form: an array of 204-float arrays.
    pub fn save_json(&self, path: &Path) -> Result<()> {
        let rows: Vec<&Vec<f32>> = self.frames.iter().map(|f| &f.0).collect();
        let file = File::create(path)?;
        serde_json::to_writer(BufWriter::new(file), &rows)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }

    pub fn load_json(path: &Path, frame_rate: u32) -> Result<Self> {
        let file = File::open(path)?;
        let rows: Vec<Vec<f32>> = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        let frames = rows
            .into_iter()
            .map(Landmark::from_flat)
            .collect::<Result<Vec<_>>>()?;
        LandmarkSequence::new(frames, frame_rate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(n: usize) -> LandmarkSequence {
        let frames = (0..n)
            .map(|t| {
                let mut coords = vec![0.0f32; DIM];
                for (i, c) in coords.iter_mut().enumerate() {
                    *c = (t * DIM + i) as f32 * 0.001;
                }
                Landmark(coords)
            })
            .collect();
        LandmarkSequence::new(frames, 25).unwrap()
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seq.mflm");
        let s = seq(7);
        s.save(&path).unwrap();
        let loaded = LandmarkSequence::load(&path).unwrap();
        assert_eq!(loaded, s);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seq.json");
        let s = seq(3);
        s.save_json(&path).unwrap();
        let loaded = LandmarkSequence::load_json(&path, 25).unwrap();
        assert_eq!(loaded, s);
    }

    #[test]
    fn wrong_length_rejected() {
        assert!(Landmark::from_flat(vec![0.0; 203]).is_err());
        assert!(Landmark::from_flat(vec![0.0; DIM]).is_ok());
    }

    #[test]
    fn empty_sequence_rejected() {
        assert!(LandmarkSequence::new(vec![], 25).is_err());
    }
}
