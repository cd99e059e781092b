//! Frame sequences and their on-disk forms.

mod png_dir;
mod synthetic;
mod vseq;

pub use png_dir::{export_png_dir, import_png_dir};
pub use synthetic::{blob_centers, make_synthetic, SyntheticKind, SyntheticSpec};
pub use vseq::{read_vseq, vseq_bytes, write_vseq, HEADER_LEN, VSEQ_MAGIC, VSEQ_VERSION};

use crate::error::{Error, Result};

/// Rec.601 luma weights for R, G, B.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Shape of a frame sequence: frames, height, width, channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Dims {
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    pub channels: usize,
}

impl Dims {
    pub fn new(frames: usize, height: usize, width: usize, channels: usize) -> Self {
        Dims {
            frames,
            height,
            width,
            channels,
        }
    }

    pub fn len(&self) -> usize {
        self.frames * self.frame_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of scalars in one frame (`H·W·C`).
    pub fn frame_len(&self) -> usize {
        self.height * self.width * self.channels
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 || self.height == 0 || self.width == 0 {
            return Err(Error::validation(format!(
                "dimensions must be positive, got {self}"
            )));
        }
        if self.channels != 1 && self.channels != 3 {
            return Err(Error::validation(format!(
                "channels must be 1 or 3, got {}",
                self.channels
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}x{}x{}x{}",
            self.frames, self.height, self.width, self.channels
        )
    }
}

/// A `T×H×W×C` video stored row-major in `(t, h, w, c)` order.
///
/// Values are held as `f64` in memory; the VSEQ container stores binary32.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    dims: Dims,
    data: Vec<f64>,
}

impl FrameSequence {
    pub fn new(dims: Dims, data: Vec<f64>) -> Result<Self> {
        dims.validate()?;
        if data.len() != dims.len() {
            return Err(Error::validation(format!(
                "data length {} does not match {} ({} scalars)",
                data.len(),
                dims,
                dims.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!(
                "non-finite value {} at index {pos}",
                data[pos]
            )));
        }
        Ok(FrameSequence { dims, data })
    }

    pub fn zeros(dims: Dims) -> Result<Self> {
        Self::filled(dims, 0.0)
    }

    pub fn filled(dims: Dims, value: f64) -> Result<Self> {
        Self::new(dims, vec![value; dims.len()])
    }

    /// Builds a sequence by stacking equally-sized frames.
    pub fn from_frames(height: usize, width: usize, channels: usize, frames: &[Vec<f64>]) -> Result<Self> {
        let dims = Dims::new(frames.len(), height, width, channels);
        let mut data = Vec::with_capacity(dims.len());
        for (t, f) in frames.iter().enumerate() {
            if f.len() != dims.frame_len() {
                return Err(Error::validation(format!(
                    "frame {t} has {} scalars, expected {}",
                    f.len(),
                    dims.frame_len()
                )));
            }
            data.extend_from_slice(f);
        }
        Self::new(dims, data)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Replaces the payload, re-checking the invariants.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self> {
        Self::new(self.dims, data)
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        let n = self.dims.frame_len();
        &self.data[t * n..(t + 1) * n]
    }

    pub fn frames(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dims.frame_len())
    }

    /// Value at `(t, h, w, c)`.
    pub fn get(&self, t: usize, h: usize, w: usize, c: usize) -> f64 {
        let d = self.dims;
        self.data[((t * d.height + h) * d.width + w) * d.channels + c]
    }

    /// Extracts one channel of one frame as an `H×W` plane.
    pub fn plane(&self, t: usize, c: usize) -> Vec<f64> {
        let d = self.dims;
        self.frame(t)
            .iter()
            .skip(c)
            .step_by(d.channels)
            .copied()
            .collect()
    }

    /// Rec.601 luma of a three-channel sequence.
    pub fn to_grayscale(&self) -> Result<FrameSequence> {
        if self.dims.channels != 3 {
            return Err(Error::validation(format!(
                "grayscale conversion needs 3 channels, got {}",
                self.dims.channels
            )));
        }
        let data = self
            .data
            .chunks_exact(3)
            .map(|px| LUMA_WEIGHTS[0] * px[0] + LUMA_WEIGHTS[1] * px[1] + LUMA_WEIGHTS[2] * px[2])
            .collect();
        FrameSequence::new(Dims { channels: 1, ..self.dims }, data)
    }

    /// Single-channel view used by the perceptual encoder: luma for RGB, a copy otherwise.
    pub fn luma(&self) -> Result<FrameSequence> {
        match self.dims.channels {
            1 => Ok(self.clone()),
            _ => self.to_grayscale(),
        }
    }

    /// Largest absolute elementwise difference.
    pub fn max_abs_diff(&self, other: &FrameSequence) -> Result<f64> {
        self.check_same_dims(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn check_same_dims(&self, other: &FrameSequence) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::validation(format!(
                "dimension mismatch: {} vs {}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }
}

/// Inner product of two equally long slices.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariants_are_enforced() {
        assert!(FrameSequence::new(Dims::new(1, 2, 2, 1), vec![0.0; 3]).is_err());
        assert!(FrameSequence::new(Dims::new(1, 2, 2, 2), vec![0.0; 8]).is_err());
        assert!(FrameSequence::new(Dims::new(0, 2, 2, 1), vec![]).is_err());
        assert!(FrameSequence::new(Dims::new(1, 1, 1, 1), vec![f64::NAN]).is_err());
        assert!(FrameSequence::new(Dims::new(1, 1, 1, 1), vec![0.5]).is_ok());
    }

    #[test]
    fn grayscale_weights() {
        let seq = FrameSequence::new(Dims::new(1, 1, 2, 3), vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0]).unwrap();
        let g = seq.to_grayscale().unwrap();
        assert!((g.data()[0] - 1.0).abs() < 1e-15);
        assert_eq!(g.data()[1], 0.299);
        let mono = FrameSequence::zeros(Dims::new(1, 2, 2, 1)).unwrap();
        assert!(matches!(mono.to_grayscale(), Err(Error::Validation(_))));
    }

    #[test]
    fn grayscale_matches_weighted_sum_and_stays_in_channel_range() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let dims = Dims::new(2, 5, 7, 3);
        let data: Vec<f64> = (0..dims.len()).map(|_| rng.random::<f64>()).collect();
        let seq = FrameSequence::new(dims, data.clone()).unwrap();
        let g = seq.to_grayscale().unwrap();
        for (i, px) in data.chunks_exact(3).enumerate() {
            let oracle = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
            assert_eq!(g.data()[i], oracle);
            let lo = px.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = px.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(g.data()[i] >= lo - 1e-15 && g.data()[i] <= hi + 1e-15);
        }
    }

    #[test]
    fn plane_extraction() {
        let seq = FrameSequence::new(
            Dims::new(1, 1, 2, 3),
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        )
        .unwrap();
        assert_eq!(seq.plane(0, 1), vec![2.0, 5.0]);
        assert_eq!(seq.get(0, 0, 1, 2), 6.0);
    }
}
