//! Deterministic synthetic test videos.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Dims, FrameSequence};
use crate::error::{Error, Result};
use crate::filter::CircularGaussian;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    /// A band-limited random texture circularly shifted by `⌊speed·t⌋` columns per frame.
    TranslatingTexture,
    /// An isotropic Gaussian bump whose center moves linearly along the width axis.
    MovingBlob,
    /// The texture of frame 0 repeated for every frame.
    Static,
}

impl std::str::FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "translating_texture" => Ok(SyntheticKind::TranslatingTexture),
            "moving_blob" => Ok(SyntheticKind::MovingBlob),
            "static" => Ok(SyntheticKind::Static),
            other => Err(Error::validation(format!("unknown synthetic kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    /// Pixels per frame.
    pub speed: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(kind: SyntheticKind, frames: usize, height: usize, width: usize, speed: f64, seed: u64) -> Self {
        SyntheticSpec {
            kind,
            frames,
            height,
            width,
            channels: 1,
            speed,
            seed,
        }
    }

    pub fn with_channels(mut self, channels: usize) -> Self {
        self.channels = channels;
        self
    }
}

/// Texture smoothing scale; keeps the spectrum well inside Nyquist.
const TEXTURE_SIGMA: f64 = 1.5;

pub fn make_synthetic(spec: &SyntheticSpec) -> Result<FrameSequence> {
    let dims = Dims::new(spec.frames, spec.height, spec.width, spec.channels);
    dims.validate()?;
    if !spec.speed.is_finite() {
        return Err(Error::validation("speed must be finite"));
    }
    let (h, w) = (spec.height, spec.width);
    let planes: Vec<Vec<f64>> = match spec.kind {
        SyntheticKind::TranslatingTexture | SyntheticKind::Static => {
            let base = texture(h, w, spec.seed);
            (0..spec.frames)
                .map(|t| {
                    let shift = match spec.kind {
                        SyntheticKind::Static => 0,
                        _ => (spec.speed * t as f64).floor() as i64,
                    };
                    shift_columns(&base, h, w, shift)
                })
                .collect()
        }
        SyntheticKind::MovingBlob => {
            let sigma = h.min(w) as f64 / 8.0;
            blob_centers(spec)
                .into_iter()
                .map(|(ci, cj)| {
                    let mut p = vec![0.0; h * w];
                    for i in 0..h {
                        for j in 0..w {
                            let d2 = (i as f64 - ci).powi(2) + (j as f64 - cj).powi(2);
                            p[i * w + j] = 0.1 + 0.8 * (-d2 / (2.0 * sigma * sigma)).exp();
                        }
                    }
                    p
                })
                .collect()
        }
    };
    // Color variants scale the luminance plane by fixed per-channel gains.
    let gains: &[f64] = if spec.channels == 3 { &[1.0, 0.85, 0.7] } else { &[1.0] };
    let mut data = Vec::with_capacity(dims.len());
    for p in &planes {
        for &v in p {
            data.extend(gains.iter().map(|g| g * v));
        }
    }
    FrameSequence::new(dims, data)
}

/// Blob centers `(row, col)` per frame; the column advances by `speed` each frame.
pub fn blob_centers(spec: &SyntheticSpec) -> Vec<(f64, f64)> {
    let row = (spec.height as f64 - 1.0) / 2.0;
    let col0 = spec.width as f64 / 4.0;
    (0..spec.frames)
        .map(|t| (row, col0 + spec.speed * t as f64))
        .collect()
}

/// White noise smoothed by a circular Gaussian and rescaled to `[0.05, 0.95]`.
fn texture(h: usize, w: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..h * w).map(|_| StandardNormal.sample(&mut rng)).collect();
    let smooth = CircularGaussian::new(TEXTURE_SIGMA).apply_plane(&noise, h, w);
    let lo = smooth.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = smooth.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    smooth.iter().map(|v| 0.05 + 0.9 * (v - lo) / span).collect()
}

/// `out[i][j] = x[i][(j - shift) mod w]`.
fn shift_columns(x: &[f64], h: usize, w: usize, shift: i64) -> Vec<f64> {
    let mut out = vec![0.0; h * w];
    for i in 0..h {
        for j in 0..w {
            let src = (j as i64 - shift).rem_euclid(w as i64) as usize;
            out[i * w + j] = x[i * w + src];
        }
    }
    out
}
