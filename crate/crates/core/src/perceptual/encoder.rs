use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::pyramid::{pyramid_build_filters, PyramidConfig, PyramidFilters};
use super::retina::{Retina, RetinaParams, RetinaTape};
use crate::error::{Error, Result};
use crate::seqio::{Dims, FrameSequence};

/// User-facing encoder settings; the pyramid depth is capped by what each frame size allows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerceptualConfig {
    pub retina: RetinaParams,
    pub scales: usize,
    pub orientations: usize,
}

impl Default for PerceptualConfig {
    fn default() -> Self {
        PerceptualConfig {
            retina: RetinaParams::default(),
            scales: 3,
            orientations: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BandShape {
    pub scale: usize,
    pub orientation: usize,
    pub height: usize,
    pub width: usize,
    pub offset: usize,
}

impl BandShape {
    pub fn len(&self) -> usize {
        self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Offsets of each `(scale, orientation)` block inside a flattened feature vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BandLayout {
    pub bands: Vec<BandShape>,
    pub dim: usize,
}

impl BandLayout {
    fn new(config: &PyramidConfig) -> Self {
        let mut bands = Vec::new();
        let mut offset = 0;
        for s in 0..config.scales {
            let (height, width) = config.scale_dims(s);
            for orientation in 0..config.orientations {
                bands.push(BandShape {
                    scale: s,
                    orientation,
                    height,
                    width,
                    offset,
                });
                offset += height * width;
            }
        }
        BandLayout { bands, dim: offset }
    }

    /// `D = Σ_s K · H_s · W_s`.
    pub fn analytic_dim(config: &PyramidConfig) -> usize {
        (0..config.scales)
            .map(|s| {
                let (h, w) = config.scale_dims(s);
                config.orientations * h * w
            })
            .sum()
    }
}

/// Flattened band energies of one frame, in `(scale, orientation, row, col)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct V1Feature {
    pub values: Vec<f64>,
    pub layout: Arc<BandLayout>,
}

impl V1Feature {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn band(&self, index: usize) -> &[f64] {
        let b = &self.layout.bands[index];
        &self.values[b.offset..b.offset + b.len()]
    }
}

/// Everything the backward pass needs from one frame's forward pass.
#[derive(Debug, Clone)]
pub struct EncoderTape {
    retina: RetinaTape,
    coefficients: Vec<Vec<Vec<Complex64>>>,
}

impl EncoderTape {
    pub fn retina(&self) -> &RetinaTape {
        &self.retina
    }

    pub fn coefficients(&self) -> &[Vec<Vec<Complex64>>] {
        &self.coefficients
    }

    pub fn verify_input(&self, frame: &[f64]) -> Result<()> {
        self.retina.verify_input(frame)
    }
}

/// `|z|²` per coefficient, flattened.
pub fn v1_energy(bands: &[Vec<Vec<Complex64>>]) -> Vec<f64> {
    bands
        .iter()
        .flatten()
        .flat_map(|b| b.iter().map(|z| z.re * z.re + z.im * z.im))
        .collect()
}

/// Perceptual encoder bound to one single-channel frame size.
#[derive(Debug, Clone)]
pub struct PerceptualEncoder {
    config: PerceptualConfig,
    height: usize,
    width: usize,
    retina: Retina,
    filters: PyramidFilters,
    layout: Arc<BandLayout>,
}

impl PerceptualEncoder {
    /// Builds an encoder for `height×width` frames using an explicit pyramid shape.
    pub fn with_pyramid(retina: RetinaParams, pyramid: PyramidConfig) -> Result<Self> {
        let filters = pyramid_build_filters(pyramid)?;
        let layout = Arc::new(BandLayout::new(&pyramid));
        Ok(PerceptualEncoder {
            config: PerceptualConfig {
                retina,
                scales: pyramid.scales,
                orientations: pyramid.orientations,
            },
            height: pyramid.height,
            width: pyramid.width,
            retina: Retina::new(retina, pyramid.height, pyramid.width)?,
            filters,
            layout,
        })
    }

    /// Builds an encoder, reducing the number of scales until the frame size supports it.
    pub fn new(config: &PerceptualConfig, height: usize, width: usize) -> Result<Self> {
        let pyramid = PyramidConfig::fitted(config.scales, config.orientations, height, width)?;
        Self::with_pyramid(config.retina, pyramid)
    }

    pub fn config(&self) -> &PerceptualConfig {
        &self.config
    }

    pub fn pyramid_config(&self) -> &PyramidConfig {
        self.filters.config()
    }

    pub fn filters(&self) -> &PyramidFilters {
        &self.filters
    }

    pub fn retina(&self) -> &Retina {
        &self.retina
    }

    pub fn layout(&self) -> &Arc<BandLayout> {
        &self.layout
    }

    pub fn frame_size(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn feature_dim(&self) -> usize {
        self.layout.dim
    }

    pub fn encode_frame(&self, frame: &[f64]) -> Result<(V1Feature, EncoderTape)> {
        let (retina_out, retina_tape) = self.retina.forward(frame)?;
        let coefficients = self.filters.forward_bands(&retina_out)?;
        let values = v1_energy(&coefficients);
        debug_assert_eq!(values.len(), self.layout.dim);
        Ok((
            V1Feature {
                values,
                layout: self.layout.clone(),
            },
            EncoderTape {
                retina: retina_tape,
                coefficients,
            },
        ))
    }

    fn check_sequence(&self, seq: &FrameSequence, min_frames: usize) -> Result<()> {
        let d = seq.dims();
        if d.channels != 1 {
            return Err(Error::validation(format!(
                "perceptual encoder takes single-channel frames, got {} channels",
                d.channels
            )));
        }
        if (d.height, d.width) != (self.height, self.width) {
            return Err(Error::validation(format!(
                "encoder built for {}x{}, sequence is {}x{}",
                self.height, self.width, d.height, d.width
            )));
        }
        if d.frames < min_frames {
            return Err(Error::validation(format!(
                "need at least {min_frames} frames, got {}",
                d.frames
            )));
        }
        Ok(())
    }

    /// Encodes every frame (in parallel; results are ordered by frame).
    pub fn encode_sequence(&self, seq: &FrameSequence) -> Result<(Vec<V1Feature>, Vec<EncoderTape>)> {
        self.check_sequence(seq, 3)?;
        let per_frame: Vec<Result<(V1Feature, EncoderTape)>> = seq
            .frames()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|f| self.encode_frame(f))
            .collect();
        let mut feats = Vec::with_capacity(per_frame.len());
        let mut tapes = Vec::with_capacity(per_frame.len());
        for r in per_frame {
            let (f, t) = r?;
            feats.push(f);
            tapes.push(t);
        }
        Ok((feats, tapes))
    }

    /// Retina outputs of every frame, flattened per frame.
    pub fn retina_sequence(&self, seq: &FrameSequence) -> Result<Vec<Vec<f64>>> {
        self.check_sequence(seq, 1)?;
        seq.frames().map(|f| self.retina.forward(f).map(|r| r.0)).collect()
    }

    /// `Jᵀ · cotangent` for one frame.
    pub fn frame_vjp(&self, tape: &EncoderTape, cotangent: &[f64]) -> Result<Vec<f64>> {
        if cotangent.len() != self.layout.dim {
            return Err(Error::validation(format!(
                "feature cotangent has {} entries, expected {}",
                cotangent.len(),
                self.layout.dim
            )));
        }
        let mut offset = 0;
        let mut w = Vec::with_capacity(tape.coefficients.len());
        for level in &tape.coefficients {
            let mut lw = Vec::with_capacity(level.len());
            for band in level {
                let g = &cotangent[offset..offset + band.len()];
                lw.push(band.iter().zip(g).map(|(z, g)| z * (2.0 * g)).collect());
                offset += band.len();
            }
            w.push(lw);
        }
        let g_retina = self.filters.bands_adjoint(&w)?;
        self.retina.vjp(&tape.retina, &g_retina)
    }

    /// Per-frame VJPs stacked into a sequence-shaped gradient.
    pub fn encode_vjp(&self, tapes: &[EncoderTape], cotangents: &[Vec<f64>]) -> Result<FrameSequence> {
        if tapes.len() != cotangents.len() || tapes.is_empty() {
            return Err(Error::validation(format!(
                "{} tapes but {} cotangents",
                tapes.len(),
                cotangents.len()
            )));
        }
        let grads: Vec<Result<Vec<f64>>> = tapes
            .par_iter()
            .zip(cotangents.par_iter())
            .map(|(t, c)| {
                if c.iter().all(|&v| v == 0.0) {
                    Ok(vec![0.0; self.height * self.width])
                } else {
                    self.frame_vjp(t, c)
                }
            })
            .collect();
        let mut data = Vec::with_capacity(tapes.len() * self.height * self.width);
        for g in grads {
            data.extend(g?);
        }
        FrameSequence::new(Dims::new(tapes.len(), self.height, self.width, 1), data)
    }
}
