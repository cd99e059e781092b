use crate::error::Result;
use crate::perceptual::PerceptualEncoder;
use crate::seqio::{FrameSequence, LUMA_WEIGHTS};

use super::{mean_curvature_with_grad, CurvatureTolerances};

/// The straightening penalty: the mean V1-domain curvature (radians) of a sequence.
///
/// Colour input is reduced to luma before encoding, and the gradient is spread back over
/// the channels with the luma weights.
#[derive(Debug, Clone)]
pub struct StraighteningLoss {
    encoder: PerceptualEncoder,
    tolerances: CurvatureTolerances,
}

impl StraighteningLoss {
    pub fn new(encoder: PerceptualEncoder, tolerances: CurvatureTolerances) -> Self {
        StraighteningLoss { encoder, tolerances }
    }

    pub fn encoder(&self) -> &PerceptualEncoder {
        &self.encoder
    }

    pub fn tolerances(&self) -> &CurvatureTolerances {
        &self.tolerances
    }

    fn features(&self, frames: &FrameSequence) -> Result<(Vec<Vec<f64>>, Vec<crate::perceptual::EncoderTape>)> {
        let gray = frames.luma()?;
        let (feats, tapes) = self.encoder.encode_sequence(&gray)?;
        Ok((feats.into_iter().map(|f| f.values).collect(), tapes))
    }

    /// `ReLU(mean curvature)`; 0 when every interior frame is degenerate.
    pub fn loss(&self, frames: &FrameSequence) -> Result<f64> {
        let (points, _) = self.features(frames)?;
        let (loss, _) = mean_curvature_with_grad(&points, &self.tolerances);
        Ok(loss.max(0.0))
    }

    /// Loss together with its gradient, shaped like `frames`.
    pub fn loss_and_grad(&self, frames: &FrameSequence) -> Result<(f64, FrameSequence)> {
        let (points, tapes) = self.features(frames)?;
        let (loss, cot) = mean_curvature_with_grad(&points, &self.tolerances);
        if loss <= 0.0 {
            return Ok((0.0, FrameSequence::zeros(frames.dims())?));
        }
        let g = self.encoder.encode_vjp(&tapes, &cot)?;
        if frames.dims().channels == 1 {
            return Ok((loss, g));
        }
        let data = g
            .data()
            .iter()
            .flat_map(|&v| LUMA_WEIGHTS.map(|w| w * v))
            .collect();
        Ok((loss, FrameSequence::new(frames.dims(), data)?))
    }

    pub fn grad(&self, frames: &FrameSequence) -> Result<FrameSequence> {
        self.loss_and_grad(frames).map(|r| r.1)
    }
}
