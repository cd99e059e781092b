use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seqio::FrameSequence;

use super::{CurvatureTolerances, StraighteningLoss};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsgConfig {
    pub iterations: usize,
    pub step_size: f64,
    pub decay: f64,
    pub decay_period: usize,
    pub eps_clamp: f64,
    pub eps_disp: f64,
}

impl Default for PsgConfig {
    fn default() -> Self {
        let tol = CurvatureTolerances::default();
        PsgConfig {
            iterations: 10,
            step_size: 0.5,
            decay: 0.8,
            decay_period: 2,
            eps_clamp: tol.eps_clamp,
            eps_disp: tol.eps_disp,
        }
    }
}

impl PsgConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size >= 0.0 && self.step_size.is_finite()) {
            return Err(Error::validation(format!("psg step size must be >= 0, got {}", self.step_size)));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(Error::validation(format!("psg decay must lie in (0, 1], got {}", self.decay)));
        }
        if self.decay_period == 0 {
            return Err(Error::validation("psg decay period must be positive"));
        }
        if !(self.eps_clamp >= 0.0 && self.eps_clamp < 1.0) || !(self.eps_disp >= 0.0) {
            return Err(Error::validation("psg tolerances out of range"));
        }
        Ok(())
    }

    pub fn tolerances(&self) -> CurvatureTolerances {
        CurvatureTolerances {
            eps_clamp: self.eps_clamp,
            eps_disp: self.eps_disp,
        }
    }

    /// Step size in force for each of the `iterations` updates.
    pub fn step_sizes(&self) -> Vec<f64> {
        let mut lambda = self.step_size;
        let mut out = Vec::with_capacity(self.iterations);
        for i in 1..=self.iterations {
            out.push(lambda);
            if i % self.decay_period == 0 {
                lambda *= self.decay;
            }
        }
        out
    }

    /// Step size after `i` completed iterations.
    pub fn step_size_after(&self, i: usize) -> f64 {
        self.step_size * self.decay.powi((i / self.decay_period) as i32)
    }
}

/// Gradient descent on the straightening penalty with a stepwise-decayed step size.
pub fn psg_refine(frames: &FrameSequence, cfg: &PsgConfig, loss: &StraighteningLoss) -> Result<FrameSequence> {
    psg_refine_traced(frames, cfg, loss).map(|r| r.0)
}

/// As [`psg_refine`], also returning the loss before each update.
pub fn psg_refine_traced(
    frames: &FrameSequence,
    cfg: &PsgConfig,
    loss: &StraighteningLoss,
) -> Result<(FrameSequence, Vec<f64>)> {
    cfg.validate()?;
    let mut x = frames.clone();
    let mut trace = Vec::with_capacity(cfg.iterations);
    for lambda in cfg.step_sizes() {
        let (l, g) = loss.loss_and_grad(&x)?;
        trace.push(l);
        if g.data().iter().all(|&v| v == 0.0) {
            continue;
        }
        let data = x.data().iter().zip(g.data()).map(|(a, b)| a - lambda * b).collect();
        x = x.with_data(data)?;
    }
    Ok((x, trace))
}
