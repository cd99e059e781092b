//! Retina/LGN stage: center-surround filtering, luminance gain control, contrast gain
//! control and a softplus output nonlinearity.

use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::filter::{three_sigma_radius, Kernel2d, SpectralKernel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RetinaParams {
    pub sigma_center: f64,
    pub sigma_surround: f64,
    pub sigma_lum: f64,
    pub sigma_con: f64,
    /// Support radius of the center-surround kernel. The two gain-control Gaussians use
    /// `⌈3σ⌉` of their own width.
    pub kernel_radius: usize,
    pub alpha: f64,
    pub beta: f64,
    pub eps: f64,
}

impl Default for RetinaParams {
    fn default() -> Self {
        RetinaParams {
            sigma_center: 0.5,
            sigma_surround: 1.5,
            sigma_lum: 3.0,
            sigma_con: 3.0,
            kernel_radius: three_sigma_radius(1.5),
            alpha: 1.0,
            beta: 1.0,
            eps: 1e-6,
        }
    }
}

impl RetinaParams {
    pub fn validate(&self) -> Result<()> {
        let sigmas = [self.sigma_center, self.sigma_surround, self.sigma_lum, self.sigma_con];
        if sigmas.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::validation("retina sigmas must be positive"));
        }
        if self.sigma_center >= self.sigma_surround {
            return Err(Error::validation("sigma_center must be smaller than sigma_surround"));
        }
        if !(self.alpha >= 0.0 && self.beta >= 0.0) {
            return Err(Error::validation("retina gains must be non-negative"));
        }
        if !(self.eps > 0.0) {
            return Err(Error::validation("retina eps must be positive"));
        }
        if self.kernel_radius == 0 {
            return Err(Error::validation("kernel_radius must be at least 1"));
        }
        Ok(())
    }

    pub fn center_surround_kernel(&self) -> Kernel2d {
        Kernel2d::difference_of_gaussians(self.sigma_center, self.sigma_surround, self.kernel_radius)
    }

    pub fn luminance_kernel(&self) -> Kernel2d {
        Kernel2d::gaussian(self.sigma_lum, three_sigma_radius(self.sigma_lum))
    }

    pub fn contrast_kernel(&self) -> Kernel2d {
        Kernel2d::gaussian(self.sigma_con, three_sigma_radius(self.sigma_con))
    }
}

/// Intermediates of one retina forward pass.
#[derive(Debug, Clone)]
pub struct RetinaTape {
    pub(crate) fingerprint: u64,
    /// `k_lin ∗ x`
    pub(crate) center_surround: Vec<f64>,
    /// `1 + α (k_lum ∗ x)`
    pub(crate) lum_gain: Vec<f64>,
    /// center-surround response after luminance gain
    pub(crate) after_lum: Vec<f64>,
    /// `c = sqrt(k_con ∗ y² + ε)`
    pub(crate) contrast: Vec<f64>,
    /// pre-softplus response
    pub(crate) pre_activation: Vec<f64>,
}

impl RetinaTape {
    pub fn len(&self) -> usize {
        self.pre_activation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pre_activation.is_empty()
    }

    /// Fails unless `frame` is the input this tape was recorded from.
    pub fn verify_input(&self, frame: &[f64]) -> Result<()> {
        if fingerprint(frame) != self.fingerprint {
            return Err(Error::validation("tape was recorded for a different frame"));
        }
        Ok(())
    }
}

pub(crate) fn fingerprint(frame: &[f64]) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    frame.len().hash(&mut h);
    for v in frame {
        v.to_bits().hash(&mut h);
    }
    h.finish()
}

pub fn softplus(y: f64) -> f64 {
    y.max(0.0) + (-y.abs()).exp().ln_1p()
}

pub fn sigmoid(y: f64) -> f64 {
    if y >= 0.0 {
        1.0 / (1.0 + (-y).exp())
    } else {
        let e = y.exp();
        e / (1.0 + e)
    }
}

/// Retina stage bound to one frame size.
#[derive(Debug, Clone)]
pub struct Retina {
    params: RetinaParams,
    height: usize,
    width: usize,
    fft: Fft2,
    k_lin: SpectralKernel,
    k_lum: SpectralKernel,
    k_con: SpectralKernel,
}

impl Retina {
    pub fn new(params: RetinaParams, height: usize, width: usize) -> Result<Self> {
        params.validate()?;
        if height == 0 || width == 0 {
            return Err(Error::validation("retina frame size must be positive"));
        }
        let fft = Fft2::new(height, width);
        Ok(Retina {
            k_lin: SpectralKernel::new(&params.center_surround_kernel(), &fft),
            k_lum: SpectralKernel::new(&params.luminance_kernel(), &fft),
            k_con: SpectralKernel::new(&params.contrast_kernel(), &fft),
            params,
            height,
            width,
            fft,
        })
    }

    pub fn params(&self) -> &RetinaParams {
        &self.params
    }

    pub fn frame_len(&self) -> usize {
        self.height * self.width
    }

    pub fn forward(&self, frame: &[f64]) -> Result<(Vec<f64>, RetinaTape)> {
        if frame.len() != self.frame_len() {
            return Err(Error::validation(format!(
                "retina expects {} pixels, got {}",
                self.frame_len(),
                frame.len()
            )));
        }
        if frame.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("retina input must be finite"));
        }
        let p = &self.params;
        let center_surround = self.k_lin.convolve(frame, &self.fft);
        let lum_gain: Vec<f64> = self
            .k_lum
            .convolve(frame, &self.fft)
            .into_iter()
            .map(|l| 1.0 + p.alpha * l)
            .collect();
        let after_lum: Vec<f64> = center_surround.iter().zip(&lum_gain).map(|(y, g)| y / g).collect();
        let energy: Vec<f64> = after_lum.iter().map(|y| y * y).collect();
        let contrast: Vec<f64> = self
            .k_con
            .convolve(&energy, &self.fft)
            .into_iter()
            .map(|q| (q + p.eps).sqrt())
            .collect();
        let pre_activation: Vec<f64> = after_lum
            .iter()
            .zip(&contrast)
            .map(|(y, c)| y / (1.0 + p.beta * c))
            .collect();
        let out: Vec<f64> = pre_activation.iter().map(|&y| softplus(y)).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation(
                "retina response is not finite (luminance gain denominator vanished)",
            ));
        }
        let tape = RetinaTape {
            fingerprint: fingerprint(frame),
            center_surround,
            lum_gain,
            after_lum,
            contrast,
            pre_activation,
        };
        Ok((out, tape))
    }

    /// `Jᵀ · cotangent` for the forward pass recorded in `tape`.
    pub fn vjp(&self, tape: &RetinaTape, cotangent: &[f64]) -> Result<Vec<f64>> {
        if cotangent.len() != self.frame_len() || tape.len() != self.frame_len() {
            return Err(Error::validation("retina cotangent/tape shape mismatch"));
        }
        let p = &self.params;
        // softplus
        let g_pre: Vec<f64> = cotangent
            .iter()
            .zip(&tape.pre_activation)
            .map(|(g, y)| g * sigmoid(*y))
            .collect();
        // contrast gain: y3 = y2 / (1 + βc), c = sqrt(k_con ∗ y2² + ε)
        let mut g_after_lum = vec![0.0; g_pre.len()];
        let mut g_q = vec![0.0; g_pre.len()];
        for i in 0..g_pre.len() {
            let d = 1.0 + p.beta * tape.contrast[i];
            g_after_lum[i] = g_pre[i] / d;
            let g_c = -g_pre[i] * tape.after_lum[i] * p.beta / (d * d);
            g_q[i] = g_c / (2.0 * tape.contrast[i]);
        }
        let g_energy = self.k_con.correlate(&g_q, &self.fft);
        for i in 0..g_after_lum.len() {
            g_after_lum[i] += 2.0 * tape.after_lum[i] * g_energy[i];
        }
        // luminance gain: y2 = y1 / (1 + α l)
        let mut g_lin = vec![0.0; g_pre.len()];
        let mut g_lum = vec![0.0; g_pre.len()];
        for i in 0..g_pre.len() {
            let d = tape.lum_gain[i];
            g_lin[i] = g_after_lum[i] / d;
            g_lum[i] = -g_after_lum[i] * tape.center_surround[i] * p.alpha / (d * d);
        }
        let a = self.k_lin.correlate(&g_lin, &self.fft);
        let b = self.k_lum.correlate(&g_lum, &self.fft);
        Ok(a.into_iter().zip(b).map(|(x, y)| x + y).collect())
    }
}
