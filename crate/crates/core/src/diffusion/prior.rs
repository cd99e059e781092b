use std::fmt::Debug;

use crate::error::{Error, Result};

use super::NoiseSchedule;

/// Frame-wise noise predictor `ε̂(z_t, t)`.
pub trait DenoisingPrior: Debug + Send + Sync {
    /// Latent dimension of one frame.
    fn latent_dim(&self) -> usize;
    fn predict_noise(&self, z: &[f64], t: usize, schedule: &NoiseSchedule) -> Result<Vec<f64>>;
}

/// Isotropic Gaussian prior `z₀ ~ N(μ, σ₀² I)`, for which `E[ε | z_t]` is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianAnalyticPrior {
    mean: Vec<f64>,
    variance: f64,
}

impl GaussianAnalyticPrior {
    pub fn new(mean: Vec<f64>, variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::validation(format!("prior variance must be positive, got {variance}")));
        }
        if mean.is_empty() || mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("prior mean must be non-empty and finite"));
        }
        Ok(GaussianAnalyticPrior { mean, variance })
    }

    pub fn constant(dim: usize, value: f64, variance: f64) -> Result<Self> {
        Self::new(vec![value; dim], variance)
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }
}

impl DenoisingPrior for GaussianAnalyticPrior {
    fn latent_dim(&self) -> usize {
        self.mean.len()
    }

    fn predict_noise(&self, z: &[f64], t: usize, schedule: &NoiseSchedule) -> Result<Vec<f64>> {
        if z.len() != self.mean.len() {
            return Err(Error::validation(format!(
                "prior expects {}-dim latents, got {}",
                self.mean.len(),
                z.len()
            )));
        }
        gaussian_prior_predict_noise(z, t, &self.mean, self.variance, schedule)
    }
}

/// `(z − √ᾱ·E[z₀|z])/√(1−ᾱ)` with `E[z₀|z] = μ + √ᾱσ₀²/(ᾱσ₀² + 1 − ᾱ)·(z − √ᾱμ)`.
pub fn gaussian_prior_predict_noise(
    z: &[f64],
    t: usize,
    mean: &[f64],
    variance: f64,
    schedule: &NoiseSchedule,
) -> Result<Vec<f64>> {
    if t == 0 || t > schedule.steps() {
        return Err(Error::validation(format!(
            "noise prediction needs 1 <= t <= {}, got {t}",
            schedule.steps()
        )));
    }
    let ab = schedule.alpha_bar(t);
    let sa = ab.sqrt();
    let gain = sa * variance / (ab * variance + 1.0 - ab);
    let sn = (1.0 - ab).sqrt();
    Ok(z.iter()
        .zip(mean)
        .map(|(&z, &m)| {
            let post = m + gain * (z - sa * m);
            (z - sa * post) / sn
        })
        .collect())
}

/// `ẑ₀ = (z − √(1−ᾱ)·ε̂)/√ᾱ`.
pub fn tweedie_denoise(z: &[f64], eps: &[f64], alpha_bar: f64) -> Result<Vec<f64>> {
    if !(alpha_bar > 0.0 && alpha_bar <= 1.0) {
        return Err(Error::validation(format!("alpha_bar must lie in (0, 1], got {alpha_bar}")));
    }
    let (sa, sn) = (alpha_bar.sqrt(), (1.0 - alpha_bar).sqrt());
    Ok(z.iter().zip(eps).map(|(z, e)| (z - sn * e) / sa).collect())
}

/// Coefficients `(c₁, c₂)` of the fixed and predicted noise in the re-noising step.
pub fn renoise_coefficients(alpha_bar_prev: f64, eta: f64) -> (f64, f64) {
    let s = (1.0 - alpha_bar_prev).sqrt();
    (s * eta, s * (1.0 - eta * eta).sqrt())
}

/// `√ᾱ_prev·z̄₀ + c₁·ε_fixed + c₂·ε̂`.
pub fn renoise(z0: &[f64], alpha_bar_prev: f64, eta: f64, eps_fixed: &[f64], eps_hat: &[f64]) -> Result<Vec<f64>> {
    if !(alpha_bar_prev > 0.0 && alpha_bar_prev <= 1.0) {
        return Err(Error::validation(format!("alpha_bar must lie in (0, 1], got {alpha_bar_prev}")));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::validation(format!("eta must lie in [0, 1], got {eta}")));
    }
    let (c1, c2) = renoise_coefficients(alpha_bar_prev, eta);
    let sa = alpha_bar_prev.sqrt();
    Ok(z0
        .iter()
        .zip(eps_fixed)
        .zip(eps_hat)
        .map(|((z, f), e)| sa * z + c1 * f + c2 * e)
        .collect())
}
