//! Complex steerable pyramid in the Fourier domain.
//!
//! Radial splits are raised-cosine transitions one octave wide in log2-frequency. Each
//! orientation band uses the angular profile `|cos(θ - πk/K)|^(K-1)`; the complex
//! coefficient is obtained by doubling the mask on the half-plane `cos(θ - πk/K) > 0` and
//! zeroing it on the other, so the real part of a band equals the real steerable band and
//! the squared real masks tile the spectrum:
//!
//! `|H0|² + Σ_{s,k} |B_k^(s)|² + |L_total|² = 1`.
//!
//! Every coarser scale halves the grid by cropping the low-passed spectrum; the crop is
//! scaled by 1/4 so spatial amplitudes are preserved across scales.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{signed_index, Fft2};

/// Minimum side length retained at the coarsest scale.
pub const MIN_SCALE_SUPPORT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PyramidConfig {
    pub scales: usize,
    pub orientations: usize,
    pub height: usize,
    pub width: usize,
}

impl PyramidConfig {
    pub fn new(scales: usize, orientations: usize, height: usize, width: usize) -> Self {
        PyramidConfig {
            scales,
            orientations,
            height,
            width,
        }
    }

    /// Largest scale count `≤ max_scales` that the frame size supports.
    pub fn fitted(max_scales: usize, orientations: usize, height: usize, width: usize) -> Result<Self> {
        let mut s = max_scales.max(1);
        while s > 1 && PyramidConfig::new(s, orientations, height, width).validate().is_err() {
            s -= 1;
        }
        let cfg = PyramidConfig::new(s, orientations, height, width);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scales == 0 {
            return Err(Error::validation("pyramid needs at least one scale"));
        }
        if self.orientations < 2 {
            return Err(Error::validation("pyramid needs at least two orientations"));
        }
        let factor = 1usize << (self.scales - 1);
        if self.height % factor != 0 || self.width % factor != 0 {
            return Err(Error::validation(format!(
                "{}x{} is not divisible by 2^{} for {} scales",
                self.height,
                self.width,
                self.scales - 1,
                self.scales
            )));
        }
        if self.height.min(self.width) / factor < MIN_SCALE_SUPPORT {
            return Err(Error::validation(format!(
                "{}x{} leaves less than {MIN_SCALE_SUPPORT} pixels at scale {}",
                self.height, self.width, self.scales
            )));
        }
        Ok(())
    }

    /// Grid size of scale `s` (0-based).
    pub fn scale_dims(&self, s: usize) -> (usize, usize) {
        (self.height >> s, self.width >> s)
    }
}

/// Raised-cosine transition between log2-radius `edge - 1` (value 0) and `edge` (value 1).
fn rising(log_r: f64, edge: f64) -> f64 {
    let x = (log_r - (edge - 1.0)).clamp(0.0, 1.0);
    if x >= 1.0 { 1.0 } else { (PI / 2.0 * x).sin() }
}

/// Complementary transition, `sqrt(1 - rising²)`.
fn falling(log_r: f64, edge: f64) -> f64 {
    let x = (log_r - (edge - 1.0)).clamp(0.0, 1.0);
    if x >= 1.0 { 0.0 } else { (PI / 2.0 * x).cos() }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Masks for one scale, on that scale's grid.
#[derive(Debug, Clone)]
pub struct ScaleFilters {
    pub height: usize,
    pub width: usize,
    /// Real band masks `B_k`, radial × angular.
    pub bands: Vec<Vec<f64>>,
    /// Analytic masks `2·B_k` on the positive half-plane, zero on the negative one.
    pub analytic: Vec<Vec<f64>>,
    /// Low-pass mask feeding the next scale.
    pub lowpass: Vec<f64>,
    pub(crate) fft: Fft2,
}

#[derive(Debug, Clone)]
pub struct PyramidFilters {
    config: PyramidConfig,
    /// Full-resolution high-pass residual mask `H0`.
    pub highpass: Vec<f64>,
    /// Full-resolution mask `L0` ahead of the first scale.
    pub lowpass0: Vec<f64>,
    pub scales: Vec<ScaleFilters>,
}

struct Polar {
    log_r: f64,
    theta: f64,
}

fn polar_grid(h: usize, w: usize) -> Vec<Polar> {
    let mut out = Vec::with_capacity(h * w);
    for i in 0..h {
        let fy = 2.0 * signed_index(i, h) as f64 / h as f64;
        for j in 0..w {
            let fx = 2.0 * signed_index(j, w) as f64 / w as f64;
            let r = (fx * fx + fy * fy).sqrt();
            out.push(Polar {
                log_r: if r > 0.0 { r.log2() } else { f64::NEG_INFINITY },
                theta: fy.atan2(fx),
            });
        }
    }
    out
}

pub fn pyramid_build_filters(config: PyramidConfig) -> Result<PyramidFilters> {
    config.validate()?;
    let k = config.orientations;
    let order = k - 1;
    let norm = (2f64.powi(2 * order as i32) * factorial(order).powi(2)
        / (k as f64 * factorial(2 * order)))
        .sqrt();
    let full = polar_grid(config.height, config.width);
    let highpass = full.iter().map(|p| rising(p.log_r, 0.0)).collect();
    let lowpass0 = full.iter().map(|p| falling(p.log_r, 0.0)).collect();
    let mut scales = Vec::with_capacity(config.scales);
    for s in 0..config.scales {
        let (h, w) = config.scale_dims(s);
        let grid = polar_grid(h, w);
        let radial: Vec<f64> = grid.iter().map(|p| rising(p.log_r, -1.0)).collect();
        let lowpass = grid.iter().map(|p| falling(p.log_r, -1.0)).collect();
        let mut bands = Vec::with_capacity(k);
        let mut analytic = Vec::with_capacity(k);
        for b in 0..k {
            let center = PI * b as f64 / k as f64;
            let mut band = Vec::with_capacity(h * w);
            let mut an = Vec::with_capacity(h * w);
            for (p, r) in grid.iter().zip(&radial) {
                let c = (p.theta - center).cos();
                let m = r * norm * c.abs().powi(order as i32);
                band.push(m);
                an.push(if c > 0.0 { 2.0 * m } else { 0.0 });
            }
            bands.push(band);
            analytic.push(an);
        }
        scales.push(ScaleFilters {
            height: h,
            width: w,
            bands,
            analytic,
            lowpass,
            fft: Fft2::new(h, w),
        });
    }
    Ok(PyramidFilters {
        config,
        highpass,
        lowpass0,
        scales,
    })
}

/// Pyramid coefficients of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct PyramidBands {
    /// `bands[s][k]`: complex coefficients on scale `s`'s grid.
    pub bands: Vec<Vec<Vec<Complex64>>>,
    /// Spatial high-pass residual (full resolution).
    pub highpass: Vec<f64>,
    /// Spatial low-pass residual (coarsest grid).
    pub lowpass: Vec<f64>,
}

/// Maps scale-`s` grid bins onto the `(h/2)×(w/2)` child grid.
fn crop_indices(h: usize, w: usize) -> Vec<(usize, usize)> {
    let (ch, cw) = (h / 2, w / 2);
    let mut idx = Vec::with_capacity(ch * cw);
    for i in 0..ch {
        let a = signed_index(i, ch).rem_euclid(h as i64) as usize;
        for j in 0..cw {
            let b = signed_index(j, cw).rem_euclid(w as i64) as usize;
            idx.push((i * cw + j, a * w + b));
        }
    }
    idx
}

impl PyramidFilters {
    pub fn config(&self) -> &PyramidConfig {
        &self.config
    }

    /// Largest deviation of the composed power sum from 1 over all full-resolution bins.
    pub fn tiling_residual(&self) -> f64 {
        let power = self.composed_power();
        power.iter().map(|p| (p - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Pointwise `|H0|² + Σ|B̃|² + |L̃|²` on the full grid.
    pub fn composed_power(&self) -> Vec<f64> {
        let (h, w) = (self.config.height, self.config.width);
        let mut power: Vec<f64> = self.highpass.iter().map(|m| m * m).collect();
        // chain[full bin] = product of low-pass masks applied so far
        let mut chain: Vec<f64> = self.lowpass0.clone();
        for sf in &self.scales {
            let (sh, sw) = (sf.height, sf.width);
            for i in 0..h {
                let a = signed_index(i, h);
                for j in 0..w {
                    let b = signed_index(j, w);
                    let full = i * w + j;
                    if chain[full] == 0.0 {
                        continue;
                    }
                    let inside = a >= -(sh as i64) / 2 && a < (sh as i64 + 1) / 2 && b >= -(sw as i64) / 2 && b < (sw as i64 + 1) / 2;
                    if !inside {
                        chain[full] = 0.0;
                        continue;
                    }
                    let local = a.rem_euclid(sh as i64) as usize * sw + b.rem_euclid(sw as i64) as usize;
                    let band_power: f64 = sf.bands.iter().map(|m| m[local] * m[local]).sum();
                    power[full] += chain[full] * chain[full] * band_power;
                    chain[full] *= sf.lowpass[local];
                }
            }
        }
        for (p, c) in power.iter_mut().zip(&chain) {
            *p += c * c;
        }
        power
    }

    fn check_input(&self, image: &[f64]) -> Result<()> {
        let n = self.config.height * self.config.width;
        if image.len() != n {
            return Err(Error::validation(format!(
                "pyramid expects {n} pixels, got {}",
                image.len()
            )));
        }
        Ok(())
    }

    /// Full decomposition including both residuals.
    pub fn forward(&self, image: &[f64]) -> Result<PyramidBands> {
        self.check_input(image)?;
        let full_fft = &self.scales[0].fft;
        let spectrum = full_fft.forward_real(image);
        let mut hi: Vec<Complex64> = spectrum.iter().zip(&self.highpass).map(|(v, m)| v * m).collect();
        full_fft.inverse(&mut hi);
        let (bands, low) = self.bands_from_spectrum(&spectrum, true);
        Ok(PyramidBands {
            bands,
            highpass: hi.into_iter().map(|v| v.re).collect(),
            lowpass: low.expect("requested residual"),
        })
    }

    /// Oriented bands only; the residuals are skipped.
    pub fn forward_bands(&self, image: &[f64]) -> Result<Vec<Vec<Vec<Complex64>>>> {
        self.check_input(image)?;
        let spectrum = self.scales[0].fft.forward_real(image);
        Ok(self.bands_from_spectrum(&spectrum, false).0)
    }

    fn bands_from_spectrum(
        &self,
        spectrum: &[Complex64],
        with_low: bool,
    ) -> (Vec<Vec<Vec<Complex64>>>, Option<Vec<f64>>) {
        let mut cur: Vec<Complex64> = spectrum.iter().zip(&self.lowpass0).map(|(v, m)| v * m).collect();
        let mut out = Vec::with_capacity(self.scales.len());
        let mut low = None;
        for (s, sf) in self.scales.iter().enumerate() {
            let mut level = Vec::with_capacity(sf.analytic.len());
            for mask in &sf.analytic {
                let mut z: Vec<Complex64> = cur.iter().zip(mask).map(|(v, m)| v * m).collect();
                sf.fft.inverse(&mut z);
                level.push(z);
            }
            out.push(level);
            let lowpassed: Vec<Complex64> = cur.iter().zip(&sf.lowpass).map(|(v, m)| v * m).collect();
            if s + 1 < self.scales.len() {
                let mut next = vec![Complex64::new(0.0, 0.0); (sf.height / 2) * (sf.width / 2)];
                for (dst, src) in crop_indices(sf.height, sf.width) {
                    next[dst] = lowpassed[src] * 0.25;
                }
                cur = next;
            } else if with_low {
                let mut l = lowpassed;
                sf.fft.inverse(&mut l);
                low = Some(l.into_iter().map(|v| v.re).collect());
            }
        }
        (out, low)
    }

    /// Adjoint of [`PyramidFilters::forward_bands`] viewed as a real-linear map into
    /// `(Re z, Im z)`: given `w = ∂L/∂Re z + i ∂L/∂Im z` per band, returns `∂L/∂image`.
    pub fn bands_adjoint(&self, cotangents: &[Vec<Vec<Complex64>>]) -> Result<Vec<f64>> {
        if cotangents.len() != self.scales.len() {
            return Err(Error::validation("cotangent scale count mismatch"));
        }
        let mut upper: Option<Vec<Complex64>> = None;
        for s in (0..self.scales.len()).rev() {
            let sf = &self.scales[s];
            let n = sf.height * sf.width;
            if cotangents[s].len() != sf.analytic.len() || cotangents[s].iter().any(|b| b.len() != n) {
                return Err(Error::validation(format!("cotangent shape mismatch at scale {s}")));
            }
            let mut g = vec![Complex64::new(0.0, 0.0); n];
            for (w, mask) in cotangents[s].iter().zip(&sf.analytic) {
                let mut spec = w.clone();
                sf.fft.forward(&mut spec);
                let scale = 1.0 / n as f64;
                for ((acc, v), m) in g.iter_mut().zip(&spec).zip(mask) {
                    *acc += v * (m * scale);
                }
            }
            if let Some(child) = upper.take() {
                for (c, parent) in crop_indices(sf.height, sf.width) {
                    g[parent] += child[c] * (0.25 * sf.lowpass[parent]);
                }
            }
            upper = Some(g);
        }
        let mut g: Vec<Complex64> = upper
            .expect("at least one scale")
            .into_iter()
            .zip(&self.lowpass0)
            .map(|(v, m)| v * m)
            .collect();
        self.scales[0].fft.inverse_unnormalized(&mut g);
        Ok(g.into_iter().map(|v| v.re).collect())
    }

    /// Inverts [`PyramidFilters::forward`] using the real parts of the bands.
    pub fn reconstruct(&self, bands: &PyramidBands) -> Result<Vec<f64>> {
        let last = self.scales.len() - 1;
        let mut cur = self.scales[last].fft.forward_real(&bands.lowpass);
        for (v, m) in cur.iter_mut().zip(&self.scales[last].lowpass) {
            *v *= m;
        }
        for s in (0..self.scales.len()).rev() {
            let sf = &self.scales[s];
            if s < last {
                let mut parent = vec![Complex64::new(0.0, 0.0); sf.height * sf.width];
                for (c, p) in crop_indices(sf.height, sf.width) {
                    parent[p] = cur[c] * (4.0 * sf.lowpass[p]);
                }
                cur = parent;
            }
            for (z, mask) in bands.bands[s].iter().zip(&sf.bands) {
                let re: Vec<f64> = z.iter().map(|v| v.re).collect();
                let spec = sf.fft.forward_real(&re);
                for ((acc, v), m) in cur.iter_mut().zip(&spec).zip(mask) {
                    *acc += v * m;
                }
            }
        }
        let full_fft = &self.scales[0].fft;
        let hi = full_fft.forward_real(&bands.highpass);
        let mut spec: Vec<Complex64> = cur
            .iter()
            .zip(&self.lowpass0)
            .zip(hi.iter().zip(&self.highpass))
            .map(|((c, l), (h, hm))| c * l + h * hm)
            .collect();
        full_fft.inverse(&mut spec);
        Ok(spec.into_iter().map(|v| v.re).collect())
    }
}
