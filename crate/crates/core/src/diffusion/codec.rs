use std::f64::consts::PI;
use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::seqio::{Dims, FrameSequence};

/// Per-frame latents of a sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentStack {
    dim: usize,
    data: Vec<f64>,
}

impl LatentStack {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.is_empty() || data.len() % dim != 0 {
            return Err(Error::validation(format!(
                "latent stack of {} values is not a whole number of {dim}-dim frames",
                data.len()
            )));
        }
        Ok(LatentStack { dim, data })
    }

    /// `frames` copies of one latent.
    pub fn repeated(latent: &[f64], frames: usize) -> Result<Self> {
        Self::new(latent.len(), latent.repeat(frames))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn frames(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn from_frames(frames: Vec<Vec<f64>>) -> Result<Self> {
        let dim = frames.first().map_or(0, Vec::len);
        if frames.iter().any(|f| f.len() != dim) {
            return Err(Error::validation("latent frames differ in size"));
        }
        Self::new(dim, frames.concat())
    }
}

/// Encoder/decoder pair between pixel frames and latents, applied frame by frame.
pub trait LatentCodec: Debug + Send + Sync {
    /// `(height, width, channels)` of pixel frames.
    fn frame_shape(&self) -> (usize, usize, usize);
    fn latent_dim(&self) -> usize;
    fn is_linear(&self) -> bool;
    fn encode_frame(&self, pixels: &[f64]) -> Vec<f64>;
    fn decode_frame(&self, latent: &[f64]) -> Vec<f64>;

    fn encode(&self, seq: &FrameSequence) -> Result<LatentStack> {
        let (h, w, c) = self.frame_shape();
        let d = seq.dims();
        if (d.height, d.width, d.channels) != (h, w, c) {
            return Err(Error::validation(format!("codec built for {h}x{w}x{c} frames, got {d}")));
        }
        let data = seq.frames().flat_map(|f| self.encode_frame(f)).collect();
        LatentStack::new(self.latent_dim(), data)
    }

    fn decode(&self, latents: &LatentStack) -> Result<FrameSequence> {
        if latents.dim() != self.latent_dim() {
            return Err(Error::validation(format!(
                "codec expects {}-dim latents, got {}",
                self.latent_dim(),
                latents.dim()
            )));
        }
        let (h, w, c) = self.frame_shape();
        let data = latents.iter().flat_map(|z| self.decode_frame(z)).collect();
        FrameSequence::new(Dims::new(latents.frames(), h, w, c), data)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCodec {
    height: usize,
    width: usize,
    channels: usize,
}

impl IdentityCodec {
    pub fn new(height: usize, width: usize, channels: usize) -> Self {
        IdentityCodec { height, width, channels }
    }
}

impl LatentCodec for IdentityCodec {
    fn frame_shape(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }
    fn latent_dim(&self) -> usize {
        self.height * self.width * self.channels
    }
    fn is_linear(&self) -> bool {
        true
    }
    fn encode_frame(&self, pixels: &[f64]) -> Vec<f64> {
        pixels.to_vec()
    }
    fn decode_frame(&self, latent: &[f64]) -> Vec<f64> {
        latent.to_vec()
    }
}

/// Orthonormal `n×n` DCT-II matrix, row `k` holding basis function `k`.
fn dct_matrix(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for k in 0..n {
        let s = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
        for i in 0..n {
            m[k * n + i] = s * (PI * (i as f64 + 0.5) * k as f64 / n as f64).cos();
        }
    }
    m
}

/// Separable orthonormal DCT per channel, keeping the lowest `ρ` fraction of frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoCodec {
    height: usize,
    width: usize,
    channels: usize,
    keep: f64,
    dct_h: Vec<f64>,
    dct_w: Vec<f64>,
    /// Kept `(u, v)` frequencies in latent order.
    kept: Vec<(usize, usize)>,
}

impl OrthoCodec {
    pub fn new(height: usize, width: usize, channels: usize, keep: f64) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::validation("codec frame shape must be positive"));
        }
        if !(keep > 0.0 && keep <= 1.0) {
            return Err(Error::validation(format!("kept fraction must lie in (0, 1], got {keep}")));
        }
        let mut order: Vec<(usize, usize)> = (0..height).flat_map(|u| (0..width).map(move |v| (u, v))).collect();
        order.sort_by_key(|&(u, v)| (u + v, u));
        let n = ((keep * (height * width) as f64).ceil() as usize).clamp(1, height * width);
        order.truncate(n);
        Ok(OrthoCodec {
            height,
            width,
            channels,
            keep,
            dct_h: dct_matrix(height),
            dct_w: dct_matrix(width),
            kept: order,
        })
    }

    pub fn lossless(height: usize, width: usize, channels: usize) -> Result<Self> {
        Self::new(height, width, channels, 1.0)
    }

    pub fn kept_fraction(&self) -> f64 {
        self.keep
    }

    pub fn kept_frequencies(&self) -> &[(usize, usize)] {
        &self.kept
    }

    /// `C_H · plane · C_Wᵀ`.
    fn analyze(&self, plane: &[f64]) -> Vec<f64> {
        let (h, w) = (self.height, self.width);
        let mut rows = vec![0.0; h * w];
        for i in 0..h {
            for v in 0..w {
                rows[i * w + v] = (0..w).map(|j| plane[i * w + j] * self.dct_w[v * w + j]).sum();
            }
        }
        let mut out = vec![0.0; h * w];
        for u in 0..h {
            for v in 0..w {
                out[u * w + v] = (0..h).map(|i| self.dct_h[u * h + i] * rows[i * w + v]).sum();
            }
        }
        out
    }

    /// `C_Hᵀ · coeffs · C_W`.
    fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        let (h, w) = (self.height, self.width);
        let mut cols = vec![0.0; h * w];
        for i in 0..h {
            for v in 0..w {
                cols[i * w + v] = (0..h).map(|u| self.dct_h[u * h + i] * coeffs[u * w + v]).sum();
            }
        }
        let mut out = vec![0.0; h * w];
        for i in 0..h {
            for j in 0..w {
                out[i * w + j] = (0..w).map(|v| cols[i * w + v] * self.dct_w[v * w + j]).sum();
            }
        }
        out
    }
}

impl LatentCodec for OrthoCodec {
    fn frame_shape(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    fn latent_dim(&self) -> usize {
        self.kept.len() * self.channels
    }

    fn is_linear(&self) -> bool {
        true
    }

    fn encode_frame(&self, pixels: &[f64]) -> Vec<f64> {
        let c = self.channels;
        let mut out = Vec::with_capacity(self.latent_dim());
        for ch in 0..c {
            let plane: Vec<f64> = pixels.iter().skip(ch).step_by(c).copied().collect();
            let coeffs = self.analyze(&plane);
            out.extend(self.kept.iter().map(|&(u, v)| coeffs[u * self.width + v]));
        }
        out
    }

    fn decode_frame(&self, latent: &[f64]) -> Vec<f64> {
        let (c, k) = (self.channels, self.kept.len());
        let mut out = vec![0.0; self.height * self.width * c];
        for ch in 0..c {
            let mut coeffs = vec![0.0; self.height * self.width];
            for (&(u, v), &z) in self.kept.iter().zip(&latent[ch * k..(ch + 1) * k]) {
                coeffs[u * self.width + v] = z;
            }
            for (i, p) in self.synthesize(&coeffs).into_iter().enumerate() {
                out[i * c + ch] = p;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(n: usize) -> Vec<f64> {
        (0..n).map(|i| ((i * 37 % 11) as f64 * 0.13).sin()).collect()
    }

    #[test]
    fn dct_is_orthonormal() {
        for n in [1, 3, 8] {
            let m = dct_matrix(n);
            for a in 0..n {
                for b in 0..n {
                    let d: f64 = (0..n).map(|i| m[a * n + i] * m[b * n + i]).sum();
                    assert!((d - if a == b { 1.0 } else { 0.0 }).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn lossless_roundtrip() {
        let c = OrthoCodec::lossless(6, 5, 3).unwrap();
        let x = ramp(90);
        let y = c.decode_frame(&c.encode_frame(&x));
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-12);
        }
        let id = IdentityCodec::new(6, 5, 3);
        assert_eq!(id.decode_frame(&id.encode_frame(&x)), x);
    }

    #[test]
    fn truncation_is_a_projection() {
        let c = OrthoCodec::new(8, 8, 1, 0.25).unwrap();
        assert_eq!(c.latent_dim(), 16);
        assert_eq!(c.kept_frequencies()[0], (0, 0));
        let x = ramp(64);
        let p = c.decode_frame(&c.encode_frame(&x));
        let pp = c.decode_frame(&c.encode_frame(&p));
        assert!(p.iter().zip(&pp).all(|(a, b)| (a - b).abs() < 1e-12));
        assert!(x.iter().zip(&p).any(|(a, b)| (a - b).abs() > 1e-3));
        // constants live entirely in the DC coefficient
        let k = c.decode_frame(&c.encode_frame(&[0.5; 64]));
        assert!(k.iter().all(|v| (v - 0.5).abs() < 1e-12));
    }
}
