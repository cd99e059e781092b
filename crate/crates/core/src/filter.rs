//! Circular convolution kernels shared by the blur operator, the low-pass step and the
//! retina stage.

use rustfft::num_complex::Complex64;

use crate::fft::Fft2;

/// Normalized 1-D Gaussian taps on `[-radius, radius]`.
pub fn gaussian_taps(sigma: f64, radius: usize) -> Vec<f64> {
    let r = radius as i64;
    let mut taps: Vec<f64> = (-r..=r)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= s);
    taps
}

/// Support radius `⌈3σ⌉`, at least 1.
pub fn three_sigma_radius(sigma: f64) -> usize {
    ((3.0 * sigma).ceil() as usize).max(1)
}

/// Wraps centered taps onto a period-`n` circle: `out[j] = Σ taps[m]` over offsets `m ≡ j (mod n)`.
pub fn fold_taps(taps: &[f64], n: usize) -> Vec<f64> {
    let r = (taps.len() / 2) as i64;
    let mut out = vec![0.0; n];
    for (m, &t) in taps.iter().enumerate() {
        let off = m as i64 - r;
        out[off.rem_euclid(n as i64) as usize] += t;
    }
    out
}

/// Separable circular Gaussian blur with radius `⌈3σ⌉`.
///
/// The kernel is symmetric, so the operator is self-adjoint.
#[derive(Debug, Clone)]
pub struct CircularGaussian {
    sigma: f64,
    taps: Vec<f64>,
}

impl CircularGaussian {
    pub fn new(sigma: f64) -> Self {
        CircularGaussian {
            sigma,
            taps: gaussian_taps(sigma, three_sigma_radius(sigma)),
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Blurs one `H×W` plane.
    pub fn apply_plane(&self, x: &[f64], h: usize, w: usize) -> Vec<f64> {
        let kw = fold_taps(&self.taps, w);
        let kh = fold_taps(&self.taps, h);
        let mut rows = vec![0.0; h * w];
        for i in 0..h {
            let src = &x[i * w..(i + 1) * w];
            for j in 0..w {
                let mut acc = 0.0;
                for (m, &k) in kw.iter().enumerate() {
                    if k != 0.0 {
                        acc += k * src[(j + w - m) % w];
                    }
                }
                rows[i * w + j] = acc;
            }
        }
        let mut out = vec![0.0; h * w];
        for i in 0..h {
            for (m, &k) in kh.iter().enumerate() {
                if k == 0.0 {
                    continue;
                }
                let src = (i + h - m) % h;
                for j in 0..w {
                    out[i * w + j] += k * rows[src * w + j];
                }
            }
        }
        out
    }

    /// Blurs every channel of every frame of an interleaved `T×H×W×C` buffer.
    pub fn apply_interleaved(&self, data: &[f64], h: usize, w: usize, c: usize) -> Vec<f64> {
        let frame_len = h * w * c;
        let mut out = vec![0.0; data.len()];
        for (src, dst) in data.chunks_exact(frame_len).zip(out.chunks_exact_mut(frame_len)) {
            for ch in 0..c {
                let plane: Vec<f64> = src.iter().skip(ch).step_by(c).copied().collect();
                let blurred = self.apply_plane(&plane, h, w);
                for (p, v) in blurred.into_iter().enumerate() {
                    dst[p * c + ch] = v;
                }
            }
        }
        out
    }
}

/// Explicit 2-D kernel with odd side `2r+1`, row-major, centered.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2d {
    pub radius: usize,
    pub taps: Vec<f64>,
}

impl Kernel2d {
    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    /// Normalized isotropic Gaussian.
    pub fn gaussian(sigma: f64, radius: usize) -> Self {
        let g = gaussian_taps(sigma, radius);
        let mut taps: Vec<f64> = g.iter().flat_map(|a| g.iter().map(move |b| a * b)).collect();
        let s: f64 = taps.iter().sum();
        taps.iter_mut().for_each(|t| *t /= s);
        Kernel2d { radius, taps }
    }

    /// Center-minus-surround difference of normalized Gaussians, mean-subtracted so the
    /// taps sum to zero.
    pub fn difference_of_gaussians(sigma_center: f64, sigma_surround: f64, radius: usize) -> Self {
        let c = Kernel2d::gaussian(sigma_center, radius);
        let s = Kernel2d::gaussian(sigma_surround, radius);
        let mut taps: Vec<f64> = c.taps.iter().zip(&s.taps).map(|(a, b)| a - b).collect();
        let mean = taps.iter().sum::<f64>() / taps.len() as f64;
        taps.iter_mut().for_each(|t| *t -= mean);
        Kernel2d { radius, taps }
    }

    /// The kernel wrapped onto an `H×W` torus.
    pub fn fold(&self, h: usize, w: usize) -> Vec<f64> {
        let r = self.radius as i64;
        let side = self.side();
        let mut out = vec![0.0; h * w];
        for a in 0..side {
            for b in 0..side {
                let i = (a as i64 - r).rem_euclid(h as i64) as usize;
                let j = (b as i64 - r).rem_euclid(w as i64) as usize;
                out[i * w + j] += self.taps[a * side + b];
            }
        }
        out
    }
}

/// A circular convolution realized as a pointwise product in the Fourier domain.
#[derive(Debug, Clone)]
pub struct SpectralKernel {
    spectrum: Vec<Complex64>,
}

impl SpectralKernel {
    pub fn new(kernel: &Kernel2d, fft: &Fft2) -> Self {
        let folded = kernel.fold(fft.height(), fft.width());
        SpectralKernel {
            spectrum: fft.forward_real(&folded),
        }
    }

    /// `k ∗ x` (circular).
    pub fn convolve(&self, x: &[f64], fft: &Fft2) -> Vec<f64> {
        self.apply(x, fft, false)
    }

    /// Adjoint of [`SpectralKernel::convolve`]: circular correlation with `k`.
    pub fn correlate(&self, x: &[f64], fft: &Fft2) -> Vec<f64> {
        self.apply(x, fft, true)
    }

    fn apply(&self, x: &[f64], fft: &Fft2, adjoint: bool) -> Vec<f64> {
        let mut buf = fft.forward_real(x);
        for (v, k) in buf.iter_mut().zip(&self.spectrum) {
            *v *= if adjoint { k.conj() } else { *k };
        }
        fft.inverse(&mut buf);
        buf.into_iter().map(|v| v.re).collect()
    }
}
