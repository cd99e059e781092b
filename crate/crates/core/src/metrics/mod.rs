//! Fidelity metrics and curvature summaries.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filter::{gaussian_taps, three_sigma_radius};
use crate::perceptual::{PerceptualConfig, PerceptualEncoder};
use crate::seqio::FrameSequence;
use crate::straightness::{trajectory_report, CurvatureReport, CurvatureTolerances, Domain, Trajectory};

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

/// `10·log₁₀(range² / MSE)`; identical inputs give `+∞`.
pub fn psnr(reference: &FrameSequence, test: &FrameSequence, data_range: f64) -> Result<f64> {
    reference.check_same_dims(test)?;
    let n = reference.data().len() as f64;
    let mse = reference.data().iter().zip(test.data()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (data_range * data_range / mse).log10())
}

fn ssim_window() -> Vec<f64> {
    let r = SSIM_WINDOW / 2;
    debug_assert!(three_sigma_radius(SSIM_SIGMA) >= r);
    let g = gaussian_taps(SSIM_SIGMA, r);
    let mut w = vec![0.0; SSIM_WINDOW * SSIM_WINDOW];
    for i in 0..SSIM_WINDOW {
        for j in 0..SSIM_WINDOW {
            w[i * SSIM_WINDOW + j] = g[i] * g[j];
        }
    }
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

/// Mean SSIM over the valid window positions of one plane.
fn ssim_plane(x: &[f64], y: &[f64], h: usize, w: usize, window: &[f64]) -> f64 {
    let (c1, c2) = ((SSIM_K1 * 1.0f64).powi(2), (SSIM_K2 * 1.0f64).powi(2));
    let n = SSIM_WINDOW;
    let mut total = 0.0;
    let mut count = 0usize;
    for i0 in 0..=h - n {
        for j0 in 0..=w - n {
            let (mut mx, mut my, mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for a in 0..n {
                for b in 0..n {
                    let k = window[a * n + b];
                    let p = (i0 + a) * w + j0 + b;
                    let (u, v) = (x[p], y[p]);
                    mx += k * u;
                    my += k * v;
                    xx += k * u * u;
                    yy += k * v * v;
                    xy += k * u * v;
                }
            }
            let (vx, vy, cov) = (xx - mx * mx, yy - my * my, xy - mx * my);
            total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    total / count as f64
}

/// Gaussian-windowed SSIM (11×11, σ = 1.5, unit data range), averaged over channels and frames.
pub fn ssim(reference: &FrameSequence, test: &FrameSequence) -> Result<f64> {
    reference.check_same_dims(test)?;
    let d = reference.dims();
    if d.height < SSIM_WINDOW || d.width < SSIM_WINDOW {
        return Err(Error::validation(format!(
            "SSIM needs frames of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {}x{}",
            d.height, d.width
        )));
    }
    let window = ssim_window();
    let mut total = 0.0;
    for t in 0..d.frames {
        for c in 0..d.channels {
            total += ssim_plane(&reference.plane(t, c), &test.plane(t, c), d.height, d.width, &window);
        }
    }
    Ok(total / (d.frames * d.channels) as f64)
}

/// Mean curvature of a sequence in pixel, retina and V1 space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainCurvatures {
    pub pixel: CurvatureReport,
    pub retina: CurvatureReport,
    pub v1: CurvatureReport,
}

impl DomainCurvatures {
    /// Pixel minus V1 mean curvature, in degrees.
    pub fn delta(&self) -> f64 {
        self.pixel.mean_deg - self.v1.mean_deg
    }

    pub fn reports(&self) -> [&CurvatureReport; 3] {
        [&self.pixel, &self.retina, &self.v1]
    }
}

/// Curvature in all three domains; colour input is reduced to luma first.
pub fn curvature_report(seq: &FrameSequence, perceptual: &PerceptualConfig, tol: &CurvatureTolerances) -> Result<DomainCurvatures> {
    let d = seq.dims();
    if d.frames < 3 {
        return Err(Error::validation(format!("curvature needs at least 3 frames, got {}", d.frames)));
    }
    let pixel = Trajectory::new(Domain::Pixel, seq.frames().map(<[f64]>::to_vec).collect())?;
    let gray = seq.luma()?;
    let enc = PerceptualEncoder::new(perceptual, d.height, d.width)?;
    let retina = Trajectory::new(Domain::Retina, enc.retina_sequence(&gray)?)?;
    let (feats, _) = enc.encode_sequence(&gray)?;
    let v1 = Trajectory::new(Domain::V1, feats.into_iter().map(|f| f.values).collect())?;
    Ok(DomainCurvatures {
        pixel: trajectory_report(&pixel, tol)?,
        retina: trajectory_report(&retina, tol)?,
        v1: trajectory_report(&v1, tol)?,
    })
}

/// Fidelity of a restoration plus the curvature of the restored sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub psnr: f64,
    pub ssim: f64,
    pub curvature: Option<DomainCurvatures>,
}

impl MetricReport {
    pub const CSV_HEADER: &'static str = "psnr_db,ssim,pixel_curv_deg,retina_curv_deg,v1_curv_deg,delta_pixel_v1_deg";

    pub fn csv_row(&self) -> String {
        let f = |v: f64| if v.is_infinite() { "inf".to_string() } else { format!("{v:.6}") };
        let curv = match &self.curvature {
            Some(c) => format!("{},{},{},{}", f(c.pixel.mean_deg), f(c.retina.mean_deg), f(c.v1.mean_deg), f(c.delta())),
            None => "nan,nan,nan,nan".into(),
        };
        format!("{},{},{}", f(self.psnr), f(self.ssim), curv)
    }
}

/// PSNR, SSIM and, when defined, the curvature of `test`.
pub fn metric_report(
    reference: &FrameSequence,
    test: &FrameSequence,
    perceptual: &PerceptualConfig,
    tol: &CurvatureTolerances,
) -> Result<MetricReport> {
    let curvature = match curvature_report(test, perceptual, tol) {
        Ok(c) => Some(c),
        Err(Error::MetricUndefined(_)) => None,
        Err(Error::Validation(_)) if test.dims().frames < 3 => None,
        Err(e) => return Err(e),
    };
    Ok(MetricReport {
        psnr: psnr(reference, test, 1.0)?,
        ssim: ssim(reference, test)?,
        curvature,
    })
}
