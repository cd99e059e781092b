//! Trajectory curvature and perceptual straightening guidance.
//!
//! A video is a trajectory of per-frame vectors `P¹..Pᴺ`. Its curvature at an interior
//! frame is the angle between the displacements `Pⁿ − Pⁿ⁻¹` and `Pⁿ⁺¹ − Pⁿ`; the
//! trajectory curvature is the mean of those angles.

mod loss;
mod psg;

pub use loss::StraighteningLoss;
pub use psg::{psg_refine, psg_refine_traced, PsgConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seqio::{dot, norm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Pixel,
    Retina,
    V1,
}

impl Domain {
    pub fn name(&self) -> &'static str {
        match self {
            Domain::Pixel => "pixel",
            Domain::Retina => "retina",
            Domain::V1 => "v1",
        }
    }
}

/// Numerical guards for the angle computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureTolerances {
    /// Cosines with `|cos| ≥ 1 − eps_clamp` get a zero gradient.
    pub eps_clamp: f64,
    /// Displacements with norm `≤ eps_disp` are degenerate.
    pub eps_disp: f64,
}

impl Default for CurvatureTolerances {
    fn default() -> Self {
        CurvatureTolerances {
            eps_clamp: 1e-7,
            eps_disp: 1e-12,
        }
    }
}

/// `N ≥ 3` equally sized, finite points.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    domain: Domain,
    points: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(domain: Domain, points: Vec<Vec<f64>>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::validation(format!(
                "a trajectory needs at least 3 points, got {}",
                points.len()
            )));
        }
        let d = points[0].len();
        if d == 0 || points.iter().any(|p| p.len() != d) {
            return Err(Error::validation("trajectory points must share a positive dimension"));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::validation("trajectory points must be finite"));
        }
        Ok(Trajectory { domain, points })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }
}

/// `Vⁿ = Pⁿ − Pⁿ⁻¹` for `n = 2..N`; element `i` holds `V^{i+2}`.
pub fn displacements(traj: &Trajectory) -> Vec<Vec<f64>> {
    traj.points
        .windows(2)
        .map(|w| w[1].iter().zip(&w[0]).map(|(b, a)| b - a).collect())
        .collect()
}

/// Angle in radians between two displacements, or `None` when either is degenerate.
fn angle(a: &[f64], b: &[f64], tol: &CurvatureTolerances) -> Option<f64> {
    let (na, nb) = (norm(a), norm(b));
    if na <= tol.eps_disp || nb <= tol.eps_disp {
        return None;
    }
    Some(unit_angle(a, b, na, nb))
}

/// `arccos(⟨a,b⟩/‖a‖‖b‖)` evaluated as `2·atan2(‖â − b̂‖, ‖â + b̂‖)`, which stays accurate
/// near 0 and π where the cosine form loses half its digits.
fn unit_angle(a: &[f64], b: &[f64], na: f64, nb: f64) -> f64 {
    let (mut diff, mut sum) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (u, v) = (x / na, y / nb);
        diff += (u - v) * (u - v);
        sum += (u + v) * (u + v);
    }
    2.0 * diff.sqrt().atan2(sum.sqrt())
}

/// Curvature at frame `n` (1-based, `2 ≤ n ≤ N−1`) in degrees; `None` when degenerate.
pub fn curvature_at(traj: &Trajectory, n: usize, tol: &CurvatureTolerances) -> Result<Option<f64>> {
    if n < 2 || n + 1 > traj.len() {
        return Err(Error::validation(format!(
            "curvature index {n} outside 2..={}",
            traj.len() - 1
        )));
    }
    let p = &traj.points;
    let a: Vec<f64> = p[n - 1].iter().zip(&p[n - 2]).map(|(x, y)| x - y).collect();
    let b: Vec<f64> = p[n].iter().zip(&p[n - 1]).map(|(x, y)| x - y).collect();
    Ok(angle(&a, &b, tol).map(f64::to_degrees))
}

/// Per-frame angles and their mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureReport {
    pub domain: Domain,
    /// `(n, angle in degrees)` for every non-degenerate interior frame.
    pub angles: Vec<(usize, f64)>,
    pub mean_deg: f64,
    pub degenerate: usize,
}

pub fn trajectory_report(traj: &Trajectory, tol: &CurvatureTolerances) -> Result<CurvatureReport> {
    let v = displacements(traj);
    let mut angles = Vec::new();
    let mut degenerate = 0;
    for (i, pair) in v.windows(2).enumerate() {
        match angle(&pair[0], &pair[1], tol) {
            Some(a) => angles.push((i + 2, a.to_degrees())),
            None => degenerate += 1,
        }
    }
    if angles.is_empty() {
        return Err(Error::MetricUndefined(format!(
            "all {degenerate} interior frames of the {} trajectory are degenerate",
            traj.domain.name()
        )));
    }
    let mean_deg = angles.iter().map(|a| a.1).sum::<f64>() / angles.len() as f64;
    Ok(CurvatureReport {
        domain: traj.domain,
        angles,
        mean_deg,
        degenerate,
    })
}

/// Mean curvature in degrees over non-degenerate interior frames.
pub fn mean_curvature(traj: &Trajectory, tol: &CurvatureTolerances) -> Result<f64> {
    trajectory_report(traj, tol).map(|r| r.mean_deg)
}

/// Mean curvature in radians (0 when every frame is degenerate) and its gradient with
/// respect to every point.
pub(crate) fn mean_curvature_with_grad(points: &[Vec<f64>], tol: &CurvatureTolerances) -> (f64, Vec<Vec<f64>>) {
    let n = points.len();
    let d = points[0].len();
    let mut grads = vec![vec![0.0; d]; n];
    let disp: Vec<Vec<f64>> = points
        .windows(2)
        .map(|w| w[1].iter().zip(&w[0]).map(|(b, a)| b - a).collect())
        .collect();
    let mut terms = Vec::new();
    for (i, pair) in disp.windows(2).enumerate() {
        let (a, b) = (&pair[0], &pair[1]);
        let (na, nb) = (norm(a), norm(b));
        if na <= tol.eps_disp || nb <= tol.eps_disp {
            continue;
        }
        let u = dot(a, b) / (na * nb);
        let theta = unit_angle(a, b, na, nb);
        terms.push((i, theta, u, na, nb));
    }
    if terms.is_empty() {
        return (0.0, grads);
    }
    let m = terms.len() as f64;
    let loss = terms.iter().map(|t| t.1).sum::<f64>() / m;
    for &(i, _, u, na, nb) in &terms {
        if u.abs() >= 1.0 - tol.eps_clamp {
            continue;
        }
        // d acos(u) / du, scaled by the 1/M of the mean
        let g = -1.0 / ((1.0 - u * u).sqrt() * m);
        let (a, b) = (&disp[i], &disp[i + 1]);
        let inv = 1.0 / (na * nb);
        for j in 0..d {
            let du_da = b[j] * inv - u * a[j] / (na * na);
            let du_db = a[j] * inv - u * b[j] / (nb * nb);
            // a = P[i+1] − P[i], b = P[i+2] − P[i+1]
            grads[i][j] -= g * du_da;
            grads[i + 1][j] += g * (du_da - du_db);
            grads[i + 2][j] += g * du_db;
        }
    }
    (loss, grads)
}
