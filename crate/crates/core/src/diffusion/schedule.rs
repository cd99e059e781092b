use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Variance schedule with `ᾱ₀ = 1` and `ᾱ_t = Π_{s≤t}(1 − β_s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule {
    betas: Vec<f64>,
    alpha_bars: Vec<f64>,
}

/// Linearly spaced `β` over `steps` timesteps.
pub fn build_schedule(steps: usize, beta_min: f64, beta_max: f64) -> Result<NoiseSchedule> {
    if steps == 0 {
        return Err(Error::validation("schedule needs at least one step"));
    }
    if !(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0) {
        return Err(Error::validation(format!(
            "need 0 < beta_min <= beta_max < 1, got [{beta_min}, {beta_max}]"
        )));
    }
    let betas: Vec<f64> = (0..steps)
        .map(|i| {
            if steps == 1 {
                beta_min
            } else {
                beta_min + (beta_max - beta_min) * i as f64 / (steps - 1) as f64
            }
        })
        .collect();
    let mut alpha_bars = Vec::with_capacity(steps + 1);
    alpha_bars.push(1.0);
    for b in &betas {
        let prev = *alpha_bars.last().unwrap();
        alpha_bars.push(prev * (1.0 - b));
    }
    Ok(NoiseSchedule { betas, alpha_bars })
}

impl Default for NoiseSchedule {
    fn default() -> Self {
        build_schedule(50, 1e-4, 0.02).expect("default schedule is valid")
    }
}

impl NoiseSchedule {
    pub fn steps(&self) -> usize {
        self.betas.len()
    }

    /// `β_t` for `1 ≤ t ≤ steps`.
    pub fn beta(&self, t: usize) -> f64 {
        self.betas[t - 1]
    }

    /// `ᾱ_t` for `0 ≤ t ≤ steps`.
    pub fn alpha_bar(&self, t: usize) -> f64 {
        self.alpha_bars[t]
    }

    pub fn alpha_bars(&self) -> &[f64] {
        &self.alpha_bars
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_step() {
        let s = build_schedule(1, 0.1, 0.1).unwrap();
        assert_eq!(s.alpha_bar(0), 1.0);
        assert!((s.alpha_bar(1) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn cumulative_product_oracle() {
        let s = NoiseSchedule::default();
        let mut acc = 1.0;
        for t in 1..=50 {
            let beta = 1e-4 + (0.02 - 1e-4) * (t - 1) as f64 / 49.0;
            acc *= 1.0 - beta;
            assert!((s.alpha_bar(t) - acc).abs() < 1e-12);
            assert!(s.alpha_bar(t) < s.alpha_bar(t - 1));
        }
    }

    #[test]
    fn invalid_ranges() {
        assert!(build_schedule(10, 0.0, 0.1).is_err());
        assert!(build_schedule(10, 0.2, 0.1).is_err());
        assert!(build_schedule(10, 0.1, 1.0).is_err());
        assert!(build_schedule(0, 0.1, 0.2).is_err());
    }
}
