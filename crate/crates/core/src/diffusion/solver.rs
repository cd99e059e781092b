use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::degrade::Degradation;
use crate::error::{Error, Result};
use crate::perceptual::{PerceptualConfig, PerceptualEncoder};
use crate::seqio::{norm, FrameSequence};
use crate::straightness::{psg_refine, PsgConfig, StraighteningLoss};

use super::{data_consistency, lowpass, renoise, tweedie_denoise, DenoisingPrior, LatentCodec, LatentStack, NoiseSchedule};

/// CG iterations used to lift measurements onto the signal grid when `A` changes shape.
pub const LIFT_ITERATIONS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// First reverse step `τ`.
    pub start_step: usize,
    pub eta: f64,
    /// Data-consistency CG iterations per step.
    pub cg_iterations: usize,
    pub lowpass_sigma: f64,
    /// Straightening guidance applied after data consistency, if set.
    pub psg: Option<PsgConfig>,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            start_step: 35,
            eta: 0.8,
            cg_iterations: 5,
            lowpass_sigma: 0.5,
            psg: None,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, schedule: &NoiseSchedule) -> Result<()> {
        if self.start_step > schedule.steps() {
            return Err(Error::validation(format!(
                "start step {} exceeds the {}-step schedule",
                self.start_step,
                schedule.steps()
            )));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::validation(format!("eta must lie in [0, 1], got {}", self.eta)));
        }
        if !(self.lowpass_sigma >= 0.0 && self.lowpass_sigma.is_finite()) {
            return Err(Error::validation(format!("low-pass sigma must be >= 0, got {}", self.lowpass_sigma)));
        }
        if let Some(p) = &self.psg {
            p.validate()?;
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        SolverConfig { seed, ..self.clone() }
    }
}

/// One reverse step of the sampling loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepLog {
    pub step: usize,
    /// `‖Y − A X̄₀‖` after data consistency.
    pub residual: f64,
    /// Straightening penalty after guidance, when enabled.
    pub ps_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutput {
    pub pixels: FrameSequence,
    pub latent: LatentStack,
    pub log: Vec<StepLog>,
    pub seed: u64,
}

/// Measurements lifted onto the signal grid: `Y` itself when `A` preserves shape, otherwise
/// a least-squares estimate from CG started at zero.
pub fn measurement_lift(y: &FrameSequence, op: &Degradation) -> Result<FrameSequence> {
    if op.input_dims() == op.output_dims() {
        return Ok(y.clone());
    }
    let zero = FrameSequence::zeros(op.input_dims())?;
    Ok(data_consistency(&zero, y, op.as_ref(), LIFT_ITERATIONS)?.estimate)
}

/// Deterministic DDIM inversion of a clean latent from `t = 0` to `tau`.
///
/// Each step solves for the `z_t` whose deterministic reverse step lands exactly on the
/// current latent, by fixed-point iteration.
pub fn ddim_invert(z0: &[f64], prior: &dyn DenoisingPrior, schedule: &NoiseSchedule, tau: usize) -> Result<Vec<f64>> {
    if tau > schedule.steps() {
        return Err(Error::validation(format!("tau {tau} exceeds schedule length {}", schedule.steps())));
    }
    let mut z = z0.to_vec();
    for t in 1..=tau {
        let (ab, ab_prev) = (schedule.alpha_bar(t), schedule.alpha_bar(t - 1));
        let step = |eps: &[f64]| -> Vec<f64> {
            z.iter()
                .zip(eps)
                .map(|(zp, e)| ab.sqrt() * (zp - (1.0 - ab_prev).sqrt() * e) / ab_prev.sqrt() + (1.0 - ab).sqrt() * e)
                .collect()
        };
        let mut guess = step(&prior.predict_noise(&z, t, schedule)?);
        for _ in 0..200 {
            let next = step(&prior.predict_noise(&guess, t, schedule)?);
            let change = next.iter().zip(&guess).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let scale = 1.0 + next.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            guess = next;
            if change <= 1e-14 * scale {
                break;
            }
        }
        z = guess;
    }
    Ok(z)
}

/// Deterministic reverse DDIM from `tau` to 0 without data consistency.
pub fn ddim_reverse(z_tau: &[f64], prior: &dyn DenoisingPrior, schedule: &NoiseSchedule, tau: usize) -> Result<Vec<f64>> {
    let mut z = z_tau.to_vec();
    for t in (1..=tau).rev() {
        let eps = prior.predict_noise(&z, t, schedule)?;
        let z0 = tweedie_denoise(&z, &eps, schedule.alpha_bar(t))?;
        z = renoise(&z0, schedule.alpha_bar(t - 1), 0.0, &eps, &eps)?;
    }
    Ok(z)
}

/// Inverts the latent of the first lifted measurement frame to `tau` and repeats it for
/// every frame.
pub fn ddim_invert_init(
    y: &FrameSequence,
    op: &Degradation,
    codec: &dyn LatentCodec,
    prior: &dyn DenoisingPrior,
    schedule: &NoiseSchedule,
    tau: usize,
) -> Result<LatentStack> {
    let lifted = measurement_lift(y, op)?;
    let z0 = codec.encode_frame(lifted.frame(0));
    let z = ddim_invert(&z0, prior, schedule, tau)?;
    LatentStack::repeated(&z, lifted.dims().frames)
}

/// Everything a restoration run needs besides its configuration.
#[derive(Debug, Clone)]
pub struct Restorer {
    measurements: FrameSequence,
    operator: Degradation,
    prior: Arc<dyn DenoisingPrior>,
    codec: Arc<dyn LatentCodec>,
    schedule: NoiseSchedule,
    perceptual: PerceptualConfig,
}

impl Restorer {
    pub fn new(
        measurements: FrameSequence,
        operator: Degradation,
        prior: Arc<dyn DenoisingPrior>,
        codec: Arc<dyn LatentCodec>,
        schedule: NoiseSchedule,
    ) -> Result<Self> {
        if measurements.dims() != operator.output_dims() {
            return Err(Error::validation(format!(
                "measurements are {} but the operator produces {}",
                measurements.dims(),
                operator.output_dims()
            )));
        }
        let x = operator.input_dims();
        if codec.frame_shape() != (x.height, x.width, x.channels) {
            return Err(Error::validation(format!("codec frame shape does not match the signal {x}")));
        }
        if prior.latent_dim() != codec.latent_dim() {
            return Err(Error::validation(format!(
                "prior works on {}-dim latents, codec produces {}",
                prior.latent_dim(),
                codec.latent_dim()
            )));
        }
        Ok(Restorer {
            measurements,
            operator,
            prior,
            codec,
            schedule,
            perceptual: PerceptualConfig::default(),
        })
    }

    /// Perceptual encoder settings used by straightening guidance.
    pub fn with_perceptual(mut self, perceptual: PerceptualConfig) -> Self {
        self.perceptual = perceptual;
        self
    }

    pub fn measurements(&self) -> &FrameSequence {
        &self.measurements
    }

    pub fn operator(&self) -> &Degradation {
        &self.operator
    }

    pub fn prior(&self) -> &dyn DenoisingPrior {
        self.prior.as_ref()
    }

    pub fn codec(&self) -> &dyn LatentCodec {
        self.codec.as_ref()
    }

    pub fn schedule(&self) -> &NoiseSchedule {
        &self.schedule
    }

    pub fn perceptual(&self) -> &PerceptualConfig {
        &self.perceptual
    }

    fn guidance(&self, psg: &PsgConfig) -> Result<StraighteningLoss> {
        let d = self.operator.input_dims();
        let enc = PerceptualEncoder::new(&self.perceptual, d.height, d.width)?;
        Ok(StraighteningLoss::new(enc, psg.tolerances()))
    }

    fn consistent(&self, x: &FrameSequence, iterations: usize) -> Result<(FrameSequence, f64)> {
        let r = data_consistency(x, &self.measurements, self.operator.as_ref(), iterations)?;
        let res = r.final_residual();
        Ok((r.estimate, res))
    }

    /// Runs one seeded sampling trajectory.
    pub fn solve(&self, cfg: &SolverConfig) -> Result<SolveOutput> {
        cfg.validate(&self.schedule)?;
        let guidance = cfg.psg.as_ref().map(|p| self.guidance(p).map(|g| (p, g))).transpose()?;
        let codec = self.codec.as_ref();
        let tau = cfg.start_step;
        let mut z = ddim_invert_init(&self.measurements, &self.operator, codec, self.prior.as_ref(), &self.schedule, tau)?;

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let eps_fixed: Vec<f64> = (0..codec.latent_dim()).map(|_| StandardNormal.sample(&mut rng)).collect();

        let mut log = Vec::with_capacity(tau);
        for t in (1..=tau).rev() {
            let ab = self.schedule.alpha_bar(t);
            let ab_prev = self.schedule.alpha_bar(t - 1);
            let mut eps_hat = Vec::with_capacity(z.frames());
            let mut z0 = Vec::with_capacity(z.frames());
            for zf in z.iter() {
                let e = self.prior.predict_noise(zf, t, &self.schedule)?;
                z0.push(tweedie_denoise(zf, &e, ab)?);
                eps_hat.push(e);
            }
            let x0 = codec.decode(&LatentStack::from_frames(z0)?)?;
            let (mut x0, residual) = self.consistent(&x0, cfg.cg_iterations)?;
            let mut ps_loss = None;
            if let Some((p, g)) = &guidance {
                x0 = psg_refine(&x0, p, g)?;
                ps_loss = Some(g.loss(&x0)?);
            }
            let x0 = lowpass(&x0, cfg.lowpass_sigma)?;
            let z0bar = codec.encode(&x0)?;
            let next: Vec<Vec<f64>> = z0bar
                .iter()
                .zip(&eps_hat)
                .map(|(zf, e)| renoise(zf, ab_prev, cfg.eta, &eps_fixed, e))
                .collect::<Result<_>>()?;
            z = LatentStack::from_frames(next)?;
            log.push(StepLog { step: t, residual, ps_loss });
        }
        let (pixels, _) = self.consistent(&codec.decode(&z)?, cfg.cg_iterations)?;
        let latent = codec.encode(&pixels)?;
        Ok(SolveOutput {
            pixels,
            latent,
            log,
            seed: cfg.seed,
        })
    }

    /// `‖Y − A X‖`.
    pub fn residual(&self, x: &FrameSequence) -> Result<f64> {
        let ax = self.operator.forward(x)?;
        let diff: Vec<f64> = self.measurements.data().iter().zip(ax.data()).map(|(a, b)| a - b).collect();
        Ok(norm(&diff))
    }
}

pub fn solve(restorer: &Restorer, cfg: &SolverConfig) -> Result<SolveOutput> {
    restorer.solve(cfg)
}
