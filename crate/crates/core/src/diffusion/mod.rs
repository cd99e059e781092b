//! The zero-shot restoration loop and its components.
//!
//! Each reverse step predicts noise with a pluggable prior, forms the Tweedie estimate of the
//! clean latent, decodes it, enforces data consistency with a few CG iterations, optionally
//! straightens the estimate, low-passes it, re-encodes it and re-noises with a mix of a fixed
//! per-trajectory draw and the predicted noise.

mod cg;
mod codec;
mod prior;
mod schedule;
mod solver;

pub use cg::{data_consistency, lowpass, CgResult};
pub use codec::{IdentityCodec, LatentCodec, LatentStack, OrthoCodec};
pub use prior::{
    gaussian_prior_predict_noise, renoise, renoise_coefficients, tweedie_denoise, DenoisingPrior, GaussianAnalyticPrior,
};
pub use schedule::{build_schedule, NoiseSchedule};
pub use solver::{
    ddim_invert, ddim_invert_init, ddim_reverse, measurement_lift, solve, Restorer, SolveOutput, SolverConfig, StepLog,
    LIFT_ITERATIONS,
};
