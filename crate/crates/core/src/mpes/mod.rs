//! Multi-path ensemble sampling.
//!
//! `K` independently seeded trajectories are fused by uniform averaging, either of their
//! pixels or of their final latents (decoded once). For a Gaussian prior and a linear
//! operator the exact posterior mean is available, which makes the `O(1/√K)` deviation
//! of the fused estimate measurable.

mod ensemble;
mod oracle;

pub use ensemble::{
    fuse, fuse_latent, fuse_pixel, path_seed, post_fusion_refine, run_ensemble, run_paths, EnsembleConfig,
    EnsembleOutput, FusionSpace, PathResult, SEED_MIX_GAMMA,
};
pub use oracle::{
    deviation_curve, dense_matrix, ensemble_deviation_slope, log_log_slope, mmse_oracle_gaussian,
    posterior_sampler_slope, GaussianPosterior,
};
