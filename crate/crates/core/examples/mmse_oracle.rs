//! Closed-form Gaussian MMSE estimate and the 1/sqrt(K) convergence of sample averages.

use std::sync::Arc;

use vidrestore::degrade::{Task, TaskKind};
use vidrestore::diffusion::{GaussianAnalyticPrior, IdentityCodec, NoiseSchedule, Restorer, SolverConfig};
use vidrestore::mpes::{ensemble_deviation_slope, mmse_oracle_gaussian, posterior_sampler_slope, GaussianPosterior};
use vidrestore::seqio::{Dims, FrameSequence};

fn main() -> vidrestore::Result<()> {
    let dims = Dims::new(4, 8, 8, 1);
    let op = Task::new(TaskKind::Deblur).build(dims)?;
    let mu = FrameSequence::filled(dims, 0.5)?;
    let y = op.forward(&mu)?;
    let oracle = mmse_oracle_gaussian(&y, op.as_ref(), &mu, 0.05, 1e-3)?;
    println!("oracle deviation from prior mean: {:.2e}", oracle.max_abs_diff(&mu)?);

    let ks = [1, 2, 4, 8, 16];
    let posterior = GaussianPosterior::new(&y, op.as_ref(), &mu, 0.05, 1e-3)?;
    println!("exact posterior samples: slope {:.3}", posterior_sampler_slope(&posterior, &ks, 100, 1)?);

    let prior = Arc::new(GaussianAnalyticPrior::constant(64, 0.5, 0.05)?);
    let restorer = Restorer::new(y, op, prior, Arc::new(IdentityCodec::new(8, 8, 1)), NoiseSchedule::default())?;
    let slope = ensemble_deviation_slope(&restorer, &SolverConfig::default(), &oracle, &ks, 50, 1)?;
    println!("solver paths:            slope {slope:.3}");
    Ok(())
}
