use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::degrade::{LinearOp, MatrixOperator};
use crate::diffusion::{Restorer, SolverConfig};
use crate::error::{Error, Result};
use crate::seqio::{norm, FrameSequence};

use super::{path_seed, run_paths, EnsembleConfig};

/// `A` as an explicit `m×n` matrix, built column by column from basis vectors.
pub fn dense_matrix(op: &dyn LinearOp) -> Result<DMatrix<f64>> {
    let m = MatrixOperator::from_op(op)?;
    let (rows, cols) = (op.output_dims().len(), op.input_dims().len());
    Ok(DMatrix::from_row_slice(rows, cols, m.matrix()))
}

fn check_problem(y: &FrameSequence, op: &dyn LinearOp, mean: &FrameSequence, var0: f64, var_n: f64) -> Result<()> {
    if y.dims() != op.output_dims() || mean.dims() != op.input_dims() {
        return Err(Error::validation("oracle inputs do not match the operator"));
    }
    if !(var0 >= 0.0 && var_n >= 0.0 && var0.is_finite() && var_n.is_finite()) {
        return Err(Error::validation("oracle variances must be finite and >= 0"));
    }
    Ok(())
}

/// Pieces shared by the posterior mean and covariance.
struct Conditioning {
    a: DMatrix<f64>,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    mean: DVector<f64>,
}

fn condition(y: &FrameSequence, op: &dyn LinearOp, mean: &FrameSequence, var0: f64, var_n: f64) -> Result<Conditioning> {
    check_problem(y, op, mean, var0, var_n)?;
    let a = dense_matrix(op)?;
    let m = a.nrows();
    let s = &a * a.transpose() * var0 + DMatrix::identity(m, m) * var_n;
    let singular = || Error::validation("measurement covariance is singular; use a positive noise variance");
    let chol = s.cholesky().ok_or_else(singular)?;
    // exact rank deficiency can survive factorization as a pivot of order sqrt(eps)
    let diag = chol.l_dirty().diagonal();
    if diag.min() <= 1e-7 * diag.max() {
        return Err(singular());
    }
    let mu = DVector::from_column_slice(mean.data());
    let resid = DVector::from_column_slice(y.data()) - &a * &mu;
    let post = &mu + a.transpose() * chol.solve(&resid) * var0;
    Ok(Conditioning { a, chol, mean: post })
}

/// Posterior mean `μ + σ₀²Aᵀ(σ₀²AAᵀ + σₙ²I)⁻¹(Y − Aμ)` under `X ~ N(μ, σ₀²I)`.
pub fn mmse_oracle_gaussian(y: &FrameSequence, op: &dyn LinearOp, mean: &FrameSequence, var0: f64, var_n: f64) -> Result<FrameSequence> {
    let c = condition(y, op, mean, var0, var_n)?;
    mean.with_data(c.mean.as_slice().to_vec())
}

/// Exact Gaussian posterior of `X` given `Y = AX + n`.
#[derive(Debug, Clone)]
pub struct GaussianPosterior {
    mean: FrameSequence,
    sqrt_cov: DMatrix<f64>,
}

impl GaussianPosterior {
    pub fn new(y: &FrameSequence, op: &dyn LinearOp, prior_mean: &FrameSequence, var0: f64, var_n: f64) -> Result<Self> {
        let c = condition(y, op, prior_mean, var0, var_n)?;
        let n = c.a.ncols();
        let gain = c.chol.solve(&c.a);
        let mut cov = DMatrix::identity(n, n) * var0 - c.a.transpose() * gain * (var0 * var0);
        cov = (&cov + cov.transpose()) * 0.5;
        let eig = cov.symmetric_eigen();
        let root = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
        let sqrt_cov = &eig.eigenvectors * root * eig.eigenvectors.transpose();
        Ok(GaussianPosterior {
            mean: prior_mean.with_data(c.mean.as_slice().to_vec())?,
            sqrt_cov,
        })
    }

    pub fn mean(&self) -> &FrameSequence {
        &self.mean
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Result<FrameSequence> {
        let n = self.sqrt_cov.ncols();
        let xi = DVector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(rng)));
        let d = &self.sqrt_cov * xi;
        let data = self.mean.data().iter().zip(d.iter()).map(|(m, v)| m + v).collect();
        self.mean.with_data(data)
    }
}

/// Least-squares slope of `log dev` against `log K`.
pub fn log_log_slope(ks: &[usize], devs: &[f64]) -> Result<f64> {
    if ks.len() < 2 || ks.len() != devs.len() || devs.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::validation("slope needs >= 2 points with positive deviations"));
    }
    let xs: Vec<f64> = ks.iter().map(|&k| (k as f64).ln()).collect();
    let ys: Vec<f64> = devs.iter().map(|d| d.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::validation("slope needs at least two distinct K"));
    }
    Ok(sxy / sxx)
}

/// Trial-averaged `‖mean of first K samples − oracle‖` for each `K` in `ks`.
///
/// `draw(trial)` must return at least `max(ks)` samples.
pub fn deviation_curve<F>(ks: &[usize], trials: usize, oracle: &FrameSequence, mut draw: F) -> Result<Vec<f64>>
where
    F: FnMut(usize) -> Result<Vec<FrameSequence>>,
{
    let kmax = ks.iter().copied().max().unwrap_or(0);
    if kmax == 0 || trials == 0 {
        return Err(Error::validation("need K >= 1 and at least one trial"));
    }
    let mut sums = vec![0.0; ks.len()];
    for trial in 0..trials {
        let samples = draw(trial)?;
        if samples.len() < kmax {
            return Err(Error::validation(format!("trial produced {} samples, need {kmax}", samples.len())));
        }
        for (slot, &k) in ks.iter().enumerate() {
            let mut acc = vec![0.0; oracle.data().len()];
            for s in &samples[..k] {
                oracle.check_same_dims(s)?;
                for (a, v) in acc.iter_mut().zip(s.data()) {
                    *a += v;
                }
            }
            let diff: Vec<f64> = acc.iter().zip(oracle.data()).map(|(a, o)| a / k as f64 - o).collect();
            sums[slot] += norm(&diff);
        }
    }
    Ok(sums.into_iter().map(|s| s / trials as f64).collect())
}

/// Deviation slope of fused solver paths from the oracle.
pub fn ensemble_deviation_slope(
    restorer: &Restorer,
    solver: &SolverConfig,
    oracle: &FrameSequence,
    ks: &[usize],
    trials: usize,
    base_seed: u64,
) -> Result<f64> {
    let kmax = ks.iter().copied().max().unwrap_or(0);
    let devs = deviation_curve(ks, trials, oracle, |trial| {
        let ens = EnsembleConfig {
            paths: kmax,
            base_seed: path_seed(base_seed, trial),
            ..Default::default()
        };
        Ok(run_paths(restorer, solver, &ens)?.into_iter().map(|p| p.pixels).collect())
    })?;
    log_log_slope(ks, &devs)
}

/// The same slope with exact posterior samples in place of solver paths.
pub fn posterior_sampler_slope(posterior: &GaussianPosterior, ks: &[usize], trials: usize, seed: u64) -> Result<f64> {
    let kmax = ks.iter().copied().max().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let devs = deviation_curve(ks, trials, posterior.mean(), |_| (0..kmax).map(|_| posterior.sample(&mut rng)).collect())?;
    log_log_slope(ks, &devs)
}
