use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degrade::LinearOp;
use crate::diffusion::{data_consistency, LatentCodec, LatentStack, Restorer, SolverConfig, StepLog};
use crate::error::{Error, Result};
use crate::seqio::FrameSequence;

/// Increment of the splitmix64 generator.
pub const SEED_MIX_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(SEED_MIX_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of path `k`: `splitmix64(base ^ k)`.
pub fn path_seed(base: u64, k: usize) -> u64 {
    splitmix64(base ^ k as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionSpace {
    #[default]
    Pixel,
    Latent,
}

impl fmt::Display for FusionSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FusionSpace::Pixel => "pixel",
            FusionSpace::Latent => "latent",
        })
    }
}

impl FromStr for FusionSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pixel" => Ok(FusionSpace::Pixel),
            "latent" => Ok(FusionSpace::Latent),
            _ => Err(Error::validation(format!("unknown fusion space {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub paths: usize,
    pub fusion: FusionSpace,
    /// CG iterations of a data-consistency pass on the fused estimate.
    pub post_refine: Option<usize>,
    pub base_seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            paths: 1,
            fusion: FusionSpace::Pixel,
            post_refine: None,
            base_seed: 0,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::validation("an ensemble needs at least one path"));
        }
        Ok(())
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.paths).map(|k| path_seed(self.base_seed, k)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub pixels: FrameSequence,
    pub latent: LatentStack,
    pub seed: u64,
    pub log: Vec<StepLog>,
}

/// Runs the `K` paths in parallel; results are in path order.
pub fn run_paths(restorer: &Restorer, solver: &SolverConfig, ens: &EnsembleConfig) -> Result<Vec<PathResult>> {
    ens.validate()?;
    ens.seeds()
        .into_par_iter()
        .map(|seed| {
            restorer.solve(&solver.with_seed(seed)).map(|o| PathResult {
                pixels: o.pixels,
                latent: o.latent,
                seed,
                log: o.log,
            })
        })
        .collect()
}

fn mean_of<'a>(items: impl ExactSizeIterator<Item = &'a [f64]>) -> Result<Vec<f64>> {
    let mut acc: Option<Vec<f64>> = None;
    for (k, x) in items.enumerate() {
        match acc.as_mut() {
            None => acc = Some(x.to_vec()),
            Some(m) => {
                if m.len() != x.len() {
                    return Err(Error::validation("fused items differ in size"));
                }
                // running mean, so identical inputs fuse to themselves exactly
                let w = 1.0 / (k + 1) as f64;
                for (m, v) in m.iter_mut().zip(x) {
                    *m += (v - *m) * w;
                }
            }
        }
    }
    acc.ok_or_else(|| Error::validation("nothing to fuse"))
}

/// Elementwise mean of the paths' pixels.
pub fn fuse_pixel(results: &[PathResult]) -> Result<FrameSequence> {
    let first = results.first().ok_or_else(|| Error::validation("nothing to fuse"))?;
    for r in results {
        first.pixels.check_same_dims(&r.pixels)?;
    }
    let mean = mean_of(results.iter().map(|r| r.pixels.data()))?;
    first.pixels.with_data(mean)
}

/// Mean of the paths' final latents, decoded once.
pub fn fuse_latent(results: &[PathResult], codec: &dyn LatentCodec) -> Result<FrameSequence> {
    let first = results.first().ok_or_else(|| Error::validation("nothing to fuse"))?;
    if results.iter().any(|r| r.latent.dim() != first.latent.dim() || r.latent.frames() != first.latent.frames()) {
        return Err(Error::validation("path latents differ in shape"));
    }
    let mean = mean_of(results.iter().map(|r| r.latent.data()))?;
    codec.decode(&LatentStack::new(first.latent.dim(), mean)?)
}

pub fn fuse(results: &[PathResult], space: FusionSpace, codec: &dyn LatentCodec) -> Result<FrameSequence> {
    match space {
        FusionSpace::Pixel => fuse_pixel(results),
        FusionSpace::Latent => fuse_latent(results, codec),
    }
}

/// One data-consistency pass on the fused estimate.
pub fn post_fusion_refine(fused: &FrameSequence, y: &FrameSequence, op: &dyn LinearOp, iterations: usize) -> Result<FrameSequence> {
    Ok(data_consistency(fused, y, op, iterations)?.estimate)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleOutput {
    pub paths: Vec<PathResult>,
    pub fused: FrameSequence,
}

/// Runs, fuses and optionally refines.
pub fn run_ensemble(restorer: &Restorer, solver: &SolverConfig, ens: &EnsembleConfig) -> Result<EnsembleOutput> {
    let paths = run_paths(restorer, solver, ens)?;
    let mut fused = fuse(&paths, ens.fusion, restorer.codec())?;
    if let Some(n) = ens.post_refine {
        fused = post_fusion_refine(&fused, restorer.measurements(), restorer.operator().as_ref(), n)?;
    }
    Ok(EnsembleOutput { paths, fused })
}
