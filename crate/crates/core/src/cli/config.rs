//! Run configuration: a TOML file whose sections mirror the library's config types.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::degrade::Task;
use crate::diffusion::{
    build_schedule, GaussianAnalyticPrior, IdentityCodec, LatentCodec, NoiseSchedule, OrthoCodec, Restorer, SolverConfig,
};
use crate::error::{Error, Result};
use crate::mpes::{EnsembleConfig, FusionSpace};
use crate::perceptual::PerceptualConfig;
use crate::seqio::FrameSequence;
use crate::straightness::PsgConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub steps: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    pub start_step: usize,
    pub eta: f64,
    pub cg_iterations: usize,
    pub lowpass_sigma: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverConfig::default();
        SolverSection {
            steps: 50,
            beta_min: 1e-4,
            beta_max: 0.02,
            start_step: s.start_step,
            eta: s.eta,
            cg_iterations: s.cg_iterations,
            lowpass_sigma: s.lowpass_sigma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsgSection {
    pub enabled: bool,
    pub iterations: usize,
    pub step_size: f64,
    pub decay: f64,
    pub decay_period: usize,
    pub eps_clamp: f64,
    pub eps_disp: f64,
}

impl Default for PsgSection {
    fn default() -> Self {
        let p = PsgConfig::default();
        PsgSection {
            enabled: false,
            iterations: p.iterations,
            step_size: p.step_size,
            decay: p.decay,
            decay_period: p.decay_period,
            eps_clamp: p.eps_clamp,
            eps_disp: p.eps_disp,
        }
    }
}

impl PsgSection {
    pub fn psg_config(&self) -> PsgConfig {
        PsgConfig {
            iterations: self.iterations,
            step_size: self.step_size,
            decay: self.decay,
            decay_period: self.decay_period,
            eps_clamp: self.eps_clamp,
            eps_disp: self.eps_disp,
        }
    }
}

/// Isotropic Gaussian prior centred on a constant image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorSection {
    pub mean: f64,
    pub variance: f64,
}

impl Default for PriorSection {
    fn default() -> Self {
        PriorSection { mean: 0.5, variance: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodecKind {
    #[default]
    Identity,
    Ortho,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodecSection {
    pub kind: CodecKind,
    /// Fraction of DCT coefficients kept by the `ortho` codec.
    pub keep: f64,
}

impl Default for CodecSection {
    fn default() -> Self {
        CodecSection {
            kind: CodecKind::Identity,
            keep: 1.0,
        }
    }
}

impl CodecSection {
    pub fn build(&self, height: usize, width: usize, channels: usize) -> Result<Arc<dyn LatentCodec>> {
        Ok(match self.kind {
            CodecKind::Identity => Arc::new(IdentityCodec::new(height, width, channels)),
            CodecKind::Ortho => Arc::new(OrthoCodec::new(height, width, channels, self.keep)?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSection {
    pub paths: usize,
    pub fusion: FusionSpace,
    /// CG iterations after fusion; 0 disables the pass.
    pub post_refine: usize,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        EnsembleSection {
            paths: 1,
            fusion: FusionSpace::Pixel,
            post_refine: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub task: Task,
    pub solver: SolverSection,
    pub prior: PriorSection,
    pub codec: CodecSection,
    pub perceptual: PerceptualConfig,
    pub psg: PsgSection,
    pub ensemble: EnsembleSection,
}

fn config_error(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(config_error)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(config_error)
    }

    /// Applies `section.key=value` overrides; values are parsed as TOML, falling back to a
    /// bare string.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let mut tree = toml::Table::try_from(self).map_err(config_error)?;
        for item in overrides {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override {item:?} is not key=value")))?;
            let value = parse_value(raw.trim());
            let mut parts: Vec<&str> = key.trim().split('.').collect();
            let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| Error::Config(format!("empty key in {item:?}")))?;
            let mut table = &mut tree;
            for p in parts {
                table = table
                    .entry(p)
                    .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                    .as_table_mut()
                    .ok_or_else(|| Error::Config(format!("{p} is not a section")))?;
            }
            table.insert(last.to_string(), value);
        }
        toml::Value::Table(tree).try_into().map_err(config_error)
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule()?;
        self.solver_config()?.validate(&self.schedule()?)?;
        self.perceptual.retina.validate()?;
        if self.ensemble.paths == 0 {
            return Err(Error::Config("ensemble.paths must be at least 1".into()));
        }
        if !(self.prior.variance > 0.0) {
            return Err(Error::Config("prior.variance must be positive".into()));
        }
        Ok(())
    }

    pub fn schedule(&self) -> Result<NoiseSchedule> {
        build_schedule(self.solver.steps, self.solver.beta_min, self.solver.beta_max)
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let psg = self.psg.enabled.then(|| self.psg.psg_config());
        if let Some(p) = &psg {
            p.validate()?;
        }
        Ok(SolverConfig {
            start_step: self.solver.start_step,
            eta: self.solver.eta,
            cg_iterations: self.solver.cg_iterations,
            lowpass_sigma: self.solver.lowpass_sigma,
            psg,
            seed: self.seed,
        })
    }

    pub fn ensemble_config(&self) -> EnsembleConfig {
        EnsembleConfig {
            paths: self.ensemble.paths,
            fusion: self.ensemble.fusion,
            post_refine: (self.ensemble.post_refine > 0).then_some(self.ensemble.post_refine),
            base_seed: self.seed,
        }
    }

    /// Prior whose mean is the encoding of a constant `prior.mean` frame.
    pub fn prior_for(&self, codec: &dyn LatentCodec) -> Result<GaussianAnalyticPrior> {
        let (h, w, c) = codec.frame_shape();
        let mean = codec.encode_frame(&vec![self.prior.mean; h * w * c]);
        GaussianAnalyticPrior::new(mean, self.prior.variance)
    }

    /// Builds the full restoration problem for measurements `y` of this config's task.
    pub fn restorer(&self, y: FrameSequence) -> Result<Restorer> {
        let signal = self.task.signal_dims(y.dims());
        let op = self.task.build(signal)?;
        let codec = self.codec.build(signal.height, signal.width, signal.channels)?;
        let prior = Arc::new(self.prior_for(codec.as_ref())?);
        Ok(Restorer::new(y, op, prior, codec, self.schedule()?)?.with_perceptual(self.perceptual))
    }
}

fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, String)>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            other => out.push((key, other.to_string())),
        }
    }
}

/// Every configuration key with its default, one `key = value` per line.
pub fn documented_keys() -> String {
    let tree = toml::Table::try_from(RunConfig::default()).expect("default config serializes");
    let mut keys = Vec::new();
    flatten("", &tree, &mut keys);
    let mut text = String::from("Configuration keys (TOML file via --config, or --set key=value):\n");
    for (k, v) in keys {
        text.push_str(&format!("  {k} = {v}\n"));
    }
    text.push_str("  task.window = (unset: 7 for sr_plus/deblur_plus, 13 for temporal_blur)\n");
    text
}
