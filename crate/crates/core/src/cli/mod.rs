//! Command-line front end: `make-synthetic`, `degrade`, `restore`, `straightness`, `metrics`,
//! `convert` and `replay`. Every run writes a JSON manifest that `replay` can verify.

pub mod config;
pub mod manifest;
mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::degrade::{Task, TaskKind};
use crate::error::{Error, Result};
use crate::mpes::FusionSpace;
use crate::perceptual::PerceptualConfig;
use crate::seqio::{SyntheticKind, SyntheticSpec};
use crate::straightness::CurvatureTolerances;

pub use commands::{
    replay, straightness_csv, Artifacts, Convert, Degrade, Invocation, MakeSynthetic, Metrics, Restore, Straightness,
};
pub use config::RunConfig;
pub use manifest::Manifest;

#[derive(Debug, Parser)]
#[command(name = "vidrestore", version, about = "Video restoration with a perceptual straightness prior")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a deterministic synthetic video.
    MakeSynthetic(MakeSyntheticArgs),
    /// Apply a degradation operator to a video.
    Degrade(DegradeArgs),
    /// Restore a degraded video.
    #[command(after_long_help = restore_help())]
    Restore(RestoreArgs),
    /// Per-frame curvature in the pixel, retina and V1 domains.
    Straightness(StraightnessArgs),
    /// PSNR, SSIM and curvature of a test video against a reference.
    Metrics(MetricsArgs),
    /// Convert between VSEQ files and PNG directories.
    Convert(ConvertArgs),
    /// Re-run a manifest and verify its output hashes.
    Replay(ReplayArgs),
}

fn restore_help() -> String {
    config::documented_keys()
}

#[derive(Debug, Args)]
struct MakeSyntheticArgs {
    #[arg(long, default_value = "translating_texture")]
    kind: SyntheticKind,
    #[arg(long, default_value_t = 16)]
    frames: usize,
    #[arg(long, default_value_t = 32)]
    height: usize,
    #[arg(long, default_value_t = 32)]
    width: usize,
    #[arg(long, default_value_t = 1)]
    channels: usize,
    #[arg(long, default_value_t = 1.0)]
    speed: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write a PNG directory rather than a VSEQ file.
    #[arg(long)]
    png: bool,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct TaskArgs {
    #[arg(long)]
    task: Option<TaskKind>,
    #[arg(long)]
    scale: Option<usize>,
    #[arg(long)]
    blur_sigma: Option<f64>,
    /// Temporal averaging window (odd).
    #[arg(long)]
    window: Option<usize>,
}

impl TaskArgs {
    fn apply(&self, mut task: Task) -> Task {
        if let Some(k) = self.task {
            task.kind = k;
        }
        if let Some(s) = self.scale {
            task.scale = s;
        }
        if let Some(s) = self.blur_sigma {
            task.blur_sigma = s;
        }
        if self.window.is_some() {
            task.window = self.window;
        }
        task
    }
}

#[derive(Debug, Args)]
struct DegradeArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    task: TaskArgs,
}

#[derive(Debug, Args)]
struct RestoreArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. `solver.eta=0.5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(flatten)]
    task: TaskArgs,
    #[arg(long)]
    seed: Option<u64>,
    /// Enable perceptual straightness guidance.
    #[arg(long)]
    psg: bool,
    /// Number of sampling paths.
    #[arg(long)]
    ensemble: Option<usize>,
    #[arg(long)]
    fusion: Option<FusionSpace>,
    /// Data-consistency iterations after fusion.
    #[arg(long)]
    post_refine: Option<usize>,
    /// Also write each path's output.
    #[arg(long)]
    keep_paths: bool,
    /// Ground truth, for PSNR and SSIM in the path table.
    #[arg(long)]
    reference: Option<PathBuf>,
}

impl RestoreArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let base = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let mut cfg = base.with_overrides(&self.set)?;
        cfg.task = self.task.apply(cfg.task);
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.psg {
            cfg.psg.enabled = true;
        }
        if let Some(k) = self.ensemble {
            cfg.ensemble.paths = k;
        }
        if let Some(f) = self.fusion {
            cfg.ensemble.fusion = f;
        }
        if let Some(n) = self.post_refine {
            cfg.ensemble.post_refine = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct StraightnessArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// CSV destination; printed to stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    eps_clamp: Option<f64>,
    #[arg(long)]
    eps_disp: Option<f64>,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConvertArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// A `.vseq` path, or a directory for PNG frames.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
}

fn invocation(command: Command) -> Result<Option<Invocation>> {
    Ok(Some(match command {
        Command::MakeSynthetic(a) => Invocation::MakeSynthetic(MakeSynthetic {
            spec: SyntheticSpec::new(a.kind, a.frames, a.height, a.width, a.speed, a.seed).with_channels(a.channels),
            output: a.output,
            png: a.png,
        }),
        Command::Degrade(a) => Invocation::Degrade(Degrade {
            task: a.task.apply(Task::default()),
            input: a.input,
            output: a.output,
        }),
        Command::Restore(a) => Invocation::Restore(Restore {
            config: a.resolve()?,
            input: a.input,
            output: a.output,
            reference: a.reference,
            keep_paths: a.keep_paths,
        }),
        Command::Straightness(a) => {
            let mut tolerances = CurvatureTolerances::default();
            if let Some(e) = a.eps_clamp {
                tolerances.eps_clamp = e;
            }
            if let Some(e) = a.eps_disp {
                tolerances.eps_disp = e;
            }
            Invocation::Straightness(Straightness {
                input: a.input,
                output: a.output,
                perceptual: PerceptualConfig::default(),
                tolerances,
            })
        }
        Command::Metrics(a) => Invocation::Metrics(Metrics {
            reference: a.reference,
            test: a.test,
            output: a.output,
            perceptual: PerceptualConfig::default(),
        }),
        Command::Convert(a) => Invocation::Convert(Convert {
            input: a.input,
            output: a.output,
        }),
        Command::Replay(_) => return Ok(None),
    }))
}

fn dispatch(command: Command) -> Result<Artifacts> {
    if let Command::Replay(a) = &command {
        return replay(&a.manifest);
    }
    let inv = invocation(command)?.ok_or_else(|| Error::validation("nothing to run"))?;
    Ok(inv.execute()?.0)
}

/// Parses arguments, runs the command and returns the process exit code:
/// 0 on success, 1 for usage or validation errors, 2 for I/O errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(a) => {
            print!("{}", a.stdout);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
