//! Command implementations. Each resolved invocation is serializable so a manifest can
//! replay it exactly.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::degrade::Task;
use crate::error::{Error, Result};
use crate::metrics::{curvature_report, metric_report, psnr, ssim, MetricReport, SSIM_WINDOW};
use crate::mpes::run_ensemble;
use crate::perceptual::PerceptualConfig;
use crate::seqio::{export_png_dir, import_png_dir, make_synthetic, read_vseq, write_vseq, FrameSequence, SyntheticSpec};
use crate::straightness::CurvatureTolerances;

use super::config::RunConfig;
use super::manifest::Manifest;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MakeSynthetic {
    pub spec: SyntheticSpec,
    pub output: PathBuf,
    /// Write a PNG directory instead of a VSEQ file.
    pub png: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Degrade {
    pub input: PathBuf,
    pub output: PathBuf,
    pub task: Task,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Restore {
    pub input: PathBuf,
    pub output: PathBuf,
    pub reference: Option<PathBuf>,
    pub keep_paths: bool,
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Straightness {
    pub input: PathBuf,
    pub output: Option<PathBuf>,
    pub perceptual: PerceptualConfig,
    pub tolerances: CurvatureTolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub reference: PathBuf,
    pub test: PathBuf,
    pub output: Option<PathBuf>,
    pub perceptual: PerceptualConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Convert {
    pub input: PathBuf,
    pub output: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Invocation {
    MakeSynthetic(MakeSynthetic),
    Degrade(Degrade),
    Restore(Restore),
    Straightness(Straightness),
    Metrics(Metrics),
    Convert(Convert),
}

/// What a command read and wrote.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    /// Text for standard output.
    pub stdout: String,
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_stem().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

fn manifest_path(inv: &Invocation) -> PathBuf {
    match inv {
        Invocation::MakeSynthetic(c) if c.png => c.output.join("manifest.json"),
        Invocation::MakeSynthetic(MakeSynthetic { output, .. })
        | Invocation::Degrade(Degrade { output, .. })
        | Invocation::Restore(Restore { output, .. }) => sibling(output, ".manifest.json"),
        Invocation::Convert(c) if c.output.is_dir() || c.output.extension().is_none() => c.output.join("manifest.json"),
        Invocation::Convert(c) => sibling(&c.output, ".manifest.json"),
        Invocation::Straightness(c) => match &c.output {
            Some(o) => sibling(o, ".manifest.json"),
            None => sibling(&c.input, ".straightness.manifest.json"),
        },
        Invocation::Metrics(c) => match &c.output {
            Some(o) => sibling(o, ".manifest.json"),
            None => sibling(&c.test, ".metrics.manifest.json"),
        },
    }
}

fn read_any(path: &Path) -> Result<FrameSequence> {
    if path.is_dir() {
        import_png_dir(path)
    } else {
        read_vseq(path)
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(p) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(p)?;
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    ensure_parent(path)?;
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| if v.is_infinite() { "inf".into() } else { format!("{v:.9}") }).unwrap_or_default()
}

impl Invocation {
    pub fn name(&self) -> &'static str {
        match self {
            Invocation::MakeSynthetic(_) => "make-synthetic",
            Invocation::Degrade(_) => "degrade",
            Invocation::Restore(_) => "restore",
            Invocation::Straightness(_) => "straightness",
            Invocation::Metrics(_) => "metrics",
            Invocation::Convert(_) => "convert",
        }
    }

    /// Runs the command and writes its manifest; returns the manifest too.
    pub fn execute(&self) -> Result<(Artifacts, Manifest)> {
        let artifacts = match self {
            Invocation::MakeSynthetic(c) => make_synthetic_cmd(c)?,
            Invocation::Degrade(c) => degrade_cmd(c)?,
            Invocation::Restore(c) => restore_cmd(c)?,
            Invocation::Straightness(c) => straightness_cmd(c)?,
            Invocation::Metrics(c) => metrics_cmd(c)?,
            Invocation::Convert(c) => convert_cmd(c)?,
        };
        let manifest = Manifest::new(self.clone(), &artifacts.inputs, &artifacts.outputs)?;
        let path = manifest_path(self);
        ensure_parent(&path)?;
        manifest.write(&path)?;
        Ok((artifacts, manifest))
    }
}

fn make_synthetic_cmd(c: &MakeSynthetic) -> Result<Artifacts> {
    let seq = make_synthetic(&c.spec)?;
    if c.png {
        export_png_dir(&seq, &c.output)?;
    } else {
        ensure_parent(&c.output)?;
        write_vseq(&seq, &c.output)?;
    }
    Ok(Artifacts {
        outputs: vec![c.output.clone()],
        ..Default::default()
    })
}

fn degrade_cmd(c: &Degrade) -> Result<Artifacts> {
    let x = read_any(&c.input)?;
    let op = c.task.build(x.dims())?;
    let y = op.forward(&x)?;
    ensure_parent(&c.output)?;
    write_vseq(&y, &c.output)?;
    Ok(Artifacts {
        inputs: vec![c.input.clone()],
        outputs: vec![c.output.clone()],
        stdout: format!("{} {} -> {}\n", op.describe(), x.dims(), y.dims()),
    })
}

fn restore_cmd(c: &Restore) -> Result<Artifacts> {
    let cfg = &c.config;
    cfg.validate()?;
    let y = read_any(&c.input)?;
    let restorer = cfg.restorer(y)?;
    let out = run_ensemble(&restorer, &cfg.solver_config()?, &cfg.ensemble_config())?;

    let mut inputs = vec![c.input.clone()];
    let reference = match &c.reference {
        Some(p) => {
            inputs.push(p.clone());
            let r = read_any(p)?;
            r.check_same_dims(&out.fused)?;
            Some(r)
        }
        None => None,
    };

    ensure_parent(&c.output)?;
    write_vseq(&out.fused, &c.output)?;
    let mut outputs = vec![c.output.clone()];
    if c.keep_paths {
        for (k, p) in out.paths.iter().enumerate() {
            let path = sibling(&c.output, &format!(".path{k}.vseq"));
            write_vseq(&p.pixels, &path)?;
            outputs.push(path);
        }
    }

    let mut steps = String::from("path,seed,step,residual,ps_loss\n");
    for (k, p) in out.paths.iter().enumerate() {
        for s in &p.log {
            writeln!(steps, "{k},{},{},{:.9e},{}", p.seed, s.step, s.residual, fmt_opt(s.ps_loss)).unwrap();
        }
    }
    let steps_path = sibling(&c.output, ".steps.csv");
    write_text(&steps_path, &steps)?;
    outputs.push(steps_path);

    let quality = |x: &FrameSequence| -> Result<(Option<f64>, Option<f64>)> {
        match &reference {
            None => Ok((None, None)),
            Some(r) => {
                let d = r.dims();
                let s = if d.height >= SSIM_WINDOW && d.width >= SSIM_WINDOW { Some(ssim(r, x)?) } else { None };
                Ok((Some(psnr(r, x, 1.0)?), s))
            }
        }
    };
    let mut table = String::from("path,seed,residual,psnr_db,ssim\n");
    for (k, p) in out.paths.iter().enumerate() {
        let (ps, ss) = quality(&p.pixels)?;
        writeln!(table, "{k},{},{:.9e},{},{}", p.seed, restorer.residual(&p.pixels)?, fmt_opt(ps), fmt_opt(ss)).unwrap();
    }
    let (ps, ss) = quality(&out.fused)?;
    writeln!(table, "fused,,{:.9e},{},{}", restorer.residual(&out.fused)?, fmt_opt(ps), fmt_opt(ss)).unwrap();
    let table_path = sibling(&c.output, ".paths.csv");
    write_text(&table_path, &table)?;
    outputs.push(table_path);

    Ok(Artifacts {
        inputs,
        outputs,
        stdout: table,
    })
}

/// CSV with one row per retained frame and per-domain summary rows.
pub fn straightness_csv(seq: &FrameSequence, perceptual: &PerceptualConfig, tol: &CurvatureTolerances) -> Result<String> {
    let report = curvature_report(seq, perceptual, tol)?;
    let mut csv = String::from("domain,frame_index,angle_deg\n");
    for r in report.reports() {
        for (n, a) in &r.angles {
            writeln!(csv, "{},{n},{a:.9}", r.domain.name()).unwrap();
        }
    }
    for r in report.reports() {
        writeln!(csv, "{},mean,{:.9}", r.domain.name(), r.mean_deg).unwrap();
        writeln!(csv, "{},degenerate,{}", r.domain.name(), r.degenerate).unwrap();
    }
    writeln!(csv, "delta_pixel_v1,mean,{:.9}", report.delta()).unwrap();
    Ok(csv)
}

fn straightness_cmd(c: &Straightness) -> Result<Artifacts> {
    let seq = read_any(&c.input)?;
    let csv = straightness_csv(&seq, &c.perceptual, &c.tolerances)?;
    let mut outputs = Vec::new();
    if let Some(o) = &c.output {
        write_text(o, &csv)?;
        outputs.push(o.clone());
    }
    Ok(Artifacts {
        inputs: vec![c.input.clone()],
        outputs,
        stdout: csv,
    })
}

fn metrics_cmd(c: &Metrics) -> Result<Artifacts> {
    let r = read_any(&c.reference)?;
    let t = read_any(&c.test)?;
    let report = metric_report(&r, &t, &c.perceptual, &CurvatureTolerances::default())?;
    let csv = format!("{}\n{}\n", MetricReport::CSV_HEADER, report.csv_row());
    let mut outputs = Vec::new();
    if let Some(o) = &c.output {
        write_text(o, &csv)?;
        outputs.push(o.clone());
    }
    Ok(Artifacts {
        inputs: vec![c.reference.clone(), c.test.clone()],
        outputs,
        stdout: csv,
    })
}

fn convert_cmd(c: &Convert) -> Result<Artifacts> {
    let seq = read_any(&c.input)?;
    if c.output.extension().is_some_and(|e| e == "vseq") {
        ensure_parent(&c.output)?;
        write_vseq(&seq, &c.output)?;
    } else {
        export_png_dir(&seq, &c.output)?;
    }
    Ok(Artifacts {
        inputs: vec![c.input.clone()],
        outputs: vec![c.output.clone()],
        stdout: String::new(),
    })
}

/// Re-executes a manifest and checks that every output hash is reproduced.
pub fn replay(manifest_path: &Path) -> Result<Artifacts> {
    let recorded = Manifest::read(manifest_path)?;
    recorded.check_inputs()?;
    let (artifacts, fresh) = recorded.invocation.execute()?;
    if fresh.outputs != recorded.outputs {
        let bad: Vec<String> = recorded
            .outputs
            .iter()
            .filter(|f| !fresh.outputs.contains(f))
            .map(|f| f.path.display().to_string())
            .collect();
        return Err(Error::validation(format!("replay produced different outputs: {}", bad.join(", "))));
    }
    let mut stdout = artifacts.stdout.clone();
    writeln!(stdout, "replayed {} ({} outputs verified)", recorded.invocation.name(), fresh.outputs.len()).unwrap();
    Ok(Artifacts { stdout, ..artifacts })
}
