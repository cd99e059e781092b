//! Restore a temporally blurred video, with and without straightness guidance.

use std::sync::Arc;

use vidrestore::degrade::{Task, TaskKind};
use vidrestore::diffusion::{GaussianAnalyticPrior, IdentityCodec, NoiseSchedule, Restorer, SolverConfig};
use vidrestore::metrics::{curvature_report, psnr};
use vidrestore::perceptual::PerceptualConfig;
use vidrestore::seqio::{make_synthetic, FrameSequence, SyntheticKind, SyntheticSpec};
use vidrestore::straightness::{CurvatureTolerances, PsgConfig};

fn main() -> vidrestore::Result<()> {
    let x = make_synthetic(&SyntheticSpec::new(SyntheticKind::TranslatingTexture, 8, 32, 32, 1.0, 0))?;
    let op = Task::new(TaskKind::TemporalBlur).build(x.dims())?;
    let y = op.forward(&x)?;
    let prior = Arc::new(GaussianAnalyticPrior::constant(32 * 32, 0.5, 0.05)?);
    let restorer = Restorer::new(y.clone(), op, prior, Arc::new(IdentityCodec::new(32, 32, 1)), NoiseSchedule::default())?;

    let tol = CurvatureTolerances::default();
    let v1 = |s: &FrameSequence| curvature_report(s, &PerceptualConfig::default(), &tol).map(|r| r.v1.mean_deg);
    println!("measurement: {:.2} dB, V1 curvature {:.2} deg (truth {:.2})", psnr(&x, &y, 1.0)?, v1(&y)?, v1(&x)?);

    for (name, psg) in [("plain", None), ("psg 0.5", Some(PsgConfig::default())), ("psg 0.1", Some(PsgConfig { step_size: 0.1, ..Default::default() }))] {
        let out = restorer.solve(&SolverConfig { psg, ..Default::default() })?;
        let last = out.log.last().expect("at least one step");
        println!(
            "{name:<8} {:.2} dB, V1 curvature {:.2} deg, last-step residual {:.2e}",
            psnr(&x, &out.pixels, 1.0)?,
            v1(&out.pixels)?,
            last.residual
        );
    }
    Ok(())
}
