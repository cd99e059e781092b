//! PSNR, SSIM and curvature of a degraded video against its source.

use vidrestore::degrade::{Task, TaskKind};
use vidrestore::metrics::{metric_report, MetricReport};
use vidrestore::perceptual::PerceptualConfig;
use vidrestore::seqio::{make_synthetic, SyntheticKind, SyntheticSpec};
use vidrestore::straightness::CurvatureTolerances;

fn main() -> vidrestore::Result<()> {
    let x = make_synthetic(&SyntheticSpec::new(SyntheticKind::MovingBlob, 12, 32, 32, 1.0, 4))?;
    println!("task,{}", MetricReport::CSV_HEADER);
    for kind in [TaskKind::Deblur, TaskKind::DeblurPlus, TaskKind::TemporalBlur] {
        let y = Task::new(kind).build(x.dims())?.forward(&x)?;
        let report = metric_report(&x, &y, &PerceptualConfig::default(), &CurvatureTolerances::default())?;
        println!("{},{}", kind.name(), report.csv_row());
    }
    Ok(())
}
