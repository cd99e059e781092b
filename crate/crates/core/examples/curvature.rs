//! Pixel, retina and V1 curvature of different kinds of motion.

use vidrestore::metrics::curvature_report;
use vidrestore::perceptual::PerceptualConfig;
use vidrestore::seqio::{make_synthetic, SyntheticKind, SyntheticSpec};
use vidrestore::straightness::{mean_curvature, CurvatureTolerances, Domain, Trajectory};

fn main() -> vidrestore::Result<()> {
    let tol = CurvatureTolerances::default();

    let corner = Trajectory::new(Domain::Pixel, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0], vec![2.0, 1.0]])?;
    println!("toy trajectory: mean curvature {:.1} deg", mean_curvature(&corner, &tol)?);

    for (kind, speed) in [(SyntheticKind::TranslatingTexture, 1.0), (SyntheticKind::MovingBlob, 2.0), (SyntheticKind::Static, 0.0)] {
        let seq = make_synthetic(&SyntheticSpec::new(kind, 10, 32, 32, speed, 5))?;
        match curvature_report(&seq, &PerceptualConfig::default(), &tol) {
            Ok(r) => println!(
                "{kind:?}: pixel {:.2}  retina {:.2}  v1 {:.2}  (pixel - v1 = {:.2}) deg",
                r.pixel.mean_deg,
                r.retina.mean_deg,
                r.v1.mean_deg,
                r.delta()
            ),
            Err(e) => println!("{kind:?}: {e}"),
        }
    }
    Ok(())
}
