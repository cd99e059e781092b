//! Gradient descent on the perceptual straightness loss of a jittery sequence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vidrestore::perceptual::{PerceptualConfig, PerceptualEncoder};
use vidrestore::seqio::{make_synthetic, SyntheticKind, SyntheticSpec};
use vidrestore::straightness::{psg_refine_traced, CurvatureTolerances, PsgConfig, StraighteningLoss};

fn main() -> vidrestore::Result<()> {
    let clean = make_synthetic(&SyntheticSpec::new(SyntheticKind::MovingBlob, 6, 16, 16, 1.0, 2))?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let jittery = clean.with_data(clean.data().iter().map(|v| v + rng.random_range(-0.05..0.05)).collect())?;

    let encoder = PerceptualEncoder::new(&PerceptualConfig::default(), 16, 16)?;
    let loss = StraighteningLoss::new(encoder, CurvatureTolerances::default());
    let cfg = PsgConfig::default();
    let (refined, trace) = psg_refine_traced(&jittery, &cfg, &loss)?;

    println!("step sizes {:?}", cfg.step_sizes());
    for (i, l) in trace.iter().enumerate() {
        println!("iteration {i:2}: loss {:.2} deg", l.to_degrees());
    }
    println!("final loss {:.2} deg", loss.loss(&refined)?.to_degrees());
    Ok(())
}
