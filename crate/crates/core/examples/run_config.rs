//! Drive a restoration from a TOML run configuration, as the command-line tool does.

use vidrestore::cli::RunConfig;
use vidrestore::metrics::psnr;
use vidrestore::mpes::run_ensemble;
use vidrestore::seqio::{make_synthetic, SyntheticKind, SyntheticSpec};

const CONFIG: &str = r#"
seed = 3

[task]
kind = "deblur_plus"

[solver]
start_step = 20
cg_iterations = 8

[codec]
kind = "ortho"
keep = 0.75

[ensemble]
paths = 2
fusion = "latent"
post_refine = 4
"#;

fn main() -> vidrestore::Result<()> {
    let cfg = RunConfig::from_toml(CONFIG)?.with_overrides(&["solver.eta=0.6".to_string()])?;
    cfg.validate()?;
    let x = make_synthetic(&SyntheticSpec::new(SyntheticKind::TranslatingTexture, 8, 16, 16, 1.0, 9))?;
    let y = cfg.task.build(x.dims())?.forward(&x)?;
    let restorer = cfg.restorer(y.clone())?;
    let out = run_ensemble(&restorer, &cfg.solver_config()?, &cfg.ensemble_config())?;
    println!("measurement {:.2} dB -> fused {:.2} dB", psnr(&x, &y, 1.0)?, psnr(&x, &out.fused, 1.0)?);
    println!("resolved config:\n{}", cfg.to_toml()?);
    Ok(())
}
