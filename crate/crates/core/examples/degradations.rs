//! Build every restoration task's forward operator and check its adjoint.

use vidrestore::degrade::{adjoint_test, Task, TaskKind};
use vidrestore::metrics::psnr;
use vidrestore::seqio::{make_synthetic, SyntheticKind, SyntheticSpec};

fn main() -> vidrestore::Result<()> {
    let x = make_synthetic(&SyntheticSpec::new(SyntheticKind::TranslatingTexture, 16, 32, 32, 1.0, 1))?;
    for kind in TaskKind::ALL {
        let op = Task::new(kind).build(x.dims())?;
        let y = op.forward(&x)?;
        let fidelity = if y.dims() == x.dims() { format!("{:.2} dB", psnr(&x, &y, 1.0)?) } else { "-".into() };
        println!(
            "{:<14} {:<40} {} -> {}  adjoint err {:.1e}  psnr {fidelity}",
            kind.name(),
            op.describe(),
            x.dims(),
            y.dims(),
            adjoint_test(op.as_ref(), 3, 0)?
        );
    }
    Ok(())
}
