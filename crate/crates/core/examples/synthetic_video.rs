//! Generate the three synthetic fixtures, save them as VSEQ and PNG, and read them back.

use vidrestore::seqio::{export_png_dir, import_png_dir, make_synthetic, read_vseq, write_vseq, SyntheticKind, SyntheticSpec};

fn main() -> vidrestore::Result<()> {
    let dir = std::env::temp_dir().join("vidrestore-synthetic");
    std::fs::create_dir_all(&dir)?;
    for kind in [SyntheticKind::TranslatingTexture, SyntheticKind::MovingBlob, SyntheticKind::Static] {
        let spec = SyntheticSpec::new(kind, 8, 32, 32, 1.5, 7);
        let seq = make_synthetic(&spec)?;
        let path = dir.join(format!("{kind:?}.vseq"));
        write_vseq(&seq, &path)?;
        // payload is binary32
        let stored = read_vseq(&path)?;

        let png = dir.join(format!("{kind:?}_png"));
        export_png_dir(&seq, &png)?;
        let back = import_png_dir(&png)?;
        println!(
            "{kind:?}: dims {}, file {} bytes, f32 error {:.1e}, 8-bit error {:.4}",
            seq.dims(),
            std::fs::metadata(&path)?.len(),
            stored.max_abs_diff(&seq)?,
            back.max_abs_diff(&seq)?
        );
    }
    println!("written to {}", dir.display());
    Ok(())
}
