//! Retina responses and V1 energy features of a moving texture.

use vidrestore::perceptual::{PerceptualConfig, PerceptualEncoder};
use vidrestore::seqio::{make_synthetic, SyntheticKind, SyntheticSpec};

fn main() -> vidrestore::Result<()> {
    let seq = make_synthetic(&SyntheticSpec::new(SyntheticKind::TranslatingTexture, 4, 32, 32, 2.0, 3))?;
    let encoder = PerceptualEncoder::new(&PerceptualConfig::default(), 32, 32)?;
    let pyr = encoder.pyramid_config();
    println!("pyramid: {} scales x {} orientations, feature dim {}", pyr.scales, pyr.orientations, encoder.feature_dim());

    let retina = encoder.retina_sequence(&seq)?;
    let (features, _) = encoder.encode_sequence(&seq)?;
    for (t, (r, f)) in retina.iter().zip(&features).enumerate() {
        let (lo, hi) = r.iter().fold((f64::MAX, f64::MIN), |(a, b), v| (a.min(*v), b.max(*v)));
        let per_band: Vec<String> = (0..f.layout.bands.len()).map(|b| format!("{:.3}", f.band(b).iter().sum::<f64>())).collect();
        println!("frame {t}: retina in [{lo:.4}, {hi:.4}], band energies [{}]", per_band.join(", "));
    }
    // whole-pixel circular shifts move energy around inside each band but keep its total
    for t in 1..features.len() {
        let step: f64 = features[t].values.iter().zip(&features[t - 1].values).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        println!("frames {}->{t}: V1 displacement norm {step:.4}", t - 1);
    }
    Ok(())
}
