//! MaskedFeature followed by [-1, 1] normalization on a feature matrix.
//!
//! cargo run --example masked_feature [features.safm|features.csv] [output]

use std::error::Error;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spoofaug::features::masked_feature_augment_with_plan;
use spoofaug::{load_features, normalize_features, save_features, FeatureMatrix, MaskParams, MaskShape};

fn main() -> Result<(), Box<dyn Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let features = match args.first() {
        Some(path) => load_features(path)?,
        // 200 frames of 60-dimensional pseudo-LFCCs
        None => FeatureMatrix::new(200, 60, (0..12_000).map(|i| ((i % 60) as f32 * 0.3).cos() * 4.0 + (i as f32 * 0.013).sin()).collect())?,
    };
    let (rows, cols) = features.dims();
    println!("{rows} x {cols}, mean {:.4}", features.mean());

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for shape in MaskShape::ALL {
        let out = masked_feature_augment_with_plan(&features, &MaskParams::new(shape), &mut rng)?;
        let touched = features.values().iter().zip(out.features.values()).filter(|(a, b)| a != b).count();
        println!("{shape:?}: {} patches, {touched} cells changed, fill {:.4}", out.plan.patches.len(), out.fill);
    }

    let masked = masked_feature_augment_with_plan(&features, &MaskParams::new(MaskShape::Squares), &mut rng)?;
    let normalized = normalize_features(&masked.features);
    let lo = normalized.values().iter().cloned().fold(f32::INFINITY, f32::min);
    let hi = normalized.values().iter().cloned().fold(f32::NEG_INFINITY, f32::max);
    println!("normalized range [{lo}, {hi}]");
    if let Some(path) = args.get(1) {
        save_features(&normalized, path)?;
        println!("wrote {path}");
    }
    Ok(())
}
