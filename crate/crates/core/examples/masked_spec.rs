//! MaskedSpec on a single file: STFT, mask with the complex mean, invert.
//!
//! cargo run --example masked_spec [input.wav output.wav] [squares|bands|singles|gauss] [seed]

use std::error::Error;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spoofaug::masking::masked_spec_augment_with_plan;
use spoofaug::{read_wav, write_wav, AudioBuffer, MaskParams, MaskShape, StftConfig};

fn main() -> Result<(), Box<dyn Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (audio, output) = if args.len() >= 2 {
        (read_wav(&args[0])?, Some(args[1].clone()))
    } else {
        let tone = (0..32_000).map(|n| 0.4 * (n as f64 * 2.0 * std::f64::consts::PI * 440.0 / 16_000.0).sin());
        (AudioBuffer::new(tone.collect(), 16_000)?, None)
    };
    let shape = match args.get(2).map(String::as_str) {
        Some("bands") => MaskShape::Bands,
        Some("singles") => MaskShape::Singles,
        Some("gauss") => MaskShape::Gauss,
        _ => MaskShape::Squares,
    };
    let seed = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(7);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out = masked_spec_augment_with_plan(&audio, &MaskParams::new(shape), &StftConfig::default(), &mut rng)?;
    println!("fill: |mu| = {:.6}, arg = {:.6}", out.fill.magnitude, out.fill.phase);
    println!("{}", serde_json::to_string_pretty(&out.plan)?);

    let changed = audio.samples().iter().zip(out.audio.samples()).filter(|(a, b)| (*a - *b).abs() > 1e-9).count();
    println!("{changed} of {} samples changed", audio.len());
    if let Some(path) = output {
        write_wav(&out.audio, &path)?;
        println!("wrote {path}");
    }
    Ok(())
}
