//! Analysis/resynthesis with the default 512/256 Hann STFT.
//!
//! cargo run --example stft_roundtrip [input.wav]

use std::error::Error;

use spoofaug::{compute_istft, compute_stft, read_wav, stft_mean, AudioBuffer, StftConfig};

fn main() -> Result<(), Box<dyn Error>> {
    let audio = match std::env::args().nth(1) {
        Some(path) => read_wav(path)?,
        None => AudioBuffer::new(
            (0..16_000).map(|n| (n as f64 * 0.07).sin() * 0.3 + (n as f64 * 0.31).cos() * 0.1).collect(),
            16_000,
        )?,
    };
    let cfg = StftConfig::default();
    let spec = compute_stft(&audio, &cfg)?;
    let (frames, bins) = spec.dims();
    println!("{} samples -> {frames} frames x {bins} bins", audio.len());

    let mu = stft_mean(&spec)?;
    println!("complex mean: |mu| = {:.6}, arg = {:.6} rad", mu.magnitude, mu.phase);

    let back = compute_istft(&spec)?;
    let guard = cfg.frame_size;
    let (x, y) = (audio.samples(), back.samples());
    let err: f64 = (guard..x.len() - guard).map(|i| (x[i] - y[i]).powi(2)).sum();
    let sig: f64 = (guard..x.len() - guard).map(|i| x[i].powi(2)).sum();
    println!("interior relative RMS error: {:.3e}", (err / sig).sqrt());
    Ok(())
}
