//! Low-pass kernel design and filtering.
//!
//! cargo run --example lpf [cutoff] [taps]

use std::error::Error;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spoofaug::filters::{draw_cutoff, DEFAULT_CUTOFF_RANGE};
use spoofaug::{apply_fir, design_lpf_kernel, random_lpf_augment, AudioBuffer};

fn gain_db(taps: &[f64], f: f64) -> f64 {
    let h: Complex64 = taps.iter().enumerate().map(|(n, &t)| Complex64::from_polar(t, -2.0 * PI * f * n as f64)).sum();
    20.0 * h.norm().log10()
}

fn main() -> Result<(), Box<dyn Error>> {
    let mut args = std::env::args().skip(1);
    let cutoff: f64 = args.next().map_or(Ok(0.1), |s| s.parse())?;
    let taps: usize = args.next().map_or(Ok(101), |s| s.parse())?;

    let kernel = design_lpf_kernel(cutoff, taps)?;
    println!("fc = {cutoff}, M = {taps}, h[center] = {}", kernel.taps()[kernel.center()]);
    for f in [0.0, cutoff / 2.0, cutoff, cutoff * 1.5, 2.0 * cutoff, 0.5] {
        println!("  |H({f:.3})| = {:7.2} dB", gain_db(kernel.taps(), f));
    }

    let tone = |f: f64| AudioBuffer::new((0..4000).map(|n| (2.0 * PI * f * n as f64).sin()).collect(), 16_000);
    for f in [cutoff / 2.0, 2.0 * cutoff] {
        let y = apply_fir(&tone(f)?, &kernel)?;
        let peak = y.samples()[taps..4000 - taps].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        println!("tone at {f:.3} cycles/sample -> peak {peak:.4}");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let drawn = draw_cutoff(&DEFAULT_CUTOFF_RANGE, &mut rng)?;
    println!("cutoff drawn from {:?}: {drawn:.4}", DEFAULT_CUTOFF_RANGE);
    let y = random_lpf_augment(&tone(0.3)?, &DEFAULT_CUTOFF_RANGE, taps, &mut rng)?;
    println!("random LPF of a 0.3 tone: output RMS {:.4}", (y.samples().iter().map(|v| v * v).sum::<f64>() / y.len() as f64).sqrt());
    Ok(())
}
