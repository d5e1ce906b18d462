//! Encode and decode through an external transcoder, then realign.
//!
//! cargo run --example codec_roundtrip [mp3|m4a] [bitrate_kbps]
//! Uses ffmpeg from PATH, or the binary named by SPOOFAUG_ENCODER.

use std::error::Error;
use std::f64::consts::PI;

use spoofaug::codec::normalized_correlation;
use spoofaug::{check_encoder, codec_roundtrip, AudioBuffer, Codec, CodecSpec};

fn main() -> Result<(), Box<dyn Error>> {
    let mut args = std::env::args().skip(1);
    let codec = match args.next().as_deref() {
        Some("m4a") => Codec::M4a,
        _ => Codec::Mp3,
    };
    let bitrate: u32 = args.next().map_or(Ok(16), |s| s.parse())?;
    let spec = CodecSpec::new(codec, bitrate);

    let report = check_encoder(&spec);
    if !report.available {
        println!("encoder unavailable, nothing to do: {}", report.diagnostic);
        return Ok(());
    }
    println!("encoder: {}", report.diagnostic);

    let x = AudioBuffer::new((0..64_000).map(|n| 0.5 * (2.0 * PI * 440.0 * n as f64 / 16_000.0).sin()).collect(), 16_000)?;
    let work = tempfile::tempdir()?;
    let y = codec_roundtrip(&x, &spec, work.path())?;
    println!(
        "{codec:?} {bitrate} kbps: {} -> {} samples, correlation {:.4}",
        x.len(),
        y.len(),
        normalized_correlation(x.samples(), y.samples())
    );
    Ok(())
}
