//! Full corpus run from the shipped config, on a generated corpus.
//!
//! cargo run --example augment_corpus
//! The codec stage is dropped when no encoder is available.

use std::error::Error;
use std::f64::consts::PI;
use std::fs;

use spoofaug::pipeline::{process_file, StageSpec};
use spoofaug::{check_encoder, run_augment_pipeline, write_wav, AudioBuffer, PipelineConfig, PipelineMode, RunOptions};

fn main() -> Result<(), Box<dyn Error>> {
    let root = tempfile::tempdir()?;
    let corpus = root.path().join("corpus");
    for i in 0..8 {
        let path = corpus.join(format!("spk{}/utt{i}.wav", i % 2));
        fs::create_dir_all(path.parent().unwrap())?;
        let f = 200.0 + 90.0 * i as f64;
        let x: Vec<f64> = (0..16_000).map(|n| 0.3 * (2.0 * PI * f * n as f64 / 16_000.0).sin()).collect();
        write_wav(&AudioBuffer::new(x, 16_000)?, &path)?;
    }

    let mut cfg = PipelineConfig::from_toml(include_str!("../configs/augment.toml"))?;
    cfg.io.input_dir = corpus;
    cfg.io.output_dir = root.path().join("augmented");
    cfg.stages.retain(|s| match s {
        StageSpec::Codec(c) => {
            let ok = c.options.iter().all(|o| check_encoder(&c.spec(o)).available);
            if !ok {
                println!("no encoder found, skipping the codec stage");
            }
            ok
        }
        _ => true,
    });

    let options = RunOptions { mode: PipelineMode::Audio, emit_provenance: true };
    let summary = run_augment_pipeline(&cfg, options)?;
    println!("processed {}: {} ok, {} failed", summary.processed, summary.succeeded, summary.failed);
    for line in fs::read_to_string(&summary.manifest)?.lines() {
        println!("{line}");
    }

    // replay one file on its own; same bytes as the full run
    let before = fs::read(cfg.io.output_dir.join("spk1/utt3.wav"))?;
    let record = process_file(&cfg, "spk1/utt3.wav", options);
    let after = fs::read(cfg.io.output_dir.join("spk1/utt3.wav"))?;
    println!("replayed {} (seed {}): identical = {}", record.path, record.seed, before == after);
    Ok(())
}
