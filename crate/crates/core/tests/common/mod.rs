#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spoofaug::{write_wav, AudioBuffer};
use walkdir::WalkDir;

pub fn noise(len: usize, seed: u64) -> AudioBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    AudioBuffer::new((0..len).map(|_| rng.random_range(-0.5..0.5)).collect(), 16_000).unwrap()
}

pub fn tone(len: usize, freq: f64, rate: u32) -> AudioBuffer {
    AudioBuffer::new(
        (0..len)
            .map(|n| 0.5 * (2.0 * std::f64::consts::PI * freq * n as f64 / rate as f64).sin())
            .collect(),
        rate,
    )
    .unwrap()
}

/// Writes a small nested WAV corpus under `root`.
pub fn make_corpus(root: &Path, files: usize) {
    for i in 0..files {
        let rel = if i % 2 == 0 {
            format!("spk{}/utt{i}.wav", i % 3)
        } else {
            format!("utt{i}.wav")
        };
        let path = root.join(rel);
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        write_wav(&noise(4000 + 333 * i, i as u64), &path).unwrap();
    }
}

/// Relative path -> bytes for every file under `root`.
pub fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    WalkDir::new(root)
        .into_iter()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().is_file())
        .map(|e| {
            let rel = e.path().strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
            (rel, fs::read(e.path()).unwrap())
        })
        .collect()
}

pub fn audio_config(input: &Path, output: &Path, seed: u64, parallelism: usize, stages: &str) -> String {
    format!(
        "master_seed = {seed}\nparallelism = {parallelism}\n\n[io]\ninput_dir = '{}'\noutput_dir = '{}'\nsample_rate = 16000\n\n{stages}",
        input.display(),
        output.display()
    )
}

pub const ALL_AUDIO_STAGES: &str = r#"
[[stages]]
kind = "lpf"
probability = 0.7
cutoff_range = [0.1, 0.4]
taps = 101

[[stages]]
kind = "masked_spec"
probability = 0.8
shape = "gauss"

[[stages]]
kind = "masked_spec"
probability = 0.5
shape = "bands"
patch_count = [1, 3]
"#;
