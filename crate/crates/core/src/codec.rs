//! Lossy compression round trips through an external transcoder.
//!
//! Templates are split on whitespace into an argument vector (no shell) and
//! the placeholders `{input}`, `{output}` and `{bitrate}` are substituted per
//! argument. `SPOOFAUG_ENCODER`, when set, replaces the program name.

use std::env;
use std::path::Path;
use std::process::{Command, Stdio};
use std::sync::{Condvar, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::audio::{read_wav, write_wav, AudioBuffer};
use crate::error::{Error, Result};

pub const ENCODER_ENV: &str = "SPOOFAUG_ENCODER";
pub const DEFAULT_ENCODER_TEMPLATE: &str = "ffmpeg -y -i {input} -b:a {bitrate}k {output}";
pub const DEFAULT_DECODER_TEMPLATE: &str = "ffmpeg -y -i {input} {output}";

/// Leading samples used to estimate encoder delay.
const ALIGN_WINDOW: usize = 4096;
/// Largest encoder delay searched, in samples, in either direction.
const MAX_ALIGN_LAG: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Codec {
    Mp3,
    M4a,
    PassThrough,
}

impl Codec {
    pub fn container_extension(self) -> &'static str {
        match self {
            Codec::Mp3 => "mp3",
            Codec::M4a => "m4a",
            Codec::PassThrough => "wav",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodecSpec {
    pub codec: Codec,
    pub bitrate_kbps: u32,
    #[serde(default = "default_encoder")]
    pub encoder_template: String,
    #[serde(default = "default_decoder")]
    pub decoder_template: String,
}

fn default_encoder() -> String {
    DEFAULT_ENCODER_TEMPLATE.to_string()
}

fn default_decoder() -> String {
    DEFAULT_DECODER_TEMPLATE.to_string()
}

impl CodecSpec {
    pub fn new(codec: Codec, bitrate_kbps: u32) -> Self {
        Self {
            codec,
            bitrate_kbps,
            encoder_template: default_encoder(),
            decoder_template: default_decoder(),
        }
    }

    pub fn pass_through() -> Self {
        Self::new(Codec::PassThrough, 1)
    }

    pub fn with_templates(mut self, encoder: &str, decoder: &str) -> Self {
        self.encoder_template = encoder.to_string();
        self.decoder_template = decoder.to_string();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.codec == Codec::PassThrough {
            return Ok(());
        }
        if self.bitrate_kbps == 0 {
            return Err(Error::InvalidCodecSpec("bitrate must be positive".into()));
        }
        for (name, template, required) in [
            ("encoder", &self.encoder_template, &["{input}", "{output}", "{bitrate}"][..]),
            ("decoder", &self.decoder_template, &["{input}", "{output}"][..]),
        ] {
            if template.split_whitespace().next().is_none() {
                return Err(Error::InvalidCodecSpec(format!("{name} template is empty")));
            }
            if let Some(missing) = required.iter().find(|p| !template.contains(*p)) {
                return Err(Error::InvalidCodecSpec(format!(
                    "{name} template lacks {missing}"
                )));
            }
        }
        Ok(())
    }

    /// Program the templates invoke, after the environment override.
    pub fn program(&self) -> String {
        env::var(ENCODER_ENV)
            .ok()
            .filter(|s| !s.is_empty())
            .or_else(|| self.encoder_template.split_whitespace().next().map(String::from))
            .unwrap_or_default()
    }

    fn build(&self, template: &str, input: &Path, output: &Path) -> Command {
        let mut args = template.split_whitespace().map(|arg| {
            arg.replace("{input}", &input.to_string_lossy())
                .replace("{output}", &output.to_string_lossy())
                .replace("{bitrate}", &self.bitrate_kbps.to_string())
        });
        args.next();
        let mut cmd = Command::new(self.program());
        cmd.args(args).stdin(Stdio::null());
        cmd
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EncoderReport {
    pub available: bool,
    pub diagnostic: String,
}

/// Probes the transcoder with `-version`. Never fails; PassThrough is
/// always available and spawns nothing.
pub fn check_encoder(spec: &CodecSpec) -> EncoderReport {
    if spec.codec == Codec::PassThrough {
        return EncoderReport {
            available: true,
            diagnostic: "pass-through codec".into(),
        };
    }
    let program = spec.program();
    match Command::new(&program)
        .arg("-version")
        .stdin(Stdio::null())
        .output()
    {
        Ok(out) => {
            let text = String::from_utf8_lossy(if out.stdout.is_empty() {
                &out.stderr
            } else {
                &out.stdout
            });
            EncoderReport {
                available: out.status.success(),
                diagnostic: text.lines().next().unwrap_or_default().to_string(),
            }
        }
        Err(e) => EncoderReport {
            available: false,
            diagnostic: format!("failed to spawn `{program}`: {e}"),
        },
    }
}

/// Counting semaphore bounding concurrent transcoder processes.
struct Limiter {
    state: Mutex<(usize, usize)>,
    cv: Condvar,
}

fn limiter() -> &'static Limiter {
    static LIMITER: OnceLock<Limiter> = OnceLock::new();
    LIMITER.get_or_init(|| {
        let cpus = std::thread::available_parallelism().map_or(1, |n| n.get());
        Limiter {
            state: Mutex::new((0, cpus)),
            cv: Condvar::new(),
        }
    })
}

/// Sets how many transcoder processes may run at once (minimum 1).
pub fn set_subprocess_limit(limit: usize) {
    let l = limiter();
    l.state.lock().unwrap().1 = limit.max(1);
    l.cv.notify_all();
}

struct Permit;

impl Permit {
    fn acquire() -> Self {
        let l = limiter();
        let mut state = l.state.lock().unwrap();
        while state.0 >= state.1 {
            state = l.cv.wait(state).unwrap();
        }
        state.0 += 1;
        Permit
    }
}

impl Drop for Permit {
    fn drop(&mut self) {
        let l = limiter();
        l.state.lock().unwrap().0 -= 1;
        l.cv.notify_one();
    }
}

fn run(mut cmd: Command) -> Result<()> {
    let desc = format!("{cmd:?}");
    let _permit = Permit::acquire();
    let out = cmd
        .output()
        .map_err(|e| Error::EncoderUnavailable(format!("{desc}: {e}")))?;
    if !out.status.success() {
        return Err(Error::SubprocessFailed {
            command: desc,
            code: out.status.code(),
            stderr: String::from_utf8_lossy(&out.stderr).trim().to_string(),
        });
    }
    Ok(())
}

/// Encodes and decodes `audio`, then realigns the result to the input.
/// Temporaries live in a private directory under `workdir` that is removed
/// on every exit path.
pub fn codec_roundtrip(audio: &AudioBuffer, spec: &CodecSpec, workdir: &Path) -> Result<AudioBuffer> {
    audio.ensure_non_empty()?;
    spec.validate()?;
    if spec.codec == Codec::PassThrough {
        return Ok(audio.clone());
    }
    let scratch = tempfile::Builder::new()
        .prefix("spoofaug-codec-")
        .tempdir_in(workdir)?;
    let input = scratch.path().join("input.wav");
    let coded = scratch
        .path()
        .join(format!("coded.{}", spec.codec.container_extension()));
    let decoded = scratch.path().join("decoded.wav");

    write_wav(audio, &input)?;
    run(spec.build(&spec.encoder_template, &input, &coded))?;
    run(spec.build(&spec.decoder_template, &coded, &decoded))?;
    let out = read_wav(&decoded).map_err(|e| Error::OutputUnreadable(e.to_string()))?;
    if out.sample_rate() != audio.sample_rate() {
        return Err(Error::SampleRateChanged {
            input: audio.sample_rate(),
            output: out.sample_rate(),
        });
    }
    let lag = estimate_lag(audio.samples(), out.samples());
    let aligned = shift_to_length(out.samples(), lag, audio.len());
    scratch.close()?;
    AudioBuffer::new(aligned, audio.sample_rate())
}

/// Delay of `output` relative to `reference` maximizing the normalized
/// cross-correlation over the leading window.
pub fn estimate_lag(reference: &[f64], output: &[f64]) -> isize {
    let window = reference.len().min(ALIGN_WINDOW);
    let max_lag = MAX_ALIGN_LAG as isize;
    let mut best = (f64::NEG_INFINITY, 0isize);
    for lag in -max_lag..=max_lag {
        let mut dot = 0.0;
        let mut energy = 0.0;
        for (i, &r) in reference.iter().enumerate().take(window) {
            let j = i as isize + lag;
            if j >= 0 && (j as usize) < output.len() {
                let o = output[j as usize];
                dot += r * o;
                energy += o * o;
            }
        }
        let score = if energy > 0.0 { dot / energy.sqrt() } else { 0.0 };
        // ties prefer the smallest absolute lag
        if score > best.0 || (score == best.0 && lag.abs() < best.1.abs()) {
            best = (score, lag);
        }
    }
    best.1
}

/// `out[i] = samples[i + lag]`, zero where out of range.
pub fn shift_to_length(samples: &[f64], lag: isize, len: usize) -> Vec<f64> {
    (0..len as isize)
        .map(|i| {
            let j = i + lag;
            if j >= 0 && (j as usize) < samples.len() {
                samples[j as usize]
            } else {
                0.0
            }
        })
        .collect()
}

/// Normalized cross-correlation at zero lag over the common length.
pub fn normalized_correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let dot: f64 = a[..n].iter().zip(&b[..n]).map(|(x, y)| x * y).sum();
    let ea: f64 = a[..n].iter().map(|x| x * x).sum();
    let eb: f64 = b[..n].iter().map(|x| x * x).sum();
    if ea == 0.0 || eb == 0.0 {
        0.0
    } else {
        dot / (ea * eb).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(len: usize) -> AudioBuffer {
        AudioBuffer::new(
            (0..len)
                .map(|n| 0.5 * (2.0 * std::f64::consts::PI * 440.0 * n as f64 / 16_000.0).sin())
                .collect(),
            16_000,
        )
        .unwrap()
    }

    #[test]
    fn pass_through_identity() {
        let x = tone(1000);
        let dir = tempfile::tempdir().unwrap();
        assert!(check_encoder(&CodecSpec::pass_through()).available);
        assert_eq!(codec_roundtrip(&x, &CodecSpec::pass_through(), dir.path()).unwrap(), x);
    }

    #[test]
    fn nonexistent_binary_unavailable() {
        let spec = CodecSpec::new(Codec::Mp3, 16).with_templates(
            "/definitely/not/here -i {input} -b {bitrate} {output}",
            "/definitely/not/here -i {input} {output}",
        );
        let report = check_encoder(&spec);
        assert!(!report.available);
        assert!(report.diagnostic.contains("failed to spawn"));
    }

    #[test]
    fn template_validation() {
        let spec = CodecSpec::new(Codec::Mp3, 16).with_templates("enc {input} {output}", "dec {input} {output}");
        assert!(matches!(spec.validate(), Err(Error::InvalidCodecSpec(_))));
        let spec = CodecSpec::new(Codec::Mp3, 0);
        assert!(spec.validate().is_err());
        assert!(CodecSpec::new(Codec::M4a, 64).validate().is_ok());
    }

    #[test]
    fn lag_recovered() {
        let x = tone(6000);
        let noiseish: Vec<f64> = (0..6000).map(|i| ((i * 7919 % 1000) as f64 / 500.0 - 1.0) * 0.3).collect();
        let mixed: Vec<f64> = x.samples().iter().zip(&noiseish).map(|(a, b)| a + b).collect();
        let mut delayed = vec![0.0; 577];
        delayed.extend_from_slice(&mixed);
        assert_eq!(estimate_lag(&mixed, &delayed), 577);
        let aligned = shift_to_length(&delayed, 577, mixed.len());
        assert_eq!(aligned, mixed);
        assert!(normalized_correlation(&aligned, &mixed) > 0.999_999);
    }

    #[test]
    fn shift_pads_with_zero() {
        assert_eq!(shift_to_length(&[1.0, 2.0], -1, 4), vec![0.0, 1.0, 2.0, 0.0]);
    }
}
