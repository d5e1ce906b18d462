//! Mono PCM audio buffers and WAV file I/O.

use std::io;
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};

/// Canonical pipeline sample rate in Hz.
pub const DEFAULT_SAMPLE_RATE: u32 = 16_000;

/// Mono signal with nominal amplitude range [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioBuffer {
    /// Builds a buffer, rejecting non-finite samples and a zero sample rate.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidAudio("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidAudio(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub(crate) fn ensure_non_empty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptyBuffer)
        } else {
            Ok(())
        }
    }
}

/// Reads a mono integer-PCM WAV file (16, 24 or 32 bit) scaled to [-1, 1].
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let reader = WavReader::open(path).map_err(|e| map_read_error(e, path))?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::UnsupportedFormat(format!(
            "{} channels, only mono is supported",
            spec.channels
        )));
    }
    if spec.sample_format != SampleFormat::Int {
        return Err(Error::UnsupportedFormat(
            "floating-point samples, only integer PCM is supported".into(),
        ));
    }
    let full_scale = match spec.bits_per_sample {
        16 => 32_768.0,
        24 => 8_388_608.0,
        32 => 2_147_483_648.0,
        bits => {
            return Err(Error::UnsupportedFormat(format!(
                "{bits}-bit PCM, expected 16, 24 or 32"
            )))
        }
    };
    let samples = reader
        .into_samples::<i32>()
        .map(|s| s.map(|v| v as f64 / full_scale))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| map_read_error(e, path))?;
    AudioBuffer::new(samples, spec.sample_rate)
}

/// Writes 16-bit PCM mono, clamping samples to [-1, 1] before quantization.
pub fn write_wav(buffer: &AudioBuffer, path: impl AsRef<Path>) -> Result<()> {
    buffer.ensure_non_empty()?;
    let spec = WavSpec {
        channels: 1,
        sample_rate: buffer.sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::create(path.as_ref(), spec).map_err(map_write_error)?;
    for &s in &buffer.samples {
        writer
            .write_sample(quantize_i16(s))
            .map_err(map_write_error)?;
    }
    writer.finalize().map_err(map_write_error)?;
    Ok(())
}

/// Scales by 32768 and rounds; values at or beyond full scale saturate.
fn quantize_i16(sample: f64) -> i16 {
    let scaled = (sample.clamp(-1.0, 1.0) * 32_768.0).round();
    scaled.clamp(i16::MIN as f64, i16::MAX as f64) as i16
}

fn map_read_error(err: hound::Error, path: &Path) -> Error {
    match err {
        hound::Error::IoError(e) if e.kind() == io::ErrorKind::NotFound => {
            Error::FileNotFound(path.to_path_buf())
        }
        hound::Error::IoError(e) if e.kind() == io::ErrorKind::UnexpectedEof => {
            Error::CorruptHeader(format!("truncated file: {e}"))
        }
        hound::Error::IoError(e) => Error::Io(e),
        hound::Error::FormatError(msg) => Error::CorruptHeader(msg.to_string()),
        hound::Error::Unsupported => Error::UnsupportedFormat("unsupported WAV encoding".into()),
        hound::Error::InvalidSampleFormat | hound::Error::TooWide => {
            Error::UnsupportedFormat(err.to_string())
        }
        other => Error::CorruptHeader(other.to_string()),
    }
}

fn map_write_error(err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(e) => Error::Io(e),
        other => Error::Io(io::Error::other(other.to_string())),
    }
}
