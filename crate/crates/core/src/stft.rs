//! Short-time Fourier transform, overlap-add inverse, and the complex mean
//! used as the MaskedSpec fill value.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    Hann,
    Rectangular,
}

impl Window {
    /// Periodic window coefficients of length `n`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            // periodic Hann sums to a constant at hop n/k, k >= 2
            Window::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
                .collect(),
            Window::Rectangular => vec![1.0; n],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct StftConfig {
    pub frame_size: usize,
    pub hop: usize,
    pub window: Window,
}

impl Default for StftConfig {
    /// 512-sample frames with 50% overlap: 32 ms / 16 ms at 16 kHz.
    fn default() -> Self {
        Self {
            frame_size: 512,
            hop: 256,
            window: Window::Hann,
        }
    }
}

impl StftConfig {
    pub fn new(frame_size: usize, hop: usize, window: Window) -> Result<Self> {
        let cfg = Self {
            frame_size,
            hop,
            window,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frame_size == 0 || !self.frame_size.is_multiple_of(2) {
            return Err(Error::InvalidStftConfig(format!(
                "frame size {} must be positive and even",
                self.frame_size
            )));
        }
        if self.hop == 0 || self.hop > self.frame_size {
            return Err(Error::InvalidStftConfig(format!(
                "hop {} must satisfy 0 < hop <= frame size {}",
                self.hop, self.frame_size
            )));
        }
        Ok(())
    }

    /// One-sided bin count, `N/2 + 1`.
    pub fn bins(&self) -> usize {
        self.frame_size / 2 + 1
    }

    /// Number of whole frames that fit in `len` samples.
    pub fn frames_for(&self, len: usize) -> usize {
        if len < self.frame_size {
            0
        } else {
            (len - self.frame_size) / self.hop + 1
        }
    }

    /// Whether overlap-add resynthesis is exact for this window/hop pair.
    pub fn is_invertible(&self) -> bool {
        match self.window {
            Window::Rectangular => self.hop == self.frame_size,
            Window::Hann => self.frame_size.is_multiple_of(self.hop) && self.frame_size / self.hop >= 2,
        }
    }
}

/// One-sided complex STFT, stored frame-major (`frames x bins`).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrogram {
    bins: Vec<Complex64>,
    frames: usize,
    config: StftConfig,
    original_length: usize,
    sample_rate: u32,
}

impl ComplexSpectrogram {
    /// Assembles a spectrogram from raw frame-major bins.
    pub fn from_parts(
        bins: Vec<Complex64>,
        config: StftConfig,
        original_length: usize,
        sample_rate: u32,
    ) -> Result<Self> {
        config.validate()?;
        if sample_rate == 0 {
            return Err(Error::InvalidAudio("sample rate must be positive".into()));
        }
        let frames = config.frames_for(original_length);
        if frames == 0 {
            return Err(Error::SignalTooShort {
                len: original_length,
                frame_size: config.frame_size,
            });
        }
        if bins.len() != frames * config.bins() {
            return Err(Error::InvalidStftConfig(format!(
                "expected {} x {} bins, got {}",
                frames,
                config.bins(),
                bins.len()
            )));
        }
        if bins.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidStftConfig("non-finite bin value".into()));
        }
        Ok(Self {
            bins,
            frames,
            config,
            original_length,
            sample_rate,
        })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn bin_count(&self) -> usize {
        self.config.bins()
    }

    /// `(frames, bins)`, the grid a mask plan must match.
    pub fn dims(&self) -> (usize, usize) {
        (self.frames, self.config.bins())
    }

    pub fn config(&self) -> StftConfig {
        self.config
    }

    pub fn original_length(&self) -> usize {
        self.original_length
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn get(&self, frame: usize, bin: usize) -> Complex64 {
        self.bins[frame * self.bin_count() + bin]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.bins
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.bins
    }

    pub fn frame(&self, frame: usize) -> &[Complex64] {
        let k = self.bin_count();
        &self.bins[frame * k..(frame + 1) * k]
    }

    /// Writes one row per frame of bin magnitudes with 9 significant digits.
    pub fn write_magnitude_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for m in 0..self.frames {
            let row: Vec<String> = self
                .frame(m)
                .iter()
                .map(|c| format!("{:.8e}", c.norm()))
                .collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Mean bin magnitude and mean principal-value phase, recombined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexMean {
    pub magnitude: f64,
    pub phase: f64,
    #[serde(skip)]
    pub value: Complex64,
}

impl ComplexMean {
    pub fn new(magnitude: f64, phase: f64) -> Self {
        Self {
            magnitude,
            phase,
            value: Complex64::from_polar(magnitude, phase),
        }
    }
}

/// Principal argument in (-pi, pi] with arg(0) = 0.
pub fn principal_arg(c: Complex64) -> f64 {
    if c.re == 0.0 && c.im == 0.0 {
        return 0.0;
    }
    let a = c.im.atan2(c.re);
    if a == -PI {
        PI
    } else {
        a
    }
}

/// Forward STFT without padding; a trailing partial frame is dropped.
pub fn compute_stft(audio: &AudioBuffer, config: &StftConfig) -> Result<ComplexSpectrogram> {
    config.validate()?;
    let x = audio.samples();
    let n = config.frame_size;
    let frames = config.frames_for(x.len());
    if frames == 0 {
        return Err(Error::SignalTooShort {
            len: x.len(),
            frame_size: n,
        });
    }
    let k = config.bins();
    let window = config.window.coefficients(n);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let mut buf = vec![Complex64::default(); n];
    let mut bins = Vec::with_capacity(frames * k);
    for m in 0..frames {
        let start = m * config.hop;
        for (i, slot) in buf.iter_mut().enumerate() {
            *slot = Complex64::new(x[start + i] * window[i], 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        bins.extend_from_slice(&buf[..k]);
    }
    Ok(ComplexSpectrogram {
        bins,
        frames,
        config: *config,
        original_length: x.len(),
        sample_rate: audio.sample_rate(),
    })
}

/// Weighted overlap-add inverse normalized per sample by the summed squared
/// window. Output length equals the spectrogram's original length.
pub fn compute_istft(spec: &ComplexSpectrogram) -> Result<AudioBuffer> {
    let cfg = spec.config;
    if !cfg.is_invertible() {
        return Err(Error::NonInvertibleConfig(format!(
            "{:?} window with frame size {} and hop {}",
            cfg.window, cfg.frame_size, cfg.hop
        )));
    }
    let n = cfg.frame_size;
    let k = cfg.bins();
    let window = cfg.window.coefficients(n);
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(n);
    let mut scratch = vec![Complex64::default(); ifft.get_inplace_scratch_len()];
    let mut buf = vec![Complex64::default(); n];

    let covered = (spec.frames - 1) * cfg.hop + n;
    let mut acc = vec![0.0f64; covered];
    let mut norm = vec![0.0f64; covered];
    let scale = 1.0 / n as f64;
    for m in 0..spec.frames {
        let frame = spec.frame(m);
        // Hermitian expansion; DC and Nyquist must be real.
        buf[0] = Complex64::new(frame[0].re, 0.0);
        buf[n / 2] = Complex64::new(frame[k - 1].re, 0.0);
        for b in 1..n / 2 {
            buf[b] = frame[b];
            buf[n - b] = frame[b].conj();
        }
        ifft.process_with_scratch(&mut buf, &mut scratch);
        let start = m * cfg.hop;
        for i in 0..n {
            acc[start + i] += buf[i].re * scale * window[i];
            norm[start + i] += window[i] * window[i];
        }
    }
    let mut out = vec![0.0f64; spec.original_length];
    for (i, slot) in out.iter_mut().enumerate().take(covered) {
        if norm[i] > 1e-12 {
            *slot = acc[i] / norm[i];
        }
    }
    AudioBuffer::new(out, spec.sample_rate)
}

/// Arithmetic means of bin magnitudes and principal-value phases.
pub fn stft_mean(spec: &ComplexSpectrogram) -> Result<ComplexMean> {
    complex_mean(spec.as_slice())
}

pub(crate) fn complex_mean(values: &[Complex64]) -> Result<ComplexMean> {
    if values.is_empty() {
        return Err(Error::EmptySpectrogram);
    }
    let count = values.len() as f64;
    let magnitude = values.iter().map(|c| c.norm()).sum::<f64>() / count;
    let phase = values.iter().map(|&c| principal_arg(c)).sum::<f64>() / count;
    Ok(ComplexMean::new(magnitude, phase))
}
