//! Windowed-sinc low-pass FIR design and zero-delay direct convolution.

use std::f64::consts::PI;

use rand::Rng;

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};
use crate::masking::Interval;

pub const DEFAULT_TAPS: usize = 101;
pub const DEFAULT_CUTOFF_RANGE: Interval<f64> = Interval::new(0.1, 0.4);

/// Symmetric linear-phase kernel; `taps[center]` is the zero offset.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterKernel {
    taps: Vec<f64>,
    cutoff: f64,
}

impl FilterKernel {
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Normalized cutoff in cycles/sample.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn center(&self) -> usize {
        (self.taps.len() - 1) / 2
    }
}

/// Hamming-windowed sinc: `sin(2 pi fc m) / (pi m) * w(m)` for offsets
/// `m != 0` and exactly `2 fc` at the center.
pub fn design_lpf_kernel(cutoff: f64, taps: usize) -> Result<FilterKernel> {
    if !(cutoff > 0.0 && cutoff < 0.5) {
        return Err(Error::InvalidCutoff(cutoff));
    }
    if taps < 3 || taps.is_multiple_of(2) {
        return Err(Error::InvalidLength(taps));
    }
    let half = (taps - 1) / 2;
    let span = (taps - 1) as f64;
    let h = (0..taps)
        .map(|i| {
            // evaluated on |m| so the taps are bit-exactly symmetric
            let m = i.abs_diff(half) as f64;
            if m == 0.0 {
                2.0 * cutoff
            } else {
                // Hamming over the full support, 0.54 - 0.46 cos(2 pi i / (M - 1))
                let window = 0.54 + 0.46 * (2.0 * PI * m / span).cos();
                (2.0 * PI * cutoff * m).sin() / (PI * m) * window
            }
        })
        .collect();
    Ok(FilterKernel { taps: h, cutoff })
}

/// Causal convolution `y[n] = sum_j x[n - j] h[j]` advanced by the kernel's
/// half length so the output is aligned with the input. Out-of-range input
/// samples are zero; output length equals input length.
pub fn apply_fir(audio: &AudioBuffer, kernel: &FilterKernel) -> Result<AudioBuffer> {
    audio.ensure_non_empty()?;
    let x = audio.samples();
    let h = kernel.taps();
    let c = kernel.center() as isize;
    let len = x.len() as isize;
    let y = (0..len)
        .map(|n| {
            // x index = n + c - j must lie in [0, len)
            let j_lo = (n + c - len + 1).max(0) as usize;
            let j_hi = ((n + c).min(h.len() as isize - 1)) as usize;
            (j_lo..=j_hi)
                .map(|j| x[(n + c) as usize - j] * h[j])
                .sum()
        })
        .collect();
    AudioBuffer::new(y, audio.sample_rate())
}

/// Uniform draw from `range`; a point interval returns its single value.
pub fn draw_cutoff<R: Rng + ?Sized>(range: &Interval<f64>, rng: &mut R) -> Result<f64> {
    validate_cutoff_range(range)?;
    Ok(range.sample(rng))
}

pub fn validate_cutoff_range(range: &Interval<f64>) -> Result<()> {
    if !(range.lo > 0.0 && range.lo <= range.hi && range.hi < 0.5) {
        return Err(Error::InvalidCutoff(if range.lo > 0.0 && range.lo < 0.5 {
            range.hi
        } else {
            range.lo
        }));
    }
    Ok(())
}

/// Low-pass filter with a cutoff drawn uniformly from `cutoff_range`.
pub fn random_lpf_augment<R: Rng + ?Sized>(
    audio: &AudioBuffer,
    cutoff_range: &Interval<f64>,
    taps: usize,
    rng: &mut R,
) -> Result<AudioBuffer> {
    let fc = draw_cutoff(cutoff_range, rng)?;
    apply_fir(audio, &design_lpf_kernel(fc, taps)?)
}
