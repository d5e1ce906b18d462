//! Stochastic occlusion masks (Squares, Bands, Singles, Gauss) over a
//! frames x bins grid, applied to complex spectrograms or real feature
//! matrices.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::stft::{compute_istft, compute_stft, stft_mean, ComplexMean, ComplexSpectrogram, StftConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskShape {
    Squares,
    Bands,
    Singles,
    Gauss,
}

impl MaskShape {
    pub const ALL: [MaskShape; 4] = [
        MaskShape::Squares,
        MaskShape::Bands,
        MaskShape::Singles,
        MaskShape::Gauss,
    ];
}

/// Closed interval `[lo, hi]`, serialized as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[T; 2]", into = "[T; 2]")]
pub struct Interval<T: Copy> {
    pub lo: T,
    pub hi: T,
}

impl<T: Copy> Interval<T> {
    pub const fn new(lo: T, hi: T) -> Self {
        Self { lo, hi }
    }

    pub const fn point(v: T) -> Self {
        Self { lo: v, hi: v }
    }
}

impl<T: Copy> From<[T; 2]> for Interval<T> {
    fn from([lo, hi]: [T; 2]) -> Self {
        Self { lo, hi }
    }
}

impl<T: Copy> From<Interval<T>> for [T; 2] {
    fn from(i: Interval<T>) -> Self {
        [i.lo, i.hi]
    }
}

impl Interval<f64> {
    /// Ordered and inside (0, 1].
    fn is_unit_fraction(&self) -> bool {
        self.lo > 0.0 && self.lo <= self.hi && self.hi <= 1.0
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            rng.random_range(self.lo..=self.hi)
        }
    }
}

/// Recipe for drawing a [`MaskPlan`]. Ranges that do not apply to `shape`
/// are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskParams {
    pub shape: MaskShape,
    pub patch_count: Interval<usize>,
    /// Fraction of the time axis per patch (Squares).
    pub time_extent: Interval<f64>,
    /// Fraction of the frequency axis per patch (Squares, Bands).
    pub freq_extent: Interval<f64>,
    /// Gaussian width as a fraction of each axis (Gauss).
    pub sigma: Interval<f64>,
    /// Peak blend weight (Gauss).
    pub peak_alpha: Interval<f64>,
}

impl MaskParams {
    /// Default ranges: 1-5 patches, Squares 5-15% per axis, Bands 5-20% of
    /// frequency, Gauss sigma 2-10% per axis with peak 0.5-1.0.
    pub fn new(shape: MaskShape) -> Self {
        let freq_extent = match shape {
            MaskShape::Bands => Interval::new(0.05, 0.20),
            _ => Interval::new(0.05, 0.15),
        };
        Self {
            shape,
            patch_count: Interval::new(1, 5),
            time_extent: Interval::new(0.05, 0.15),
            freq_extent,
            sigma: Interval::new(0.02, 0.10),
            peak_alpha: Interval::new(0.5, 1.0),
        }
    }

    pub fn with_patch_count(mut self, lo: usize, hi: usize) -> Self {
        self.patch_count = Interval::new(lo, hi);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.patch_count.lo > self.patch_count.hi {
            return Err(Error::InvalidMaskParams(format!(
                "patch count range [{}, {}] is not ordered",
                self.patch_count.lo, self.patch_count.hi
            )));
        }
        let checks = [
            ("time_extent", self.time_extent),
            ("freq_extent", self.freq_extent),
            ("sigma", self.sigma),
            ("peak_alpha", self.peak_alpha),
        ];
        for (name, range) in checks {
            if !range.is_unit_fraction() {
                return Err(Error::InvalidMaskParams(format!(
                    "{name} range [{}, {}] must be ordered within (0, 1]",
                    range.lo, range.hi
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Patch {
    /// Inclusive frame range `t0..=t1` by inclusive bin range `k0..=k1`.
    Square { t0: usize, t1: usize, k0: usize, k1: usize },
    /// Bins `k0..=k1` across every frame.
    Band { k0: usize, k1: usize },
    /// One bin row across every frame.
    Single { k: usize },
    /// Soft blend centered at `(tc, kc)`, widths in cells.
    Gauss {
        tc: f64,
        kc: f64,
        sigma_t: f64,
        sigma_k: f64,
        peak: f64,
    },
}

impl Patch {
    pub fn is_hard(&self) -> bool {
        !matches!(self, Patch::Gauss { .. })
    }

    /// Inclusive `(t0, t1, k0, k1)` rectangle of a hard patch on `dims`.
    pub fn hard_rect(&self, dims: (usize, usize)) -> Option<(usize, usize, usize, usize)> {
        let last_t = dims.0.saturating_sub(1);
        match *self {
            Patch::Square { t0, t1, k0, k1 } => Some((t0, t1, k0, k1)),
            Patch::Band { k0, k1 } => Some((0, last_t, k0, k1)),
            Patch::Single { k } => Some((0, last_t, k, k)),
            Patch::Gauss { .. } => None,
        }
    }

    fn validate(&self, (frames, bins): (usize, usize)) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidMaskPlan(msg));
        match *self {
            Patch::Gauss {
                sigma_t,
                sigma_k,
                peak,
                tc,
                kc,
            } => {
                if !(peak > 0.0 && peak <= 1.0 && sigma_t > 0.0 && sigma_k > 0.0) {
                    return bad(format!("gauss patch {self:?} has invalid widths or peak"));
                }
                if !tc.is_finite() || !kc.is_finite() {
                    return bad(format!("gauss patch {self:?} has a non-finite center"));
                }
            }
            _ => {
                let (t0, t1, k0, k1) = self.hard_rect((frames, bins)).unwrap();
                if t0 > t1 || t1 >= frames || k0 > k1 || k1 >= bins {
                    return bad(format!("patch {self:?} exceeds {frames}x{bins}"));
                }
            }
        }
        Ok(())
    }
}

/// A realized set of patches on a `(frames, bins)` grid. Overlapping patches
/// combine as a union; hard fills take precedence over Gaussian blending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskPlan {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub shape: Option<MaskShape>,
    pub dims: (usize, usize),
    pub patches: Vec<Patch>,
}

/// What happens to one grid cell when a plan is applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellAction {
    Keep,
    Fill,
    Blend(f64),
}

impl MaskPlan {
    pub fn new(dims: (usize, usize), patches: Vec<Patch>) -> Result<Self> {
        let plan = Self {
            shape: None,
            dims,
            patches,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn empty(dims: (usize, usize)) -> Self {
        Self {
            shape: None,
            dims,
            patches: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.0 == 0 || self.dims.1 == 0 {
            return Err(Error::EmptyDims {
                frames: self.dims.0,
                bins: self.dims.1,
            });
        }
        self.patches.iter().try_for_each(|p| p.validate(self.dims))
    }

    /// Frame-major flags for cells covered by any hard patch.
    pub fn hard_cells(&self) -> Vec<bool> {
        let (frames, bins) = self.dims;
        let mut cells = vec![false; frames * bins];
        for rect in self.patches.iter().filter_map(|p| p.hard_rect(self.dims)) {
            let (t0, t1, k0, k1) = rect;
            for t in t0..=t1 {
                cells[t * bins + k0..=t * bins + k1].fill(true);
            }
        }
        cells
    }

    /// Frame-major Gaussian blend weights, summed over patches and clamped
    /// to 1.
    pub fn blend_weights(&self) -> Vec<f64> {
        let (frames, bins) = self.dims;
        let mut alpha = vec![0.0f64; frames * bins];
        for patch in &self.patches {
            if let Patch::Gauss {
                tc,
                kc,
                sigma_t,
                sigma_k,
                peak,
            } = *patch
            {
                let kt: Vec<f64> = (0..frames)
                    .map(|t| (t as f64 - tc).powi(2) / (2.0 * sigma_t * sigma_t))
                    .collect();
                let kk: Vec<f64> = (0..bins)
                    .map(|k| (k as f64 - kc).powi(2) / (2.0 * sigma_k * sigma_k))
                    .collect();
                for (t, et) in kt.iter().enumerate() {
                    let row = &mut alpha[t * bins..(t + 1) * bins];
                    for (a, ek) in row.iter_mut().zip(&kk) {
                        *a += peak * (-(et + ek)).exp();
                    }
                }
            }
        }
        alpha.iter_mut().for_each(|a| *a = a.min(1.0));
        alpha
    }

    pub fn cell_actions(&self) -> Vec<CellAction> {
        let hard = self.hard_cells();
        let has_gauss = self.patches.iter().any(|p| !p.is_hard());
        let alpha = if has_gauss {
            self.blend_weights()
        } else {
            vec![0.0; hard.len()]
        };
        hard.iter()
            .zip(alpha)
            .map(|(&h, a)| {
                if h {
                    CellAction::Fill
                } else if a > 0.0 {
                    CellAction::Blend(a)
                } else {
                    CellAction::Keep
                }
            })
            .collect()
    }

    fn check_dims(&self, data: (usize, usize)) -> Result<()> {
        if self.dims != data {
            return Err(Error::DimsMismatch {
                plan: self.dims,
                data,
            });
        }
        Ok(())
    }
}

/// Width in cells for a fractional extent: rounded, at least one cell.
fn extent_cells(fraction: f64, axis: usize) -> usize {
    ((fraction * axis as f64).round() as usize).clamp(1, axis)
}

/// Draws a plan; identical `(params, dims, rng state)` give identical plans.
pub fn generate_mask_plan<R: Rng + ?Sized>(
    params: &MaskParams,
    dims: (usize, usize),
    rng: &mut R,
) -> Result<MaskPlan> {
    params.validate()?;
    let (frames, bins) = dims;
    if frames == 0 || bins == 0 {
        return Err(Error::EmptyDims { frames, bins });
    }
    let count = rng.random_range(params.patch_count.lo..=params.patch_count.hi);
    let mut patches = Vec::with_capacity(count);
    for _ in 0..count {
        let patch = match params.shape {
            MaskShape::Squares => {
                let wt = extent_cells(params.time_extent.sample(rng), frames);
                let wk = extent_cells(params.freq_extent.sample(rng), bins);
                let t0 = rng.random_range(0..=frames - wt);
                let k0 = rng.random_range(0..=bins - wk);
                Patch::Square {
                    t0,
                    t1: t0 + wt - 1,
                    k0,
                    k1: k0 + wk - 1,
                }
            }
            MaskShape::Bands => {
                let wk = extent_cells(params.freq_extent.sample(rng), bins);
                let k0 = rng.random_range(0..=bins - wk);
                Patch::Band { k0, k1: k0 + wk - 1 }
            }
            MaskShape::Singles => Patch::Single {
                k: rng.random_range(0..bins),
            },
            MaskShape::Gauss => {
                let tc = rng.random_range(0..frames) as f64;
                let kc = rng.random_range(0..bins) as f64;
                let sigma_t = params.sigma.sample(rng) * frames as f64;
                let sigma_k = params.sigma.sample(rng) * bins as f64;
                let peak = params.peak_alpha.sample(rng);
                Patch::Gauss {
                    tc,
                    kc,
                    sigma_t,
                    sigma_k,
                    peak,
                }
            }
        };
        patches.push(patch);
    }
    Ok(MaskPlan {
        shape: Some(params.shape),
        dims,
        patches,
    })
}

/// Hard cells become `fill.value`; Gaussian cells blend toward it.
pub fn apply_mask_spectrogram(
    spec: &ComplexSpectrogram,
    plan: &MaskPlan,
    fill: &ComplexMean,
) -> Result<ComplexSpectrogram> {
    plan.check_dims(spec.dims())?;
    let mut out = spec.clone();
    let value = fill.value;
    for (cell, action) in out.as_mut_slice().iter_mut().zip(plan.cell_actions()) {
        match action {
            CellAction::Keep => {}
            CellAction::Fill => *cell = value,
            CellAction::Blend(a) => *cell = *cell * (1.0 - a) + value * a,
        }
    }
    Ok(out)
}

/// Real-valued counterpart of [`apply_mask_spectrogram`]; time steps map to
/// frames and feature dimensions to bins.
pub fn apply_mask_features(
    features: &FeatureMatrix,
    plan: &MaskPlan,
    fill: f32,
) -> Result<FeatureMatrix> {
    plan.check_dims(features.dims())?;
    let mut out = features.clone();
    for (cell, action) in out.values_mut().iter_mut().zip(plan.cell_actions()) {
        match action {
            CellAction::Keep => {}
            CellAction::Fill => *cell = fill,
            CellAction::Blend(a) => {
                *cell = ((1.0 - a) * *cell as f64 + a * fill as f64) as f32;
            }
        }
    }
    Ok(out)
}

/// Everything MaskedSpec drew and computed for one signal.
#[derive(Debug, Clone)]
pub struct MaskedSpecOutcome {
    pub audio: AudioBuffer,
    pub plan: MaskPlan,
    pub fill: ComplexMean,
}

/// STFT, mask with the complex mean, inverse STFT. Output length equals
/// input length.
pub fn masked_spec_augment<R: Rng + ?Sized>(
    audio: &AudioBuffer,
    params: &MaskParams,
    config: &StftConfig,
    rng: &mut R,
) -> Result<AudioBuffer> {
    masked_spec_augment_with_plan(audio, params, config, rng).map(|o| o.audio)
}

pub fn masked_spec_augment_with_plan<R: Rng + ?Sized>(
    audio: &AudioBuffer,
    params: &MaskParams,
    config: &StftConfig,
    rng: &mut R,
) -> Result<MaskedSpecOutcome> {
    params.validate()?;
    let spec = compute_stft(audio, config)?;
    let fill = stft_mean(&spec)?;
    let plan = generate_mask_plan(params, spec.dims(), rng)?;
    let masked = apply_mask_spectrogram(&spec, &plan, &fill)?;
    let audio = compute_istft(&masked)?;
    Ok(MaskedSpecOutcome { audio, plan, fill })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn noise(len: usize, seed: u64) -> AudioBuffer {
        let mut r = rng(seed);
        AudioBuffer::new((0..len).map(|_| r.random_range(-0.5..0.5)).collect(), 16_000).unwrap()
    }

    /// Cell set of a plan's hard patches, by enumerating each rectangle.
    fn enumerate_cells(plan: &MaskPlan) -> BTreeSet<(usize, usize)> {
        let mut set = BTreeSet::new();
        for p in &plan.patches {
            let (t0, t1, k0, k1) = match *p {
                Patch::Square { t0, t1, k0, k1 } => (t0, t1, k0, k1),
                Patch::Band { k0, k1 } => (0, plan.dims.0 - 1, k0, k1),
                Patch::Single { k } => (0, plan.dims.0 - 1, k, k),
                Patch::Gauss { .. } => continue,
            };
            for t in t0..=t1 {
                for k in k0..=k1 {
                    set.insert((t, k));
                }
            }
        }
        set
    }

    #[test]
    fn zero_count_gives_empty_plan() {
        let p = MaskParams::new(MaskShape::Squares).with_patch_count(0, 0);
        let plan = generate_mask_plan(&p, (10, 10), &mut rng(1)).unwrap();
        assert!(plan.patches.is_empty());
    }

    #[test]
    fn single_spans_all_frames() {
        let p = MaskParams::new(MaskShape::Singles).with_patch_count(1, 1);
        let plan = generate_mask_plan(&p, (100, 257), &mut rng(2)).unwrap();
        assert_eq!(plan.patches.len(), 1);
        let Patch::Single { k } = plan.patches[0] else {
            panic!("expected single")
        };
        assert!(k < 257);
        let cells = enumerate_cells(&plan);
        assert_eq!(cells.len(), 100);
        assert!(cells.iter().all(|&(_, kk)| kk == k));
    }

    #[test]
    fn fixed_extent_squares() {
        let mut p = MaskParams::new(MaskShape::Squares).with_patch_count(2, 2);
        p.time_extent = Interval::point(0.1);
        p.freq_extent = Interval::point(0.1);
        for seed in 0..50 {
            let plan = generate_mask_plan(&p, (100, 100), &mut rng(seed)).unwrap();
            assert_eq!(plan.patches.len(), 2);
            for patch in &plan.patches {
                let Patch::Square { t0, t1, k0, k1 } = *patch else {
                    panic!()
                };
                assert_eq!((t1 - t0 + 1, k1 - k0 + 1), (10, 10));
                assert!(t1 < 100 && k1 < 100);
            }
            let cells = enumerate_cells(&plan);
            assert!(cells.len() <= 200);
            let flags = plan.hard_cells();
            let from_flags: BTreeSet<_> = (0..100 * 100)
                .filter(|&i| flags[i])
                .map(|i| (i / 100, i % 100))
                .collect();
            assert_eq!(cells, from_flags);
        }
    }

    #[test]
    fn bands_and_singles_span_time() {
        for shape in [MaskShape::Bands, MaskShape::Singles] {
            let plan =
                generate_mask_plan(&MaskParams::new(shape), (7, 50), &mut rng(3)).unwrap();
            for p in &plan.patches {
                let (t0, t1, _, _) = p.hard_rect(plan.dims).unwrap();
                assert_eq!((t0, t1), (0, 6));
            }
        }
    }

    #[test]
    fn empty_dims_rejected() {
        let p = MaskParams::new(MaskShape::Gauss);
        assert!(matches!(
            generate_mask_plan(&p, (0, 5), &mut rng(0)),
            Err(Error::EmptyDims { .. })
        ));
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = MaskParams::new(MaskShape::Squares);
        p.patch_count = Interval::new(3, 1);
        assert!(p.validate().is_err());
        let mut p = MaskParams::new(MaskShape::Gauss);
        p.peak_alpha = Interval::new(0.0, 0.5);
        assert!(p.validate().is_err());
        let mut p = MaskParams::new(MaskShape::Bands);
        p.freq_extent = Interval::new(0.5, 1.5);
        assert!(p.validate().is_err());
    }

    #[test]
    fn plan_out_of_bounds_rejected() {
        assert!(MaskPlan::new((5, 5), vec![Patch::Single { k: 5 }]).is_err());
        assert!(MaskPlan::new((5, 5), vec![Patch::Square { t0: 3, t1: 2, k0: 0, k1: 0 }]).is_err());
        assert!(MaskPlan::new(
            (5, 5),
            vec![Patch::Gauss { tc: 1.0, kc: 1.0, sigma_t: 1.0, sigma_k: 0.0, peak: 1.0 }]
        )
        .is_err());
    }

    #[test]
    fn empty_plan_is_identity_on_spectrogram() {
        let spec = compute_stft(&noise(2048, 4), &StftConfig::default()).unwrap();
        let fill = stft_mean(&spec).unwrap();
        let out = apply_mask_spectrogram(&spec, &MaskPlan::empty(spec.dims()), &fill).unwrap();
        assert_eq!(out, spec);
    }

    #[test]
    fn single_row_filled_exactly() {
        let spec = compute_stft(&noise(2048, 5), &StftConfig::default()).unwrap();
        let fill = stft_mean(&spec).unwrap();
        let plan = MaskPlan::new(spec.dims(), vec![Patch::Single { k: 5 }]).unwrap();
        let out = apply_mask_spectrogram(&spec, &plan, &fill).unwrap();
        for m in 0..spec.frames() {
            for k in 0..spec.bin_count() {
                if k == 5 {
                    assert_eq!(out.get(m, k), fill.value);
                } else {
                    assert_eq!(out.get(m, k), spec.get(m, k));
                }
            }
        }
    }

    #[test]
    fn gauss_center_and_tail() {
        let spec = compute_stft(&noise(16_000, 6), &StftConfig::default()).unwrap();
        let fill = stft_mean(&spec).unwrap();
        let (tc, kc, st, sk) = (20.0, 100.0, 3.0, 10.0);
        let plan = MaskPlan::new(
            spec.dims(),
            vec![Patch::Gauss { tc, kc, sigma_t: st, sigma_k: sk, peak: 1.0 }],
        )
        .unwrap();
        let out = apply_mask_spectrogram(&spec, &plan, &fill).unwrap();
        assert_eq!(out.get(20, 100), fill.value);
        let (t, k) = (20 + 15, 100 + 50);
        // blend formula evaluated directly
        let a = (-(12.5f64 + 12.5)).exp();
        let expected = spec.get(t, k) * (1.0 - a) + fill.value * a;
        assert!((out.get(t, k) - expected).norm() < 1e-12);
        assert!((out.get(t, k) - spec.get(t, k)).norm() < 1e-9);
    }

    #[test]
    fn hard_overrides_gauss() {
        let plan = MaskPlan::new(
            (4, 4),
            vec![
                Patch::Gauss { tc: 1.0, kc: 1.0, sigma_t: 1.0, sigma_k: 1.0, peak: 0.5 },
                Patch::Single { k: 1 },
            ],
        )
        .unwrap();
        let actions = plan.cell_actions();
        assert_eq!(actions[4 + 1], CellAction::Fill);
        assert!(matches!(actions[4 + 2], CellAction::Blend(_)));
    }

    #[test]
    fn gauss_weights_clamped() {
        let g = Patch::Gauss { tc: 2.0, kc: 2.0, sigma_t: 2.0, sigma_k: 2.0, peak: 1.0 };
        let plan = MaskPlan::new((5, 5), vec![g, g, g]).unwrap();
        let w = plan.blend_weights();
        assert!(w.iter().all(|&a| (0.0..=1.0).contains(&a)));
        assert_eq!(w[2 * 5 + 2], 1.0);
    }

    #[test]
    fn features_full_band_and_square() {
        let fm = FeatureMatrix::new(5, 5, vec![1.0; 25]).unwrap();
        let band = MaskPlan::new((5, 5), vec![Patch::Band { k0: 0, k1: 4 }]).unwrap();
        let out = apply_mask_features(&fm, &band, 3.5).unwrap();
        assert!(out.values().iter().all(|&v| v == 3.5));

        let sq = MaskPlan::new((5, 5), vec![Patch::Square { t0: 2, t1: 3, k0: 1, k1: 2 }]).unwrap();
        let out = apply_mask_features(&fm, &sq, 0.0).unwrap();
        let zeros: Vec<(usize, usize)> = (0..25)
            .filter(|&i| out.values()[i] == 0.0)
            .map(|i| (i / 5, i % 5))
            .collect();
        assert_eq!(zeros, vec![(2, 1), (2, 2), (3, 1), (3, 2)]);
        assert_eq!(apply_mask_features(&fm, &MaskPlan::empty((5, 5)), 0.0).unwrap(), fm);
    }

    #[test]
    fn dims_mismatch() {
        let fm = FeatureMatrix::new(2, 3, vec![0.0; 6]).unwrap();
        assert!(matches!(
            apply_mask_features(&fm, &MaskPlan::empty((3, 2)), 0.0),
            Err(Error::DimsMismatch { .. })
        ));
    }

    #[test]
    fn masked_spec_zero_patches_equals_resynthesis() {
        let x = noise(8000, 7);
        let cfg = StftConfig::default();
        let p = MaskParams::new(MaskShape::Bands).with_patch_count(0, 0);
        let y = masked_spec_augment(&x, &p, &cfg, &mut rng(1)).unwrap();
        let direct = compute_istft(&compute_stft(&x, &cfg).unwrap()).unwrap();
        assert_eq!(y, direct);
    }

    #[test]
    fn masked_spec_zero_input() {
        let x = AudioBuffer::new(vec![0.0; 4000], 16_000).unwrap();
        for shape in MaskShape::ALL {
            let y = masked_spec_augment(&x, &MaskParams::new(shape), &StftConfig::default(), &mut rng(9))
                .unwrap();
            let rms = (y.samples().iter().map(|v| v * v).sum::<f64>() / y.len() as f64).sqrt();
            assert!(rms <= 1e-9);
        }
    }

    #[test]
    fn masked_spec_deterministic() {
        let x = noise(6000, 8);
        let p = MaskParams::new(MaskShape::Gauss);
        let a = masked_spec_augment(&x, &p, &StftConfig::default(), &mut rng(42)).unwrap();
        let b = masked_spec_augment(&x, &p, &StftConfig::default(), &mut rng(42)).unwrap();
        let bits = |v: &AudioBuffer| v.samples().iter().map(|s| s.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn plan_json_round_trip() {
        let plan = generate_mask_plan(&MaskParams::new(MaskShape::Gauss), (10, 20), &mut rng(4)).unwrap();
        let json = serde_json::to_string(&plan).unwrap();
        assert!(json.contains("\"shape\":\"gauss\""));
        let back: MaskPlan = serde_json::from_str(&json).unwrap();
        assert_eq!(back, plan);
    }

    #[test]
    fn patch_counts_uniform() {
        let p = MaskParams::new(MaskShape::Singles).with_patch_count(1, 5);
        let mut r = rng(77);
        let mut hist = [0usize; 5];
        for _ in 0..1000 {
            let n = generate_mask_plan(&p, (10, 10), &mut r).unwrap().patches.len();
            assert!((1..=5).contains(&n));
            hist[n - 1] += 1;
        }
        let expected = 200.0;
        let chi2: f64 = hist.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
        // chi-square, 4 dof, p = 0.001
        assert!(chi2 < 18.467, "chi2 {chi2} hist {hist:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn hard_mask_leaves_outside_unchanged(
            seed in any::<u64>(),
            shape in prop_oneof![Just(MaskShape::Squares), Just(MaskShape::Bands), Just(MaskShape::Singles)],
        ) {
            let spec = compute_stft(&noise(3000, seed), &StftConfig::new(64, 32, crate::stft::Window::Hann).unwrap()).unwrap();
            let fill = stft_mean(&spec).unwrap();
            let plan = generate_mask_plan(&MaskParams::new(shape), spec.dims(), &mut rng(seed)).unwrap();
            let out = apply_mask_spectrogram(&spec, &plan, &fill).unwrap();
            let hard = plan.hard_cells();
            for (i, h) in hard.iter().enumerate() {
                if *h {
                    prop_assert_eq!(out.as_slice()[i], fill.value);
                } else {
                    prop_assert_eq!(out.as_slice()[i], spec.as_slice()[i]);
                }
            }
        }

        #[test]
        fn generation_is_reproducible(seed in any::<u64>(), frames in 1usize..80, bins in 1usize..300) {
            for shape in MaskShape::ALL {
                let p = MaskParams::new(shape);
                let a = generate_mask_plan(&p, (frames, bins), &mut rng(seed)).unwrap();
                let b = generate_mask_plan(&p, (frames, bins), &mut rng(seed)).unwrap();
                prop_assert_eq!(&a, &b);
                prop_assert!(a.validate().is_ok());
            }
        }

        #[test]
        fn output_length_preserved(seed in any::<u64>(), len in 512usize..5000) {
            let x = noise(len, seed);
            let p = MaskParams::new(MaskShape::Squares);
            let y = masked_spec_augment(&x, &p, &StftConfig::default(), &mut rng(seed)).unwrap();
            prop_assert_eq!(y.len(), len);
        }
    }
}
