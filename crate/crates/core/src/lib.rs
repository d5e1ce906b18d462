//! Deterministic audio augmentation and anti-spoofing evaluation.
//!
//! Raw-audio augmentations ([`codec`], [`filters`], [`masking`]) and
//! feature-level augmentations ([`features`]) are pure functions of their
//! inputs and an explicit random stream. [`pipeline`] applies them to whole
//! corpora with per-file seeds; [`eval`] scores detectors with EER, fusion
//! and pooled analysis.
//!
//! ```
//! use rand::SeedableRng;
//! use rand_chacha::ChaCha8Rng;
//! use spoofaug::{masked_spec_augment, AudioBuffer, MaskParams, MaskShape, StftConfig};
//!
//! let audio = AudioBuffer::new((0..4000).map(|n| (n as f64 * 0.05).sin()).collect(), 16_000)?;
//! let mut rng = ChaCha8Rng::seed_from_u64(42);
//! let masked = masked_spec_augment(&audio, &MaskParams::new(MaskShape::Bands), &StftConfig::default(), &mut rng)?;
//! assert_eq!(masked.len(), audio.len());
//! # Ok::<(), spoofaug::Error>(())
//! ```

pub mod audio;
pub mod cli;
pub mod codec;
pub mod error;
pub mod eval;
pub mod features;
pub mod filters;
pub mod masking;
pub mod pipeline;
pub mod stft;

pub use audio::{read_wav, write_wav, AudioBuffer};
pub use codec::{check_encoder, codec_roundtrip, Codec, CodecSpec, EncoderReport};
pub use error::{Error, Result};
pub use eval::{compute_eer, fuse_score_sets, load_scores, pooled_eer, EerResult, GroupBy, Label, ScoreRecord, ScoreSet};
pub use features::{
    load_features, masked_feature_augment, normalize_features, save_features, FeatureMatrix,
    NormalizeMode,
};
pub use filters::{apply_fir, design_lpf_kernel, random_lpf_augment, FilterKernel};
pub use masking::{
    apply_mask_features, apply_mask_spectrogram, generate_mask_plan, masked_spec_augment,
    Interval, MaskParams, MaskPlan, MaskShape, Patch,
};
pub use pipeline::{derive_file_seed, run_augment_pipeline, PipelineConfig, PipelineMode, RunOptions};
pub use stft::{compute_istft, compute_stft, stft_mean, ComplexMean, ComplexSpectrogram, StftConfig, Window};
