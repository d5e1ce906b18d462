//! Batch corpus augmentation driven by a TOML configuration.
//!
//! Every file gets its own ChaCha8 stream seeded from the master seed and
//! its relative path, so outputs do not depend on corpus order, subsetting
//! or thread count. Stages run in configured order and each fires on an
//! independent Bernoulli draw.

use std::fs;
use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use walkdir::WalkDir;

use crate::audio::{read_wav, write_wav, AudioBuffer, DEFAULT_SAMPLE_RATE};
use crate::codec::{check_encoder, codec_roundtrip, set_subprocess_limit, Codec, CodecSpec};
use crate::error::{Error, Result};
use crate::features::{
    load_features, masked_feature_augment_with_plan, normalize_features_with, save_features,
    FeatureMatrix, NormalizeMode,
};
use crate::filters::{apply_fir, design_lpf_kernel, draw_cutoff, validate_cutoff_range, DEFAULT_CUTOFF_RANGE, DEFAULT_TAPS};
use crate::masking::{masked_spec_augment_with_plan, Interval, MaskParams, MaskShape};
use crate::stft::StftConfig;

pub const MANIFEST_NAME: &str = "manifest.jsonl";
pub const PROVENANCE_SUFFIX: &str = ".provenance.json";

const FNV_OFFSET_BASIS: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a 64 of the UTF-8 relative path, XORed with the master seed.
pub fn derive_file_seed(master_seed: u64, relative_path: &str) -> u64 {
    fnv1a64(relative_path.as_bytes()) ^ master_seed
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET_BASIS, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineMode {
    Audio,
    Features,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodecOption {
    pub codec: Codec,
    #[serde(default)]
    pub bitrate_kbps: u32,
    #[serde(default = "one")]
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodecStage {
    #[serde(default = "one")]
    pub probability: f64,
    /// One option is drawn per firing, proportionally to `weight`.
    pub options: Vec<CodecOption>,
    #[serde(default)]
    pub encoder_template: Option<String>,
    #[serde(default)]
    pub decoder_template: Option<String>,
}

impl CodecStage {
    pub fn spec(&self, option: &CodecOption) -> CodecSpec {
        let mut spec = CodecSpec::new(option.codec, option.bitrate_kbps);
        if let Some(t) = &self.encoder_template {
            spec.encoder_template = t.clone();
        }
        if let Some(t) = &self.decoder_template {
            spec.decoder_template = t.clone();
        }
        spec
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LpfStage {
    #[serde(default = "one")]
    pub probability: f64,
    #[serde(default = "default_cutoff_range")]
    pub cutoff_range: Interval<f64>,
    #[serde(default = "default_taps")]
    pub taps: usize,
}

fn default_cutoff_range() -> Interval<f64> {
    DEFAULT_CUTOFF_RANGE
}

fn default_taps() -> usize {
    DEFAULT_TAPS
}

/// Mask stage; unset ranges take the shape's defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskStage {
    #[serde(default = "one")]
    pub probability: f64,
    pub shape: MaskShape,
    #[serde(default)]
    pub patch_count: Option<Interval<usize>>,
    #[serde(default)]
    pub time_extent: Option<Interval<f64>>,
    #[serde(default)]
    pub freq_extent: Option<Interval<f64>>,
    #[serde(default)]
    pub sigma: Option<Interval<f64>>,
    #[serde(default)]
    pub peak_alpha: Option<Interval<f64>>,
}

impl MaskStage {
    pub fn params(&self) -> MaskParams {
        let mut p = MaskParams::new(self.shape);
        if let Some(v) = self.patch_count {
            p.patch_count = v;
        }
        if let Some(v) = self.time_extent {
            p.time_extent = v;
        }
        if let Some(v) = self.freq_extent {
            p.freq_extent = v;
        }
        if let Some(v) = self.sigma {
            p.sigma = v;
        }
        if let Some(v) = self.peak_alpha {
            p.peak_alpha = v;
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizeStage {
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default)]
    pub mode: NormalizeMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StageSpec {
    Codec(CodecStage),
    Lpf(LpfStage),
    MaskedSpec(MaskStage),
    MaskedFeature(MaskStage),
    NormalizeFeatures(NormalizeStage),
}

impl StageSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            StageSpec::Codec(_) => "codec",
            StageSpec::Lpf(_) => "lpf",
            StageSpec::MaskedSpec(_) => "masked_spec",
            StageSpec::MaskedFeature(_) => "masked_feature",
            StageSpec::NormalizeFeatures(_) => "normalize_features",
        }
    }

    fn mode(&self) -> PipelineMode {
        match self {
            StageSpec::Codec(_) | StageSpec::Lpf(_) | StageSpec::MaskedSpec(_) => PipelineMode::Audio,
            StageSpec::MaskedFeature(_) | StageSpec::NormalizeFeatures(_) => PipelineMode::Features,
        }
    }

    fn probability(&self) -> Option<f64> {
        match self {
            StageSpec::Codec(s) => Some(s.probability),
            StageSpec::Lpf(s) => Some(s.probability),
            StageSpec::MaskedSpec(s) | StageSpec::MaskedFeature(s) => Some(s.probability),
            StageSpec::NormalizeFeatures(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoConfig {
    pub input_dir: PathBuf,
    /// Optional list of relative paths, one per line; otherwise the input
    /// directory is walked.
    #[serde(default)]
    pub manifest: Option<PathBuf>,
    pub output_dir: PathBuf,
    #[serde(default = "default_rate")]
    pub sample_rate: u32,
    /// Where codec temporaries go; defaults to the system temp directory.
    #[serde(default)]
    pub work_dir: Option<PathBuf>,
}

fn default_rate() -> u32 {
    DEFAULT_SAMPLE_RATE
}

fn default_parallelism() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default)]
    pub subprocess_limit: Option<usize>,
    #[serde(default)]
    pub stft: StftConfig,
    pub io: IoConfig,
    #[serde(default)]
    pub stages: Vec<StageSpec>,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Loads a config file; relative I/O paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.io.input_dir);
        resolve(&mut cfg.io.output_dir);
        if let Some(m) = cfg.io.manifest.as_mut() {
            resolve(m);
        }
        if let Some(w) = cfg.io.work_dir.as_mut() {
            resolve(w);
        }
        Ok(cfg)
    }

    /// Checks everything that would make a run fail wholesale.
    pub fn validate(&self, mode: PipelineMode) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.parallelism == 0 {
            return bad("parallelism must be positive".into());
        }
        if self.io.sample_rate == 0 {
            return bad("sample_rate must be positive".into());
        }
        self.stft.validate().map_err(|e| Error::Config(e.to_string()))?;
        for (i, stage) in self.stages.iter().enumerate() {
            let ctx = |e: Error| Error::Config(format!("stage {i} ({}): {e}", stage.kind()));
            if stage.mode() != mode {
                return bad(format!(
                    "stage {i} ({}) is not valid in {mode:?} mode",
                    stage.kind()
                ));
            }
            if let Some(p) = stage.probability() {
                if !(0.0..=1.0).contains(&p) {
                    return bad(format!("stage {i}: probability {p} outside [0, 1]"));
                }
            }
            match stage {
                StageSpec::Codec(c) => {
                    if c.options.is_empty() {
                        return bad(format!("stage {i}: codec stage needs at least one option"));
                    }
                    WeightedIndex::new(c.options.iter().map(|o| o.weight))
                        .map_err(|e| Error::Config(format!("stage {i}: codec weights: {e}")))?;
                    for option in &c.options {
                        let spec = c.spec(option);
                        spec.validate().map_err(ctx)?;
                        let report = check_encoder(&spec);
                        if !report.available {
                            return bad(format!(
                                "stage {i}: encoder for {:?} unavailable: {}",
                                option.codec, report.diagnostic
                            ));
                        }
                    }
                }
                StageSpec::Lpf(l) => {
                    validate_cutoff_range(&l.cutoff_range).map_err(ctx)?;
                    design_lpf_kernel(l.cutoff_range.lo, l.taps).map_err(ctx)?;
                }
                StageSpec::MaskedSpec(m) => {
                    m.params().validate().map_err(ctx)?;
                    if !self.stft.is_invertible() {
                        return bad(format!("stage {i}: STFT config {:?} is not invertible", self.stft));
                    }
                }
                StageSpec::MaskedFeature(m) => m.params().validate().map_err(ctx)?,
                StageSpec::NormalizeFeatures(_) => {}
            }
        }
        if !self.io.input_dir.is_dir() {
            return bad(format!("input_dir {} is not a directory", self.io.input_dir.display()));
        }
        Ok(())
    }
}

/// What one stage did to one file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRecord {
    pub kind: String,
    pub applied: bool,
    /// Values drawn for this firing (cutoff, codec choice, patch count...).
    #[serde(skip_serializing_if = "Value::is_null")]
    pub params: Value,
    /// Realized mask plan, present only with provenance enabled.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FileStatus {
    Ok,
    Error,
}

/// One manifest line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub seed: u64,
    pub status: FileStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub stages: Vec<StageRecord>,
}

impl FileRecord {
    pub fn applied_stages(&self) -> usize {
        self.stages.iter().filter(|s| s.applied).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub processed: usize,
    pub succeeded: usize,
    pub failed: usize,
    pub manifest: PathBuf,
}

impl RunSummary {
    /// 0 when every file succeeded, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.failed == 0 {
            0
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub mode: PipelineMode,
    pub emit_provenance: bool,
}

fn has_extension(path: &Path, mode: PipelineMode) -> bool {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    matches!(
        (mode, ext.as_deref()),
        (PipelineMode::Audio, Some("wav")) | (PipelineMode::Features, Some("safm" | "csv"))
    )
}

/// Relative input paths with `/` separators, sorted.
pub fn discover_inputs(config: &PipelineConfig, mode: PipelineMode) -> Result<Vec<String>> {
    let mut paths: Vec<String> = if let Some(list) = &config.io.manifest {
        fs::read_to_string(list)
            .map_err(|e| Error::Config(format!("manifest {}: {e}", list.display())))?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.replace('\\', "/"))
            .collect()
    } else {
        let root = &config.io.input_dir;
        let out = fs::canonicalize(&config.io.output_dir).ok();
        WalkDir::new(root)
            .into_iter()
            .filter_entry(|e| out.as_deref().is_none_or(|o| fs::canonicalize(e.path()).ok().as_deref() != Some(o)))
            .filter_map(|e| e.ok())
            .filter(|e| e.file_type().is_file() && has_extension(e.path(), mode))
            .filter_map(|e| {
                e.path().strip_prefix(root).ok().map(|rel| {
                    rel.components()
                        .map(|c| c.as_os_str().to_string_lossy().into_owned())
                        .collect::<Vec<_>>()
                        .join("/")
                })
            })
            .collect()
    };
    paths.sort();
    paths.dedup();
    Ok(paths)
}

/// Runs the whole corpus and writes the manifest. Config problems abort
/// before any file is touched; per-file failures are recorded and skipped.
pub fn run_augment_pipeline(config: &PipelineConfig, options: RunOptions) -> Result<RunSummary> {
    config.validate(options.mode)?;
    if let Some(limit) = config.subprocess_limit {
        set_subprocess_limit(limit);
    }
    let inputs = discover_inputs(config, options.mode)?;
    fs::create_dir_all(&config.io.output_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let records: Vec<FileRecord> = pool.install(|| {
        inputs
            .par_iter()
            .map(|rel| process_file(config, rel, options))
            .collect()
    });

    let manifest = config.io.output_dir.join(MANIFEST_NAME);
    let mut text = String::new();
    for r in &records {
        text.push_str(&serde_json::to_string(&serde_json::to_value(r)?)?);
        text.push('\n');
    }
    fs::write(&manifest, text)?;
    let failed = records.iter().filter(|r| r.status == FileStatus::Error).count();
    Ok(RunSummary {
        processed: records.len(),
        succeeded: records.len() - failed,
        failed,
        manifest,
    })
}

/// Augments a single file in isolation. Given the same config this
/// reproduces exactly what a full run writes for `relative_path`.
pub fn process_file(config: &PipelineConfig, relative_path: &str, options: RunOptions) -> FileRecord {
    let seed = derive_file_seed(config.master_seed, relative_path);
    let mut stages = Vec::new();
    let result = match options.mode {
        PipelineMode::Audio => augment_audio_file(config, relative_path, seed, options, &mut stages),
        PipelineMode::Features => augment_feature_file(config, relative_path, seed, options, &mut stages),
    };
    let mut record = FileRecord {
        path: relative_path.to_string(),
        seed,
        status: FileStatus::Ok,
        error: None,
        stages,
    };
    if let Err(e) = result {
        record.status = FileStatus::Error;
        record.error = Some(e.to_string());
    }
    if options.emit_provenance && record.status == FileStatus::Ok {
        let side = config
            .io
            .output_dir
            .join(format!("{relative_path}{PROVENANCE_SUFFIX}"));
        let written = serde_json::to_value(&record)
            .and_then(|v| serde_json::to_string_pretty(&v))
            .map_err(Error::from)
            .and_then(|t| fs::write(&side, t + "\n").map_err(Error::from));
        if let Err(e) = written {
            record.status = FileStatus::Error;
            record.error = Some(format!("provenance: {e}"));
        }
    }
    record
}

fn output_path(config: &PipelineConfig, rel: &str) -> Result<PathBuf> {
    let out = config.io.output_dir.join(rel);
    if let Some(parent) = out.parent() {
        fs::create_dir_all(parent)?;
    }
    Ok(out)
}

/// Bernoulli draw; always consumes one value so later draws stay aligned.
fn fires<R: Rng>(rng: &mut R, probability: f64) -> bool {
    rng.random::<f64>() < probability
}

fn augment_audio_file(
    config: &PipelineConfig,
    rel: &str,
    seed: u64,
    options: RunOptions,
    records: &mut Vec<StageRecord>,
) -> Result<()> {
    let input = config.io.input_dir.join(rel);
    let mut audio = read_wav(&input)?;
    if audio.sample_rate() != config.io.sample_rate {
        return Err(Error::SampleRateMismatch {
            expected: config.io.sample_rate,
            actual: audio.sample_rate(),
        });
    }
    audio.ensure_non_empty()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let work_dir = config.io.work_dir.clone().unwrap_or_else(std::env::temp_dir);
    let mut applied = false;
    for stage in &config.stages {
        let p = stage.probability().unwrap_or(1.0);
        if !fires(&mut rng, p) {
            records.push(StageRecord {
                kind: stage.kind().into(),
                applied: false,
                params: Value::Null,
                plan: None,
            });
            continue;
        }
        let (next, params, plan): (AudioBuffer, Value, Option<Value>) = match stage {
            StageSpec::Codec(c) => {
                let dist = WeightedIndex::new(c.options.iter().map(|o| o.weight))
                    .map_err(|e| Error::Config(e.to_string()))?;
                let option = &c.options[dist.sample(&mut rng)];
                let out = codec_roundtrip(&audio, &c.spec(option), &work_dir)?;
                (out, json!({"codec": option.codec, "bitrate_kbps": option.bitrate_kbps}), None)
            }
            StageSpec::Lpf(l) => {
                let fc = draw_cutoff(&l.cutoff_range, &mut rng)?;
                let out = apply_fir(&audio, &design_lpf_kernel(fc, l.taps)?)?;
                (out, json!({"cutoff": fc, "taps": l.taps}), None)
            }
            StageSpec::MaskedSpec(m) => {
                let o = masked_spec_augment_with_plan(&audio, &m.params(), &config.stft, &mut rng)?;
                let params = json!({
                    "shape": m.shape,
                    "patches": o.plan.patches.len(),
                    "fill_magnitude": o.fill.magnitude,
                    "fill_phase": o.fill.phase,
                });
                let plan = options
                    .emit_provenance
                    .then(|| serde_json::to_value(&o.plan))
                    .transpose()?;
                (o.audio, params, plan)
            }
            StageSpec::MaskedFeature(_) | StageSpec::NormalizeFeatures(_) => {
                unreachable!("rejected by validation")
            }
        };
        audio = next;
        applied = true;
        records.push(StageRecord {
            kind: stage.kind().into(),
            applied: true,
            params,
            plan,
        });
    }
    let out = output_path(config, rel)?;
    if applied {
        write_wav(&audio, &out)?;
    } else {
        fs::copy(&input, &out)?;
    }
    Ok(())
}

fn augment_feature_file(
    config: &PipelineConfig,
    rel: &str,
    seed: u64,
    options: RunOptions,
    records: &mut Vec<StageRecord>,
) -> Result<()> {
    let input = config.io.input_dir.join(rel);
    let mut features: FeatureMatrix = load_features(&input)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut applied = false;
    for stage in &config.stages {
        let record = match stage {
            StageSpec::MaskedFeature(m) => {
                if fires(&mut rng, m.probability) {
                    let o = masked_feature_augment_with_plan(&features, &m.params(), &mut rng)?;
                    let plan = options
                        .emit_provenance
                        .then(|| serde_json::to_value(&o.plan))
                        .transpose()?;
                    let params = json!({"shape": m.shape, "patches": o.plan.patches.len(), "fill": o.fill});
                    features = o.features;
                    Some((params, plan))
                } else {
                    None
                }
            }
            StageSpec::NormalizeFeatures(n) => n.enabled.then(|| {
                features = normalize_features_with(&features, n.mode);
                (json!({"mode": n.mode}), None)
            }),
            _ => unreachable!("rejected by validation"),
        };
        applied |= record.is_some();
        let (params, plan) = record.unwrap_or((Value::Null, None));
        records.push(StageRecord {
            kind: stage.kind().into(),
            applied: !params.is_null(),
            params,
            plan,
        });
    }
    let out = output_path(config, rel)?;
    if applied {
        save_features(&features, &out)?;
    } else {
        fs::copy(&input, &out)?;
    }
    Ok(())
}
