use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("unsupported audio format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt WAV header: {0}")]
    CorruptHeader(String),
    #[error("audio buffer is empty")]
    EmptyBuffer,
    #[error("invalid audio buffer: {0}")]
    InvalidAudio(String),
    #[error("sample rate mismatch: expected {expected} Hz, got {actual} Hz")]
    SampleRateMismatch { expected: u32, actual: u32 },

    #[error("signal of {len} samples is shorter than one frame of {frame_size}")]
    SignalTooShort { len: usize, frame_size: usize },
    #[error("invalid STFT configuration: {0}")]
    InvalidStftConfig(String),
    #[error("configuration cannot be inverted: {0}")]
    NonInvertibleConfig(String),
    #[error("spectrogram is empty")]
    EmptySpectrogram,

    #[error("mask dimensions must be non-zero, got {frames}x{bins}")]
    EmptyDims { frames: usize, bins: usize },
    #[error("dimension mismatch: plan is {plan:?}, data is {data:?}")]
    DimsMismatch {
        plan: (usize, usize),
        data: (usize, usize),
    },
    #[error("invalid mask parameters: {0}")]
    InvalidMaskParams(String),
    #[error("invalid mask plan: {0}")]
    InvalidMaskPlan(String),

    #[error("cutoff {0} outside (0, 0.5)")]
    InvalidCutoff(f64),
    #[error("kernel length {0} must be odd and at least 3")]
    InvalidLength(usize),

    #[error("encoder unavailable: {0}")]
    EncoderUnavailable(String),
    #[error("subprocess `{command}` failed with exit code {code:?}: {stderr}")]
    SubprocessFailed {
        command: String,
        code: Option<i32>,
        stderr: String,
    },
    #[error("codec output unreadable: {0}")]
    OutputUnreadable(String),
    #[error("codec changed sample rate from {input} Hz to {output} Hz")]
    SampleRateChanged { input: u32, output: u32 },
    #[error("invalid codec spec: {0}")]
    InvalidCodecSpec(String),

    #[error("feature file format error: {0}")]
    FormatError(String),
    #[error("feature shape error: {0}")]
    ShapeError(String),

    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("duplicate utt_id `{utt_id}` on lines {first_line} and {second_line}")]
    DuplicateUttId {
        utt_id: String,
        first_line: usize,
        second_line: usize,
    },
    #[error("line {line}: unknown label `{label}` (expected `bonafide` or `spoof`)")]
    UnknownLabel { line: usize, label: String },
    #[error("score set needs at least one bonafide and one spoof record ({bonafide} bonafide, {spoof} spoof)")]
    DegenerateSet { bonafide: usize, spoof: usize },
    #[error("score sets cover different utterances: {0}")]
    UniverseMismatch(String),
    #[error("score sets disagree on labels or tags for `{0}`")]
    LabelConflict(String),
    #[error("fusion weights must be positive and match the number of sets: {0}")]
    NonPositiveWeight(String),
    #[error("no record carries a `{0}` tag")]
    MissingTag(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
