//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // manifest / plan
    #[error("line {line}: duplicate utterance id `{utt_id}`")]
    DuplicateUtt { line: usize, utt_id: String },
    #[error("line {line}: unknown key token `{token}`")]
    UnknownKey { line: usize, token: String },
    #[error("line {line}: expected at least 3 fields, got {got}")]
    ShortLine { line: usize, got: usize },
    #[error("dev_count {dev_count} exceeds manifest size {total}")]
    DevCountTooLarge { dev_count: usize, total: usize },
    #[error("codec list is empty")]
    EmptyCodecList,

    // codecsim
    #[error("expected sample rate {expected} Hz, got {got} Hz")]
    RateMismatch { expected: u32, got: u32 },
    #[error("unsupported sample rate {0} Hz")]
    UnsupportedRate(u32),
    #[error("unsupported resample pair {from} Hz -> {to} Hz")]
    UnsupportedResamplePair { from: u32, to: u32 },
    #[error("unsupported bitrate {bitrate} bps for {codec}")]
    UnsupportedBitrate { codec: &'static str, bitrate: u32 },
    #[error("non-finite sample at index {0}")]
    NonFiniteSample(usize),
    #[error("invalid codec config `{config}`: {reason}")]
    InvalidCodecConfig { config: String, reason: String },
    #[error("external codec command `{cmd}` failed: {reason}")]
    ExternalCommand { cmd: String, reason: String },

    // frontend
    #[error("input too short: {len} samples, need at least {min}")]
    InputTooShort { len: usize, min: usize },
    #[error("invalid feature cache: {0}")]
    InvalidCache(String),

    // losses / trainer
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("zero-norm vector in {0}")]
    ZeroNorm(String),
    #[error("invalid margins: m0 = {m0} must exceed m1 = {m1}")]
    InvalidMargins { m0: f64, m1: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("training diverged at {0}")]
    Diverged(String),
    #[error("invalid checkpoint: {0}")]
    InvalidCheckpoint(String),

    // batcher
    #[error("batch size {0} must be even for custom strategies")]
    OddBatchSize(usize),
    #[error("manifest must contain both classes for strategy {0}")]
    MissingClass(&'static str),
    #[error("{group} `{token}` has spoofed samples but no bonafide partner")]
    NoPartner { group: &'static str, token: String },
    #[error("utterance `{0}` has no codec_tag (custom_sim needs a tagged manifest)")]
    MissingCodecTag(String),
    #[error("empty batch input")]
    EmptyBatch,
    #[error("zero-length waveform `{0}`")]
    EmptyWaveform(String),

    // metrics
    #[error("empty {0} score list")]
    EmptyClass(&'static str),
    #[error("score files disagree on utterance sets: {0}")]
    UttSetMismatch(String),
    #[error("weights must be non-negative and not all zero")]
    BadWeights,
    #[error("plan does not cover utterance `{0}`")]
    PlanMissingUtt(String),

    // io
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid wav file {path}: {reason}")]
    InvalidWav { path: PathBuf, reason: String },
    #[error("{0}")]
    Parse(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
