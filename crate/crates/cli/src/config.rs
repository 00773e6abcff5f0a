//! The experiment config: one TOML file holding every path, strategy,
//! hyperparameter, and seed, so any artifact can be replayed from the
//! file alone. Relative paths resolve against the config's directory.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use spoofcm_core::batcher::{BatchStrategy, FeedStrategy};
use spoofcm_core::synth::SynthConfig;
use spoofcm_core::trainer::{
    AdamConfig, ConvBlockSpec, EncoderConfig, LossSpec, TrainRunConfig,
};
use spoofcm_core::util::{derive_seed, fnv1a64};

use crate::failure::{CmdResult, FailExt, Failure};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub paths: PathsSection,
    #[serde(default)]
    pub synth: SynthSection,
    #[serde(default)]
    pub feed: FeedSection,
    #[serde(default)]
    pub batch: BatchSection,
    #[serde(default)]
    pub loss: LossSection,
    #[serde(default)]
    pub encoder: EncoderSection,
    #[serde(default)]
    pub trainer: TrainerSection,
    #[serde(default)]
    pub score: ScoreSection,
    #[serde(default)]
    pub fuse: FuseSection,
    #[serde(default)]
    pub report: ReportSection,
    #[serde(default)]
    pub seeds: SeedsSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    pub manifest: PathBuf,
    pub audio_root: PathBuf,
    pub cache_root: PathBuf,
    pub output_root: PathBuf,
    pub degraded_root: Option<PathBuf>,
    pub codec_list: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSection {
    pub n_utts: usize,
    pub n_speakers: usize,
}

impl Default for SynthSection {
    fn default() -> Self {
        SynthSection { n_utts: 200, n_speakers: 4 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeedSection {
    pub strategy: String,
}

impl Default for FeedSection {
    fn default() -> Self {
        FeedSection { strategy: "one_sec".into() }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BatchSection {
    pub strategy: String,
    pub batch_size: usize,
}

impl Default for BatchSection {
    fn default() -> Self {
        BatchSection { strategy: "random".into(), batch_size: 32 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossSection {
    pub kind: String,
    pub alpha: f64,
    /// AM-Softmax margin.
    pub margin: f64,
    /// OC-Softmax margins (bonafide, spoof).
    pub m0: f64,
    pub m1: f64,
}

impl Default for LossSection {
    fn default() -> Self {
        LossSection { kind: "oc_softmax".into(), alpha: 20.0, margin: 0.9, m0: 0.9, m1: 0.3 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EncoderSection {
    pub embed_dim: usize,
    /// One `[channels, kernel, stride]` triple per conv block.
    pub blocks: Vec<[usize; 3]>,
}

impl Default for EncoderSection {
    fn default() -> Self {
        EncoderSection { embed_dim: 256, blocks: vec![[8, 3, 2], [16, 3, 2]] }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainerSection {
    pub epochs: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub checkpoint_every: usize,
}

impl Default for TrainerSection {
    fn default() -> Self {
        TrainerSection {
            epochs: 10,
            lr: 3e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            checkpoint_every: 0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScoreSection {
    /// Checkpoint to score with; default `<output_root>/model.ckpt`.
    pub checkpoint: Option<PathBuf>,
    /// Score file name under `output_root`.
    pub output: String,
}

impl Default for ScoreSection {
    fn default() -> Self {
        ScoreSection { checkpoint: None, output: "scores.txt".into() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FuseSection {
    pub inputs: Vec<PathBuf>,
    pub weights: Vec<f64>,
    pub output: String,
}

impl Default for FuseSection {
    fn default() -> Self {
        FuseSection { inputs: Vec::new(), weights: Vec::new(), output: "fused.txt".into() }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportSection {
    /// Score file to report on, relative to `output_root` unless absolute.
    pub scores: PathBuf,
    /// Degradation plan; default `<degraded_root>/plan.txt`.
    pub plan: Option<PathBuf>,
    pub output: String,
}

impl Default for ReportSection {
    fn default() -> Self {
        ReportSection { scores: PathBuf::from("scores.txt"), plan: None, output: "report.csv".into() }
    }
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SeedsSection {
    pub master: u64,
    /// Optional per-stage overrides; without one, a stage seed is derived
    /// from the master seed and the stage name.
    pub synth: Option<u64>,
    pub plan: Option<u64>,
    pub degrade: Option<u64>,
    pub train: Option<u64>,
}

pub struct ExperimentConfig {
    raw: RawConfig,
    /// Directory of the config file; relative paths resolve against it.
    dir: PathBuf,
    /// FNV-1a of the raw config bytes, for reproducibility stamps.
    pub config_hash: u64,
    /// `--seed` override, replacing the master seed and any per-stage
    /// overrides.
    seed_flag: Option<u64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path, seed_flag: Option<u64>) -> CmdResult<Self> {
        let bytes = std::fs::read(path)
            .map_err(|e| Failure::config(format!("cannot read config {}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|e| Failure::config(format!("config {} is not UTF-8: {e}", path.display())))?;
        let raw: RawConfig = toml::from_str(text)
            .map_err(|e| Failure::config(format!("config {}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
        Ok(ExperimentConfig { raw, dir, config_hash: fnv1a64(&bytes), seed_flag })
    }

    pub fn raw(&self) -> &RawConfig {
        &self.raw
    }

    /// Resolves a path against the config file's directory unless it is
    /// already absolute.
    pub fn resolve_path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.dir.join(p)
        }
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.resolve_path(&self.raw.paths.manifest)
    }

    pub fn audio_root(&self) -> PathBuf {
        self.resolve_path(&self.raw.paths.audio_root)
    }

    pub fn cache_root(&self) -> PathBuf {
        self.resolve_path(&self.raw.paths.cache_root)
    }

    pub fn output_root(&self) -> PathBuf {
        self.resolve_path(&self.raw.paths.output_root)
    }

    pub fn degraded_root(&self) -> CmdResult<PathBuf> {
        self.raw
            .paths
            .degraded_root
            .as_deref()
            .map(|p| self.resolve_path(p))
            .ok_or_else(|| Failure::config("paths.degraded_root is not set"))
    }

    pub fn codec_list_path(&self) -> CmdResult<PathBuf> {
        self.raw
            .paths
            .codec_list
            .as_deref()
            .map(|p| self.resolve_path(p))
            .ok_or_else(|| Failure::config("paths.codec_list is not set"))
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        match &self.raw.score.checkpoint {
            Some(p) => self.resolve_path(p),
            None => self.output_root().join("model.ckpt"),
        }
    }

    pub fn plan_path(&self) -> CmdResult<PathBuf> {
        match &self.raw.report.plan {
            Some(p) => Ok(self.resolve_path(p)),
            None => Ok(self.degraded_root()?.join("plan.txt")),
        }
    }

    /// Resolves a path relative to `output_root` unless absolute.
    pub fn in_output(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.output_root().join(p)
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.seed_flag.unwrap_or(self.raw.seeds.master)
    }

    /// Seed for a pipeline stage: the `--seed` flag wins, then an explicit
    /// `[seeds]` override, then a derivation from the master seed.
    pub fn stage_seed(&self, stage: &str) -> u64 {
        if self.seed_flag.is_none() {
            let explicit = match stage {
                "synth" => self.raw.seeds.synth,
                "plan" => self.raw.seeds.plan,
                "degrade" => self.raw.seeds.degrade,
                "train" => self.raw.seeds.train,
                _ => None,
            };
            if let Some(s) = explicit {
                return s;
            }
        }
        derive_seed(self.master_seed(), stage)
    }

    pub fn synth_config(&self) -> CmdResult<SynthConfig> {
        let cfg = SynthConfig {
            n_utts: self.raw.synth.n_utts,
            n_speakers: self.raw.synth.n_speakers,
            seed: self.stage_seed("synth"),
        };
        cfg.validate().or_config()?;
        Ok(cfg)
    }

    pub fn feed_strategy(&self) -> CmdResult<FeedStrategy> {
        self.raw.feed.strategy.parse::<FeedStrategy>().or_config()
    }

    pub fn batch_strategy(&self) -> CmdResult<BatchStrategy> {
        self.raw.batch.strategy.parse::<BatchStrategy>().or_config()
    }

    pub fn loss_spec(&self) -> CmdResult<LossSpec> {
        let l = &self.raw.loss;
        match l.kind.as_str() {
            "softmax" => Ok(LossSpec::Softmax),
            "am_softmax" => Ok(LossSpec::AmSoftmax { alpha: l.alpha, margin: l.margin }),
            "oc_softmax" => Ok(LossSpec::OcSoftmax { alpha: l.alpha, m0: l.m0, m1: l.m1 }),
            other => Err(Failure::config(format!(
                "loss.kind `{other}` (expected softmax, am_softmax, or oc_softmax)"
            ))),
        }
    }

    pub fn encoder_config(&self) -> EncoderConfig {
        EncoderConfig {
            input_dim: spoofcm_core::frontend::FEATURE_DIM,
            blocks: self
                .raw
                .encoder
                .blocks
                .iter()
                .map(|&[channels, kernel, stride]| ConvBlockSpec { channels, kernel, stride })
                .collect(),
            embed_dim: self.raw.encoder.embed_dim,
        }
    }

    pub fn train_run_config(&self) -> CmdResult<TrainRunConfig> {
        let t = &self.raw.trainer;
        let batch_strategy = self.batch_strategy()?;
        if batch_strategy != BatchStrategy::Random && !self.raw.batch.batch_size.is_multiple_of(2) {
            return Err(Failure::config(format!(
                "batch.batch_size must be even for `{}`, got {}",
                self.raw.batch.strategy, self.raw.batch.batch_size
            )));
        }
        let run = TrainRunConfig {
            epochs: t.epochs,
            batch_size: self.raw.batch.batch_size,
            batch_strategy,
            feed: self.feed_strategy()?,
            encoder: self.encoder_config(),
            loss: self.loss_spec()?,
            adam: AdamConfig { lr: t.lr, beta1: t.beta1, beta2: t.beta2, eps: t.eps },
            seed: self.stage_seed("train"),
            checkpoint_every: t.checkpoint_every,
        };
        run.validate().or_config()?;
        Ok(run)
    }

    /// Validation-phase check that an input produced by an earlier stage
    /// exists.
    pub fn require_file(&self, path: &Path, what: &str) -> CmdResult<()> {
        if !path.is_file() {
            return Err(Failure::config(format!("{what} not found at {}", path.display())));
        }
        Ok(())
    }

    pub fn require_dir(&self, path: &Path, what: &str) -> CmdResult<()> {
        if !path.is_dir() {
            return Err(Failure::config(format!("{what} not found at {}", path.display())));
        }
        Ok(())
    }
}

/// Creates a directory (and parents) for an output artifact.
pub fn ensure_dir(path: &Path) -> CmdResult<()> {
    std::fs::create_dir_all(path)
        .map_err(|e| Failure::config(format!("cannot create {}: {e}", path.display())))
}
