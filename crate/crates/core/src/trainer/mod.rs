//! Training loop and evaluation: batches come from the batcher, fed
//! audio is featurized on the fly, the conv encoder embeds it, and one
//! Adam state updates encoder and loss head together.
//!
//! All randomness inside an epoch derives from the run seed and the
//! epoch/batch position, so a (config, seeds, data) triple fully
//! determines the trajectory and every artifact downstream.

mod adam;
mod checkpoint;
mod encoder;

pub use adam::{AdamConfig, AdamState};
pub use checkpoint::Checkpoint;
pub use encoder::{ConvBlockSpec, Encoder, EncoderConfig, EncoderGrads};

use std::fmt::Write as _;

use ndarray::{s, Array2, ArrayView2};

use crate::audio::Waveform;
use crate::batcher::{feed, make_batches, BatchStrategy, FeedStrategy};
use crate::error::{Error, Result};
use crate::frontend;
use crate::losses::LossHead;
use crate::manifest::Manifest;
use crate::metrics::ScoreFile;
use crate::util::derive_seed;

/// Frames per 1-second evaluation chunk. At a 10 ms hop with a 20 ms
/// window, one second of audio yields 99 frames regardless of rate.
pub const CHUNK_FRAMES: usize = 99;
/// Hop between chunk starts, in frames. 100 frames = 1 s of hop, so
/// chunk k covers exactly the frames of audio samples [k·rate, k·rate + rate).
pub const CHUNK_HOP_FRAMES: usize = 100;

/// Supplies waveforms for training (feeding crops raw audio).
pub trait AudioSource {
    fn waveform(&self, utt_id: &str) -> Result<Waveform>;
}

/// Supplies full-utterance T×60 feature matrices for evaluation.
pub trait FeatureSource {
    fn features(&self, utt_id: &str) -> Result<Array2<f32>>;
}

/// Loss head selection with its hyperparameters; the head itself is
/// built at `Trainer::new` time against the encoder's embedding dim.
#[derive(Debug, Clone, PartialEq)]
pub enum LossSpec {
    Softmax,
    AmSoftmax { alpha: f64, margin: f64 },
    OcSoftmax { alpha: f64, m0: f64, m1: f64 },
}

impl Default for LossSpec {
    fn default() -> Self {
        LossSpec::OcSoftmax { alpha: 20.0, m0: 0.9, m1: 0.3 }
    }
}

impl LossSpec {
    pub fn build(&self, dim: usize, seed: u64) -> Result<LossHead> {
        match *self {
            LossSpec::Softmax => Ok(LossHead::new_softmax(dim, seed)),
            LossSpec::AmSoftmax { alpha, margin } => {
                LossHead::new_am_softmax(dim, alpha, margin, seed)
            }
            LossSpec::OcSoftmax { alpha, m0, m1 } => {
                LossHead::new_oc_softmax(dim, alpha, m0, m1, seed)
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LossSpec::Softmax => "softmax",
            LossSpec::AmSoftmax { .. } => "am_softmax",
            LossSpec::OcSoftmax { .. } => "oc_softmax",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainRunConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub batch_strategy: BatchStrategy,
    pub feed: FeedStrategy,
    pub encoder: EncoderConfig,
    pub loss: LossSpec,
    pub adam: AdamConfig,
    pub seed: u64,
    /// Epochs between checkpoint snapshots for callers that persist them;
    /// 0 means final-only. The loop itself never touches the filesystem.
    pub checkpoint_every: usize,
}

impl Default for TrainRunConfig {
    fn default() -> Self {
        TrainRunConfig {
            epochs: 10,
            batch_size: 32,
            batch_strategy: BatchStrategy::Random,
            feed: FeedStrategy::OneSec,
            encoder: EncoderConfig::default(),
            loss: LossSpec::default(),
            adam: AdamConfig::default(),
            seed: 0,
            checkpoint_every: 0,
        }
    }
}

impl TrainRunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Parse("batch_size must be positive".into()));
        }
        self.encoder.validate()?;
        self.adam.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    /// 1-based epoch number as it appears in the trace.
    pub epoch: usize,
    pub mean_loss: f64,
    pub batches: usize,
}

pub fn trace_to_csv(trace: &[EpochStats]) -> String {
    let mut out = String::from("epoch,mean_loss,batches\n");
    for s in trace {
        let _ = writeln!(out, "{},{:.6},{}", s.epoch, s.mean_loss, s.batches);
    }
    out
}

pub struct Trainer {
    run: TrainRunConfig,
    encoder: Encoder,
    head: LossHead,
    adam: AdamState,
    epochs_done: usize,
}

impl Trainer {
    pub fn new(run: TrainRunConfig) -> Result<Self> {
        run.validate()?;
        let encoder = Encoder::new(run.encoder.clone(), run.seed)?;
        let head = run.loss.build(run.encoder.embed_dim, run.seed)?;
        let adam = AdamState::new(run.adam)?;
        Ok(Trainer { run, encoder, head, adam, epochs_done: 0 })
    }

    pub fn run_config(&self) -> &TrainRunConfig {
        &self.run
    }

    pub fn epochs_done(&self) -> usize {
        self.epochs_done
    }

    pub fn encoder(&self) -> &Encoder {
        &self.encoder
    }

    pub fn head(&self) -> &LossHead {
        &self.head
    }

    /// Runs one full pass over the manifest and advances the epoch
    /// counter. Batch composition and crops are re-drawn per epoch from
    /// seeds derived off the epoch index.
    pub fn run_epoch(
        &mut self,
        manifest: &Manifest,
        audio: &dyn AudioSource,
    ) -> Result<EpochStats> {
        let e = self.epochs_done;
        let plan_seed = derive_seed(self.run.seed, &format!("epoch{e}"));
        let batches = make_batches(
            manifest,
            self.run.batch_strategy,
            self.run.batch_size,
            plan_seed,
        )?;
        if batches.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let mut total = 0.0;
        for (bi, batch) in batches.iter().enumerate() {
            total += self.train_batch(manifest, audio, batch, e, bi)?;
        }
        self.epochs_done += 1;
        Ok(EpochStats {
            epoch: e + 1,
            mean_loss: total / batches.len() as f64,
            batches: batches.len(),
        })
    }

    fn train_batch(
        &mut self,
        manifest: &Manifest,
        audio: &dyn AudioSource,
        batch: &[usize],
        epoch: usize,
        batch_index: usize,
    ) -> Result<f64> {
        let records = manifest.records();
        let mut waves = Vec::with_capacity(batch.len());
        for &idx in batch {
            waves.push(audio.waveform(&records[idx].utt_id)?);
        }
        let rate = waves[0].rate();
        if let Some(w) = waves.iter().find(|w| w.rate() != rate) {
            return Err(Error::RateMismatch { expected: rate, got: w.rate() });
        }

        let items: Vec<(&str, &[f32])> = batch
            .iter()
            .zip(&waves)
            .map(|(&idx, w)| (records[idx].utt_id.as_str(), w.samples()))
            .collect();
        let feed_seed = derive_seed(self.run.seed, &format!("feed.e{epoch}.b{batch_index}"));
        let fed = feed(&items, self.run.feed, feed_seed)?;

        let mut embeddings = Array2::zeros((batch.len(), self.encoder.embed_dim()));
        let mut caches = Vec::with_capacity(batch.len());
        for (i, row) in fed.rows().into_iter().enumerate() {
            let wave = Waveform::new(row.to_vec(), rate)?;
            let feats = frontend::extract(&wave)?.mapv(f64::from);
            let (embed, cache) = self.encoder.forward(feats.view())?;
            embeddings.row_mut(i).assign(&embed);
            caches.push(cache);
        }

        let labels: Vec<usize> = batch.iter().map(|&idx| records[idx].key.label()).collect();
        let out = self.head.forward(&embeddings, &labels)?;
        if !out.loss.is_finite() {
            return Err(Error::Diverged(format!(
                "epoch {}, batch {batch_index}",
                epoch + 1
            )));
        }

        let mut grads = self.encoder.zero_grads();
        for (i, cache) in caches.iter().enumerate() {
            self.encoder.backward(cache, out.grad_x.row(i), &mut grads);
        }

        // one optimizer step across encoder and head together
        self.adam.begin_step();
        let grad_vecs: Vec<Vec<f64>> = {
            let mut v = Vec::new();
            for (dw, db) in &grads.blocks {
                v.push(dw.iter().copied().collect());
                v.push(db.iter().copied().collect());
            }
            v.push(grads.proj_w.iter().copied().collect());
            v.push(grads.proj_b.iter().copied().collect());
            v
        };
        for ((name, param), grad) in self.encoder.tensors_mut().into_iter().zip(&grad_vecs) {
            self.adam.update(&name, param, grad)?;
        }
        for ((name, w), grad) in self.head.params_mut().into_iter().zip(&out.grad_w) {
            self.adam.update(
                name,
                w.as_slice_mut().expect("head weights are contiguous"),
                grad.as_slice().expect("head grads are contiguous"),
            )?;
        }
        Ok(out.loss)
    }

    /// Snapshot of everything evaluation needs.
    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            run: self.run.clone(),
            epochs_done: self.epochs_done,
            encoder: self.encoder.clone(),
            head: self.head.clone(),
        }
    }
}

/// Convenience driver: fresh trainer, `run.epochs` epochs, final
/// checkpoint plus the per-epoch loss trace.
pub fn train(
    run: TrainRunConfig,
    manifest: &Manifest,
    audio: &dyn AudioSource,
) -> Result<(Checkpoint, Vec<EpochStats>)> {
    let mut trainer = Trainer::new(run)?;
    let mut trace = Vec::with_capacity(trainer.run.epochs);
    for _ in 0..trainer.run.epochs {
        trace.push(trainer.run_epoch(manifest, audio)?);
    }
    Ok((trainer.checkpoint(), trace))
}

pub struct EvalOutcome {
    pub scores: ScoreFile,
    /// Utterances that could not be scored, with the reason; evaluation
    /// continues past them.
    pub failures: Vec<(String, Error)>,
}

/// Scores every manifest utterance. With one-second feeding the score is
/// the mean over all full 99-frame windows at a 100-frame hop — exactly
/// the features of consecutive 1-second audio chunks; utterances shorter
/// than one chunk fall back to the full matrix, as do mean_len/max_len.
pub fn evaluate(
    encoder: &Encoder,
    head: &LossHead,
    feed_strategy: FeedStrategy,
    manifest: &Manifest,
    features: &dyn FeatureSource,
) -> Result<EvalOutcome> {
    let mut scores = ScoreFile::new();
    let mut failures = Vec::new();
    for rec in manifest.records() {
        match score_utterance(encoder, head, feed_strategy, features, &rec.utt_id) {
            Ok(s) => scores.push(rec.utt_id.clone(), s)?,
            Err(e) => failures.push((rec.utt_id.clone(), e)),
        }
    }
    Ok(EvalOutcome { scores, failures })
}

fn score_utterance(
    encoder: &Encoder,
    head: &LossHead,
    feed_strategy: FeedStrategy,
    features: &dyn FeatureSource,
    utt_id: &str,
) -> Result<f64> {
    let feats = features.features(utt_id)?.mapv(f64::from);
    let score_of = |view: ArrayView2<'_, f64>| -> Result<f64> {
        let (embed, _) = encoder.forward(view)?;
        head.score(embed.view())
    };
    let t = feats.nrows();
    if feed_strategy == FeedStrategy::OneSec && t >= CHUNK_FRAMES {
        let mut acc = 0.0;
        let mut k = 0;
        while k * CHUNK_HOP_FRAMES + CHUNK_FRAMES <= t {
            let start = k * CHUNK_HOP_FRAMES;
            acc += score_of(feats.slice(s![start..start + CHUNK_FRAMES, ..]))?;
            k += 1;
        }
        Ok(acc / k as f64)
    } else {
        score_of(feats.view())
    }
}
