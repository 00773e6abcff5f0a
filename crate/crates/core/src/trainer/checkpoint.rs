//! Versioned binary checkpoint: run config, encoder tensors, and the
//! loss head blob. Byte-exact round trips back the reproducibility
//! guarantees — re-serializing a loaded checkpoint yields the same bytes.

use std::path::Path;

use crate::batcher::{BatchStrategy, FeedStrategy};
use crate::error::{Error, Result};
use crate::losses::LossHead;
use crate::manifest::Manifest;

use super::encoder::{ConvBlockSpec, Encoder, EncoderConfig};
use super::{AdamConfig, EvalOutcome, FeatureSource, LossSpec, TrainRunConfig};

const MAGIC: &[u8; 8] = b"SPCMCKPT";
const VERSION: u32 = 1;

#[derive(Clone)]
pub struct Checkpoint {
    pub run: TrainRunConfig,
    pub epochs_done: usize,
    pub encoder: Encoder,
    pub head: LossHead,
}

fn batch_strategy_code(s: BatchStrategy) -> u8 {
    match s {
        BatchStrategy::Random => 0,
        BatchStrategy::CustomClass => 1,
        BatchStrategy::CustomSpeak => 2,
        BatchStrategy::CustomSim => 3,
    }
}

fn batch_strategy_from(code: u8) -> Result<BatchStrategy> {
    Ok(match code {
        0 => BatchStrategy::Random,
        1 => BatchStrategy::CustomClass,
        2 => BatchStrategy::CustomSpeak,
        3 => BatchStrategy::CustomSim,
        _ => return Err(Error::InvalidCheckpoint(format!("batch strategy code {code}"))),
    })
}

fn feed_code(s: FeedStrategy) -> u8 {
    match s {
        FeedStrategy::OneSec => 0,
        FeedStrategy::MeanLen => 1,
        FeedStrategy::MaxLen => 2,
    }
}

fn feed_from(code: u8) -> Result<FeedStrategy> {
    Ok(match code {
        0 => FeedStrategy::OneSec,
        1 => FeedStrategy::MeanLen,
        2 => FeedStrategy::MaxLen,
        _ => return Err(Error::InvalidCheckpoint(format!("feed strategy code {code}"))),
    })
}

struct Reader<'a> {
    raw: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.raw.len());
        let end = end.ok_or_else(|| Error::InvalidCheckpoint("truncated".into()))?;
        let out = &self.raw[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let run = &self.run;
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&run.seed.to_le_bytes());
        buf.extend_from_slice(&(run.epochs as u32).to_le_bytes());
        buf.extend_from_slice(&(self.epochs_done as u32).to_le_bytes());
        buf.extend_from_slice(&(run.batch_size as u32).to_le_bytes());
        buf.extend_from_slice(&(run.checkpoint_every as u32).to_le_bytes());
        buf.push(batch_strategy_code(run.batch_strategy));
        buf.push(feed_code(run.feed));
        for v in [run.adam.lr, run.adam.beta1, run.adam.beta2, run.adam.eps] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        match run.loss {
            LossSpec::Softmax => buf.push(0),
            LossSpec::AmSoftmax { alpha, margin } => {
                buf.push(1);
                buf.extend_from_slice(&alpha.to_le_bytes());
                buf.extend_from_slice(&margin.to_le_bytes());
            }
            LossSpec::OcSoftmax { alpha, m0, m1 } => {
                buf.push(2);
                buf.extend_from_slice(&alpha.to_le_bytes());
                buf.extend_from_slice(&m0.to_le_bytes());
                buf.extend_from_slice(&m1.to_le_bytes());
            }
        }
        let cfg = self.encoder.config();
        buf.extend_from_slice(&(cfg.input_dim as u32).to_le_bytes());
        buf.extend_from_slice(&(cfg.embed_dim as u32).to_le_bytes());
        buf.extend_from_slice(&(cfg.blocks.len() as u32).to_le_bytes());
        for b in &cfg.blocks {
            buf.extend_from_slice(&(b.channels as u32).to_le_bytes());
            buf.extend_from_slice(&(b.kernel as u32).to_le_bytes());
            buf.extend_from_slice(&(b.stride as u32).to_le_bytes());
        }
        for (_, tensor) in self.encoder.tensors() {
            buf.extend_from_slice(&(tensor.len() as u64).to_le_bytes());
            for v in tensor {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        let head = self.head.to_bytes();
        buf.extend_from_slice(&(head.len() as u32).to_le_bytes());
        buf.extend_from_slice(&head);
        buf
    }

    pub fn from_bytes(raw: &[u8]) -> Result<Self> {
        let mut r = Reader { raw, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::InvalidCheckpoint("bad magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::InvalidCheckpoint(format!("unsupported version {version}")));
        }
        let seed = r.u64()?;
        let epochs = r.u32()? as usize;
        let epochs_done = r.u32()? as usize;
        let batch_size = r.u32()? as usize;
        let checkpoint_every = r.u32()? as usize;
        let batch_strategy = batch_strategy_from(r.u8()?)?;
        let feed = feed_from(r.u8()?)?;
        let adam = AdamConfig { lr: r.f64()?, beta1: r.f64()?, beta2: r.f64()?, eps: r.f64()? };
        let loss = match r.u8()? {
            0 => LossSpec::Softmax,
            1 => LossSpec::AmSoftmax { alpha: r.f64()?, margin: r.f64()? },
            2 => LossSpec::OcSoftmax { alpha: r.f64()?, m0: r.f64()?, m1: r.f64()? },
            k => return Err(Error::InvalidCheckpoint(format!("loss kind code {k}"))),
        };
        let input_dim = r.u32()? as usize;
        let embed_dim = r.u32()? as usize;
        let n_blocks = r.u32()? as usize;
        if n_blocks > 64 {
            return Err(Error::InvalidCheckpoint(format!("{n_blocks} encoder blocks")));
        }
        let mut blocks = Vec::with_capacity(n_blocks);
        for _ in 0..n_blocks {
            blocks.push(ConvBlockSpec {
                channels: r.u32()? as usize,
                kernel: r.u32()? as usize,
                stride: r.u32()? as usize,
            });
        }
        let encoder_cfg = EncoderConfig { input_dim, blocks, embed_dim };
        encoder_cfg.validate().map_err(|e| {
            Error::InvalidCheckpoint(format!("encoder config: {e}"))
        })?;
        let n_tensors = encoder_cfg.blocks.len() * 2 + 2;
        let mut tensors = Vec::with_capacity(n_tensors);
        for _ in 0..n_tensors {
            let len = r.u64()? as usize;
            if len > raw.len() / 8 {
                return Err(Error::InvalidCheckpoint(format!("tensor length {len}")));
            }
            let mut t = Vec::with_capacity(len);
            for _ in 0..len {
                t.push(r.f64()?);
            }
            tensors.push(t);
        }
        let encoder = Encoder::from_tensors(encoder_cfg.clone(), tensors)?;
        let head_len = r.u32()? as usize;
        let head = LossHead::from_bytes(r.take(head_len)?)?;
        if r.pos != raw.len() {
            return Err(Error::InvalidCheckpoint(format!(
                "{} trailing bytes",
                raw.len() - r.pos
            )));
        }
        if head.dim() != embed_dim {
            return Err(Error::InvalidCheckpoint(format!(
                "head dim {} vs embedding dim {embed_dim}",
                head.dim()
            )));
        }
        Ok(Checkpoint {
            run: TrainRunConfig {
                epochs,
                batch_size,
                batch_strategy,
                feed,
                encoder: encoder_cfg,
                loss,
                adam,
                seed,
                checkpoint_every,
            },
            epochs_done,
            encoder,
            head,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let raw = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Checkpoint::from_bytes(&raw)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    /// Scores a manifest with this checkpoint's encoder, head, and feed
    /// strategy.
    pub fn evaluate(
        &self,
        manifest: &Manifest,
        features: &dyn FeatureSource,
    ) -> Result<EvalOutcome> {
        super::evaluate(&self.encoder, &self.head, self.run.feed, manifest, features)
    }

}
