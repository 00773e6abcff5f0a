//! Mini-batch assembly and fixed-length feeding.
//!
//! Batching controls *which* utterances share a batch. `random` is the
//! plain shuffled baseline; the custom strategies balance every batch
//! half-and-half between classes, pairing each driving-class utterance
//! with a partner that shares a speaker (`custom_speak`) or a codec tag
//! (`custom_sim`), so the loss sees matched conditions on both sides of
//! the label boundary. Feeding then normalizes utterance length: crop a
//! random window from long ones, tile short ones.

use std::collections::BTreeMap;
use std::str::FromStr;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::manifest::{Key, Manifest};
use crate::util::rng_for;

/// Fixed window for the `one_sec` feed: one second at 16 kHz.
pub const ONE_SEC_SAMPLES: usize = 16_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchStrategy {
    Random,
    CustomClass,
    CustomSpeak,
    CustomSim,
}

impl BatchStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            BatchStrategy::Random => "random",
            BatchStrategy::CustomClass => "custom_class",
            BatchStrategy::CustomSpeak => "custom_speak",
            BatchStrategy::CustomSim => "custom_sim",
        }
    }
}

impl FromStr for BatchStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(BatchStrategy::Random),
            "custom_class" => Ok(BatchStrategy::CustomClass),
            "custom_speak" => Ok(BatchStrategy::CustomSpeak),
            "custom_sim" => Ok(BatchStrategy::CustomSim),
            other => Err(Error::Parse(format!("unknown batch strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedStrategy {
    OneSec,
    MeanLen,
    MaxLen,
}

impl FeedStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            FeedStrategy::OneSec => "one_sec",
            FeedStrategy::MeanLen => "mean_len",
            FeedStrategy::MaxLen => "max_len",
        }
    }
}

impl FromStr for FeedStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one_sec" => Ok(FeedStrategy::OneSec),
            "mean_len" => Ok(FeedStrategy::MeanLen),
            "max_len" => Ok(FeedStrategy::MaxLen),
            other => Err(Error::Parse(format!("unknown feed strategy `{other}`"))),
        }
    }
}

/// A pool that deals indices in shuffled order and reshuffles itself when
/// exhausted, so repeats only start once every member has been used.
struct RecyclingPool {
    items: Vec<usize>,
    cursor: usize,
}

impl RecyclingPool {
    fn new(items: Vec<usize>) -> Self {
        let cursor = items.len(); // force a shuffle on first draw
        RecyclingPool { items, cursor }
    }

    fn next<R: Rng>(&mut self, rng: &mut R) -> usize {
        if self.cursor >= self.items.len() {
            self.items.shuffle(rng);
            self.cursor = 0;
        }
        let item = self.items[self.cursor];
        self.cursor += 1;
        item
    }
}

/// Builds batches of record indices into `manifest`.
///
/// `random` uses every record exactly once and keeps a final partial
/// batch. The custom strategies emit only full, exactly class-balanced
/// batches: the larger ("driving") side is consumed at most once each,
/// and partners are drawn from recycling pools so the smaller side
/// repeats as evenly as possible.
pub fn make_batches(
    manifest: &Manifest,
    strategy: BatchStrategy,
    batch_size: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    if batch_size == 0 {
        return Err(Error::Parse("batch_size must be positive".into()));
    }
    let mut rng = rng_for(seed, "batch");
    match strategy {
        BatchStrategy::Random => {
            let mut order: Vec<usize> = (0..manifest.len()).collect();
            order.shuffle(&mut rng);
            Ok(order.chunks(batch_size).map(|c| c.to_vec()).collect())
        }
        BatchStrategy::CustomClass => {
            let half = even_half(batch_size)?;
            let bona: Vec<usize> = class_indices(manifest, Key::Bonafide);
            let spoof: Vec<usize> = class_indices(manifest, Key::Spoof);
            if bona.is_empty() || spoof.is_empty() {
                return Err(Error::MissingClass(strategy.as_str()));
            }
            let (mut driving, minority) = if spoof.len() >= bona.len() {
                (spoof, bona)
            } else {
                (bona, spoof)
            };
            driving.shuffle(&mut rng);
            let mut pool = RecyclingPool::new(minority);
            let mut batches = Vec::new();
            for chunk in driving.chunks_exact(half) {
                let mut batch = chunk.to_vec();
                for _ in 0..half {
                    batch.push(pool.next(&mut rng));
                }
                batch.shuffle(&mut rng);
                batches.push(batch);
            }
            Ok(batches)
        }
        BatchStrategy::CustomSpeak | BatchStrategy::CustomSim => {
            let half = even_half(batch_size)?;
            let group_of = |i: usize| -> Result<String> {
                let r = &manifest.records()[i];
                match strategy {
                    BatchStrategy::CustomSpeak => Ok(r.speaker.clone()),
                    _ => r
                        .codec_tag
                        .clone()
                        .ok_or_else(|| Error::MissingCodecTag(r.utt_id.clone())),
                }
            };
            let group_name = match strategy {
                BatchStrategy::CustomSpeak => "speaker",
                _ => "codec_tag",
            };
            let mut spoof: Vec<usize> = class_indices(manifest, Key::Spoof);
            let bona: Vec<usize> = class_indices(manifest, Key::Bonafide);
            if bona.is_empty() || spoof.is_empty() {
                return Err(Error::MissingClass(strategy.as_str()));
            }
            let mut members: BTreeMap<String, Vec<usize>> = BTreeMap::new();
            for &i in &bona {
                members.entry(group_of(i)?).or_default().push(i);
            }
            let mut pools: BTreeMap<String, RecyclingPool> = members
                .into_iter()
                .map(|(g, items)| (g, RecyclingPool::new(items)))
                .collect();
            // fail fast on any spoof whose group has no bonafide at all
            for &i in &spoof {
                let g = group_of(i)?;
                if !pools.contains_key(&g) {
                    return Err(Error::NoPartner {
                        group: group_name,
                        token: g,
                    });
                }
            }
            spoof.shuffle(&mut rng);
            let mut batches = Vec::new();
            for chunk in spoof.chunks_exact(half) {
                let mut batch = chunk.to_vec();
                for &s in chunk {
                    let g = group_of(s)?;
                    let pool = pools.get_mut(&g).expect("checked above");
                    batch.push(pool.next(&mut rng));
                }
                batch.shuffle(&mut rng);
                batches.push(batch);
            }
            Ok(batches)
        }
    }
}

fn even_half(batch_size: usize) -> Result<usize> {
    if !batch_size.is_multiple_of(2) {
        return Err(Error::OddBatchSize(batch_size));
    }
    Ok(batch_size / 2)
}

fn class_indices(manifest: &Manifest, key: Key) -> Vec<usize> {
    manifest
        .records()
        .iter()
        .enumerate()
        .filter(|(_, r)| r.key == key)
        .map(|(i, _)| i)
        .collect()
}

/// Repeats `src` cyclically until `len` samples.
fn tile(src: &[f32], len: usize) -> Vec<f32> {
    src.iter().copied().cycle().take(len).collect()
}

/// Normalizes a batch of variable-length sample buffers to one fixed
/// length: crop a random window from longer inputs, tile shorter ones.
/// Offsets are drawn in input order, one draw per cropped item, so the
/// result is reproducible for a given seed.
pub fn feed(items: &[(&str, &[f32])], strategy: FeedStrategy, seed: u64) -> Result<Array2<f32>> {
    if items.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if let Some((id, _)) = items.iter().find(|(_, s)| s.is_empty()) {
        return Err(Error::EmptyWaveform(id.to_string()));
    }
    let target = match strategy {
        FeedStrategy::OneSec => ONE_SEC_SAMPLES,
        FeedStrategy::MaxLen => items.iter().map(|(_, s)| s.len()).max().unwrap(),
        FeedStrategy::MeanLen => {
            items.iter().map(|(_, s)| s.len()).sum::<usize>() / items.len()
        }
    };
    let mut rng = rng_for(seed, "feed");
    let mut out = Array2::zeros((items.len(), target));
    for (row, (_, samples)) in items.iter().enumerate() {
        let fixed: Vec<f32> = if samples.len() > target {
            let offset = rng.random_range(0..=samples.len() - target);
            samples[offset..offset + target].to_vec()
        } else {
            tile(samples, target)
        };
        for (col, v) in fixed.into_iter().enumerate() {
            out[[row, col]] = v;
        }
    }
    Ok(out)
}

/// One line per batch: comma-separated utterance ids.
pub fn batches_to_text(batches: &[Vec<usize>], manifest: &Manifest) -> String {
    batches
        .iter()
        .map(|batch| {
            batch
                .iter()
                .map(|&i| manifest.records()[i].utt_id.as_str())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
        + "\n"
}
