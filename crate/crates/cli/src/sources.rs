//! Disk-backed data sources for the trainer: WAV trees for training
//! audio, feature-cache trees for evaluation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use spoofcm_core::audio::Waveform;
use spoofcm_core::frontend::{read_cache, CacheIndex};
use spoofcm_core::trainer::{AudioSource, FeatureSource};
use spoofcm_core::{Error, Result};

/// `<root>/<utt_id>.wav`, as laid out by `synth` and `degrade`.
pub struct DiskAudio {
    root: PathBuf,
}

impl DiskAudio {
    pub fn new(root: PathBuf) -> Self {
        DiskAudio { root }
    }

    pub fn wav_path(&self, utt_id: &str) -> PathBuf {
        self.root.join(format!("{utt_id}.wav"))
    }
}

impl AudioSource for DiskAudio {
    fn waveform(&self, utt_id: &str) -> Result<Waveform> {
        Waveform::read_wav(self.wav_path(utt_id))
    }
}

/// Feature blobs listed by the cache index that `extract` writes.
pub struct DiskFeatures {
    root: PathBuf,
    files: BTreeMap<String, String>,
}

impl DiskFeatures {
    pub fn open(cache_root: &Path) -> Result<Self> {
        let index = CacheIndex::read(&cache_root.join("index.txt"))?;
        let files = index
            .entries()
            .iter()
            .map(|(utt, file)| (utt.clone(), file.clone()))
            .collect();
        Ok(DiskFeatures { root: cache_root.to_path_buf(), files })
    }
}

impl FeatureSource for DiskFeatures {
    fn features(&self, utt_id: &str) -> Result<Array2<f32>> {
        let file = self.files.get(utt_id).ok_or_else(|| {
            Error::InvalidCache(format!("`{utt_id}` is not in the cache index"))
        })?;
        let (stored, feats) = read_cache(&self.root.join(file))?;
        if stored != utt_id {
            return Err(Error::InvalidCache(format!(
                "cache file {file} holds `{stored}`, expected `{utt_id}`"
            )));
        }
        Ok(feats)
    }
}
