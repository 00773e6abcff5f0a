use rayon::prelude::*;

use spoofcm_core::audio::Waveform;
use spoofcm_core::frontend::{self, CacheIndex};
use spoofcm_core::manifest::Manifest;

use crate::config::{ensure_dir, ExperimentConfig};
use crate::failure::{CmdResult, FailExt};
use crate::stamp::write_stamp;

pub fn run(cfg: &ExperimentConfig, jobs: Option<usize>, force: bool) -> CmdResult<()> {
    let manifest_path = cfg.manifest_path();
    cfg.require_file(&manifest_path, "manifest")?;
    let audio_root = cfg.audio_root();
    cfg.require_dir(&audio_root, "audio root")?;
    let cache_root = cfg.cache_root();
    ensure_dir(&cache_root)?;
    ensure_dir(&cfg.output_root())?;
    let pool = super::make_pool(jobs)?;

    let manifest = Manifest::read(&manifest_path).or_data()?;
    let done: Result<Vec<bool>, spoofcm_core::Error> = pool.install(|| {
        manifest
            .records()
            .par_iter()
            .map(|rec| {
                let out = cache_root.join(format!("{}.feat", rec.utt_id));
                if out.is_file() && !force {
                    return Ok(false);
                }
                let wave = Waveform::read_wav(audio_root.join(format!("{}.wav", rec.utt_id)))?;
                let feats = frontend::extract(&wave)?;
                frontend::write_cache(&out, &rec.utt_id, &feats)?;
                Ok(true)
            })
            .collect()
    });
    let done = done.or_data()?;

    // the index always reflects the full manifest, in manifest order
    let mut index = CacheIndex::new();
    for rec in manifest.records() {
        index.push(rec.utt_id.clone(), format!("{}.feat", rec.utt_id));
    }
    index.write(&cache_root.join("index.txt")).or_data()?;

    write_stamp(cfg, "extract", &[])?;
    let wrote = done.iter().filter(|&&w| w).count();
    println!(
        "extract: {} feature files in {} ({wrote} written, {} kept)",
        done.len(),
        cache_root.display(),
        done.len() - wrote
    );
    Ok(())
}
