use std::path::Path;

use spoofcm_core::manifest::Manifest;
use spoofcm_core::trainer::Checkpoint;

use crate::config::{ensure_dir, ExperimentConfig};
use crate::failure::{CmdResult, FailExt, Failure};
use crate::sources::DiskFeatures;
use crate::stamp::write_stamp;

pub fn run(cfg: &ExperimentConfig) -> CmdResult<()> {
    let manifest_path = cfg.manifest_path();
    cfg.require_file(&manifest_path, "manifest")?;
    let ckpt_path = cfg.checkpoint_path();
    cfg.require_file(&ckpt_path, "checkpoint")?;
    let index_path = cfg.cache_root().join("index.txt");
    cfg.require_file(&index_path, "feature cache index")?;
    ensure_dir(&cfg.output_root())?;

    let checkpoint = Checkpoint::read(&ckpt_path).or_data()?;
    let manifest = Manifest::read(&manifest_path).or_data()?;
    let features = DiskFeatures::open(&cfg.cache_root()).or_data()?;
    let outcome = checkpoint.evaluate(&manifest, &features).or_data()?;
    for (utt, err) in &outcome.failures {
        eprintln!("score: skipped `{utt}`: {err}");
    }
    if outcome.scores.is_empty() {
        return Err(Failure::Data(anyhow::anyhow!(
            "no utterance could be scored ({} failures)",
            outcome.failures.len()
        )));
    }
    let out = cfg.in_output(Path::new(&cfg.raw().score.output));
    outcome.scores.write(&out).or_data()?;
    write_stamp(cfg, "score", &[])?;
    println!(
        "score: {} scores ({} skipped) → {}",
        outcome.scores.len(),
        outcome.failures.len(),
        out.display()
    );
    Ok(())
}
