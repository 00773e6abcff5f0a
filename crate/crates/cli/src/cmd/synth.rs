use spoofcm_core::synth;

use crate::config::{ensure_dir, ExperimentConfig};
use crate::failure::{CmdResult, FailExt};
use crate::stamp::write_stamp;

pub fn run(cfg: &ExperimentConfig, force: bool) -> CmdResult<()> {
    let synth_cfg = cfg.synth_config()?;
    let audio_root = cfg.audio_root();
    ensure_dir(&audio_root)?;
    ensure_dir(&cfg.output_root())?;
    if let Some(parent) = cfg.manifest_path().parent() {
        ensure_dir(parent)?;
    }

    let manifest = synth::manifest(&synth_cfg).or_config()?;
    let (mut wrote, mut skipped) = (0usize, 0usize);
    for (i, rec) in manifest.records().iter().enumerate() {
        let out = audio_root.join(format!("{}.wav", rec.utt_id));
        if out.is_file() && !force {
            skipped += 1;
            continue;
        }
        let (_, wave) = synth::utterance(&synth_cfg, i).or_data()?;
        wave.write_wav(&out).or_data()?;
        wrote += 1;
    }
    manifest.write(&cfg.manifest_path()).or_data()?;
    write_stamp(cfg, "synth", &[("synth", synth_cfg.seed)])?;
    println!(
        "synth: {} utterances in {} ({wrote} written, {skipped} kept)",
        synth_cfg.n_utts,
        audio_root.display()
    );
    Ok(())
}
