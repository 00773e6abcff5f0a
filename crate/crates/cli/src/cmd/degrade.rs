use rayon::prelude::*;

use spoofcm_core::codecsim;
use spoofcm_core::manifest::{read_codec_list, Manifest};
use spoofcm_core::trainer::AudioSource;
use spoofcm_core::util::derive_seed;

use crate::config::{ensure_dir, ExperimentConfig};
use crate::failure::{CmdResult, FailExt};
use crate::sources::DiskAudio;
use crate::stamp::write_stamp;

pub fn run(cfg: &ExperimentConfig, jobs: Option<usize>, force: bool) -> CmdResult<()> {
    let manifest_path = cfg.manifest_path();
    cfg.require_file(&manifest_path, "manifest")?;
    let codec_path = cfg.codec_list_path()?;
    cfg.require_file(&codec_path, "codec list")?;
    let audio_root = cfg.audio_root();
    cfg.require_dir(&audio_root, "audio root")?;
    // a malformed codec string is a configuration problem (exit 2); the
    // error names the offending token
    let codecs = read_codec_list(&codec_path).or_config()?;
    let degraded_root = cfg.degraded_root()?;
    ensure_dir(&degraded_root)?;
    ensure_dir(&cfg.output_root())?;
    let pool = super::make_pool(jobs)?;

    let manifest = Manifest::read(&manifest_path).or_data()?;
    let plan_seed = cfg.stage_seed("plan");
    let degrade_seed = cfg.stage_seed("degrade");
    let plan = manifest.assign_degradations(&codecs, plan_seed).or_data()?;
    plan.write(&degraded_root.join("plan.txt")).or_data()?;

    let source = DiskAudio::new(audio_root);
    let done: Result<Vec<bool>, spoofcm_core::Error> = pool.install(|| {
        plan.entries()
            .par_iter()
            .map(|(utt, codec)| {
                let out = degraded_root.join(format!("{utt}.wav"));
                if out.is_file() && !force {
                    return Ok(false);
                }
                let wave = source.waveform(utt)?;
                let degraded = codecsim::degrade(&wave, codec, derive_seed(degrade_seed, utt))?;
                degraded.write_wav(&out)?;
                Ok(true)
            })
            .collect()
    });
    let done = done.or_data()?;

    write_stamp(cfg, "degrade", &[("plan", plan_seed), ("degrade", degrade_seed)])?;
    let wrote = done.iter().filter(|&&w| w).count();
    println!(
        "degrade: {} utterances over {} codec configs into {} ({wrote} written, {} kept)",
        plan.entries().len(),
        codecs.len(),
        degraded_root.display(),
        done.len() - wrote
    );
    Ok(())
}
