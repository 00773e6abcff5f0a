use spoofcm_core::manifest::Manifest;
use spoofcm_core::trainer::{trace_to_csv, Trainer};

use crate::config::{ensure_dir, ExperimentConfig};
use crate::failure::{CmdResult, FailExt};
use crate::sources::DiskAudio;
use crate::stamp::write_stamp;

pub fn run(cfg: &ExperimentConfig) -> CmdResult<()> {
    let manifest_path = cfg.manifest_path();
    cfg.require_file(&manifest_path, "manifest")?;
    let audio_root = cfg.audio_root();
    cfg.require_dir(&audio_root, "audio root")?;
    let run = cfg.train_run_config()?;
    let output_root = cfg.output_root();
    ensure_dir(&output_root)?;

    let manifest = Manifest::read(&manifest_path).or_data()?;
    let audio = DiskAudio::new(audio_root);
    let mut trainer = Trainer::new(run.clone()).or_config()?;
    let mut trace = Vec::with_capacity(run.epochs);
    for epoch in 1..=run.epochs {
        let stats = trainer.run_epoch(&manifest, &audio).or_data()?;
        println!(
            "train: epoch {epoch}/{}: mean loss {:.6} over {} batches",
            run.epochs, stats.mean_loss, stats.batches
        );
        trace.push(stats);
        if run.checkpoint_every > 0 && epoch % run.checkpoint_every == 0 && epoch < run.epochs {
            trainer
                .checkpoint()
                .write(&output_root.join(format!("model.epoch{epoch}.ckpt")))
                .or_data()?;
        }
    }
    trainer.checkpoint().write(&output_root.join("model.ckpt")).or_data()?;
    let trace_path = output_root.join("trace.csv");
    std::fs::write(&trace_path, trace_to_csv(&trace))
        .map_err(|e| anyhow::anyhow!("writing {}: {e}", trace_path.display()))
        .or_data()?;
    write_stamp(cfg, "train", &[("train", run.seed)])?;
    println!("train: checkpoint at {}", output_root.join("model.ckpt").display());
    Ok(())
}
