use std::path::Path;

use spoofcm_core::metrics::{self, ScoreFile};

use crate::config::{ensure_dir, ExperimentConfig};
use crate::failure::{CmdResult, FailExt, Failure};
use crate::stamp::write_stamp;

pub fn run(cfg: &ExperimentConfig) -> CmdResult<()> {
    let section = cfg.raw().fuse.clone();
    if section.inputs.is_empty() {
        return Err(Failure::config("fuse.inputs is empty"));
    }
    if section.inputs.len() != section.weights.len() {
        return Err(Failure::config(format!(
            "{} fuse.inputs vs {} fuse.weights",
            section.inputs.len(),
            section.weights.len()
        )));
    }
    if section.weights.iter().any(|w| !w.is_finite() || *w < 0.0)
        || section.weights.iter().sum::<f64>() <= 0.0
    {
        return Err(Failure::config(
            "fuse.weights must be non-negative, finite, and not all zero",
        ));
    }
    let paths: Vec<_> = section.inputs.iter().map(|p| cfg.resolve_path(p)).collect();
    for p in &paths {
        cfg.require_file(p, "score file")?;
    }
    ensure_dir(&cfg.output_root())?;

    let files = paths
        .iter()
        .map(|p| ScoreFile::read(p))
        .collect::<Result<Vec<_>, _>>()
        .or_data()?;
    let fused = metrics::fuse(&files, &section.weights).or_data()?;
    let out = cfg.in_output(Path::new(&section.output));
    fused.write(&out).or_data()?;
    write_stamp(cfg, "fuse", &[])?;
    println!("fuse: {} files → {}", files.len(), out.display());
    Ok(())
}
