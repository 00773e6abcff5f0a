//! Reproducibility stamps: each command records the config hash and the
//! effective seeds next to its outputs. Deliberately timestamp-free so
//! replayed runs stay byte-identical.

use std::fmt::Write as _;

use crate::config::ExperimentConfig;
use crate::failure::{CmdResult, FailExt};

pub fn write_stamp(
    cfg: &ExperimentConfig,
    command: &str,
    stage_seeds: &[(&str, u64)],
) -> CmdResult<()> {
    let mut text = String::new();
    let _ = writeln!(text, "command={command}");
    let _ = writeln!(text, "config_hash={:016x}", cfg.config_hash);
    let _ = writeln!(text, "master_seed={}", cfg.master_seed());
    for (stage, seed) in stage_seeds {
        let _ = writeln!(text, "seed.{stage}={seed}");
    }
    let path = cfg.output_root().join(format!("{command}.stamp"));
    std::fs::write(&path, text)
        .map_err(|e| anyhow::anyhow!("writing stamp {}: {e}", path.display()))
        .or_data()
}
