use std::path::Path;

use spoofcm_core::manifest::{DegradationPlan, Manifest};
use spoofcm_core::metrics::{build_report, report_to_csv, ScoreFile};

use crate::config::{ensure_dir, ExperimentConfig};
use crate::failure::{CmdResult, FailExt};
use crate::stamp::write_stamp;

pub fn run(cfg: &ExperimentConfig) -> CmdResult<()> {
    let manifest_path = cfg.manifest_path();
    cfg.require_file(&manifest_path, "manifest")?;
    let scores_path = cfg.in_output(&cfg.raw().report.scores);
    cfg.require_file(&scores_path, "score file")?;
    let plan_path = cfg.plan_path()?;
    cfg.require_file(&plan_path, "degradation plan")?;
    ensure_dir(&cfg.output_root())?;

    let manifest = Manifest::read(&manifest_path).or_data()?;
    let scores = ScoreFile::read(&scores_path).or_data()?;
    let plan = DegradationPlan::read(&plan_path).or_data()?;
    let rows = build_report(&scores, &manifest, &plan).or_data()?;
    let out = cfg.in_output(Path::new(&cfg.raw().report.output));
    std::fs::write(&out, report_to_csv(&rows))
        .map_err(|e| anyhow::anyhow!("writing {}: {e}", out.display()))
        .or_data()?;
    write_stamp(cfg, "report", &[])?;
    println!("report: {} groups → {}", rows.len(), out.display());
    Ok(())
}
