//! Scoring metrics: equal error rate, weighted score fusion, and the
//! per-condition report.
//!
//! Scores follow the countermeasure convention: higher means more
//! bonafide, and a trial is accepted when its score clears the threshold.
//! The EER is found by sweeping the threshold down through the distinct
//! scores and linearly interpolating between the two operating points
//! where the false-acceptance and false-rejection rates cross.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::manifest::{DegradationPlan, Key, Manifest};

/// Scores for a set of utterances, in insertion order. Utterance ids are
/// unique and all scores are finite.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreFile {
    entries: Vec<(String, f64)>,
    index: BTreeMap<String, usize>,
}

impl ScoreFile {
    pub fn new() -> Self {
        ScoreFile::default()
    }

    pub fn push(&mut self, utt_id: impl Into<String>, score: f64) -> Result<()> {
        let utt_id = utt_id.into();
        if !score.is_finite() {
            return Err(Error::NonFinite(format!("score for `{utt_id}`")));
        }
        if self.index.contains_key(&utt_id) {
            return Err(Error::Parse(format!("duplicate score for `{utt_id}`")));
        }
        self.index.insert(utt_id.clone(), self.entries.len());
        self.entries.push((utt_id, score));
        Ok(())
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, utt_id: &str) -> Option<f64> {
        self.index.get(utt_id).map(|&i| self.entries[i].1)
    }

    pub fn utt_set(&self) -> BTreeSet<&str> {
        self.index.keys().map(String::as_str).collect()
    }

    /// One line per utterance: `utt<TAB>score` with 9 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (utt, score) in &self.entries {
            let _ = writeln!(out, "{utt}\t{score:.8e}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut scores = ScoreFile::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (utt, val) = line.split_once('\t').ok_or_else(|| {
                Error::Parse(format!("score line {}: expected utt<TAB>score", i + 1))
            })?;
            let score: f64 = val.trim().parse().map_err(|_| {
                Error::Parse(format!("score line {}: bad number `{val}`", i + 1))
            })?;
            scores.push(utt, score)?;
        }
        Ok(scores)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ScoreFile::parse(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Splits scores into (bonafide, spoof) lists using the manifest keys,
/// in score-file order.
pub fn split_scores(scores: &ScoreFile, manifest: &Manifest) -> Result<(Vec<f64>, Vec<f64>)> {
    let keys: BTreeMap<&str, Key> = manifest
        .records()
        .iter()
        .map(|r| (r.utt_id.as_str(), r.key))
        .collect();
    let mut bona = Vec::new();
    let mut spoof = Vec::new();
    for (utt, score) in scores.entries() {
        match keys.get(utt.as_str()) {
            Some(Key::Bonafide) => bona.push(*score),
            Some(Key::Spoof) => spoof.push(*score),
            None => {
                return Err(Error::UttSetMismatch(format!(
                    "`{utt}` scored but absent from the manifest"
                )))
            }
        }
    }
    Ok((bona, spoof))
}

/// Number of elements strictly below `t` in an ascending slice.
fn count_below(sorted: &[f64], t: f64) -> usize {
    sorted.partition_point(|&x| x < t)
}

/// Equal error rate in percent.
///
/// Sweeping the threshold from above the maximum score downward, the
/// false-acceptance rate (spoof scores >= threshold) rises from 0 while
/// the false-rejection rate (bonafide scores < threshold) falls from 1.
/// The EER sits where they cross, linearly interpolated between the two
/// bracketing operating points.
pub fn compute_eer(bona: &[f64], spoof: &[f64]) -> Result<f64> {
    if bona.is_empty() {
        return Err(Error::EmptyClass("bonafide"));
    }
    if spoof.is_empty() {
        return Err(Error::EmptyClass("spoof"));
    }
    let mut b = bona.to_vec();
    b.sort_by(f64::total_cmp);
    let mut s = spoof.to_vec();
    s.sort_by(f64::total_cmp);
    let mut thresholds: Vec<f64> = b.iter().chain(s.iter()).copied().collect();
    thresholds.sort_by(|x, y| y.total_cmp(x));
    thresholds.dedup();

    let (nb, ns) = (b.len() as f64, s.len() as f64);
    let mut prev = (0.0_f64, 1.0_f64); // (FAR, FRR) at threshold = +inf
    for &t in &thresholds {
        let far = (s.len() - count_below(&s, t)) as f64 / ns;
        let frr = count_below(&b, t) as f64 / nb;
        if far >= frr {
            let (far1, frr1) = prev;
            let denom = (far - far1) + (frr1 - frr);
            let frac = if denom > 0.0 { (frr1 - far1) / denom } else { 0.0 };
            return Ok((far1 + frac * (far - far1)) * 100.0);
        }
        prev = (far, frr);
    }
    // at the minimum score FAR is 1 and FRR is at most 1, so the loop
    // always finds a crossing
    unreachable!("threshold sweep must cross")
}

/// Weighted fusion of score files covering identical utterance sets.
///
/// Weights are normalized to sum to one and the weighted sum is
/// accumulated in file order, so fusing with a single nonzero weight
/// reproduces that file's scores exactly.
pub fn fuse(files: &[ScoreFile], weights: &[f64]) -> Result<ScoreFile> {
    if files.is_empty() || files.len() != weights.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} score files vs {} weights",
            files.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::BadWeights);
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::BadWeights);
    }
    let reference = files[0].utt_set();
    for f in &files[1..] {
        let set = f.utt_set();
        if set != reference {
            let missing: Vec<&&str> = reference.difference(&set).take(3).collect();
            let extra: Vec<&&str> = set.difference(&reference).take(3).collect();
            return Err(Error::UttSetMismatch(format!(
                "missing {missing:?}, unexpected {extra:?}"
            )));
        }
    }
    let norm: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let mut fused = ScoreFile::new();
    for (utt, _) in files[0].entries() {
        let mut acc = 0.0;
        for (f, w) in files.iter().zip(&norm) {
            acc += w * f.get(utt).expect("utt sets verified equal");
        }
        fused.push(utt.clone(), acc)?;
    }
    Ok(fused)
}

/// Linear-interpolation quantile (the common "type 7") on an ascending
/// slice.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - h.floor()) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub group_key: String,
    pub eer_percent: Option<f64>,
    pub n_bona: usize,
    pub n_spoof: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
}

/// Builds the per-condition report: an `ALL` row followed by one row per
/// codec kind, usage category, bitrate, loss rate, DTX state, and band,
/// as assigned by the degradation plan.
pub fn build_report(
    scores: &ScoreFile,
    manifest: &Manifest,
    plan: &DegradationPlan,
) -> Result<Vec<ReportRow>> {
    let keys: BTreeMap<&str, Key> = manifest
        .records()
        .iter()
        .map(|r| (r.utt_id.as_str(), r.key))
        .collect();

    // "ALL" sorts before every lowercase group key, so a single BTreeMap
    // yields the required row order directly
    let mut groups: BTreeMap<String, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (utt, score) in scores.entries() {
        let key = *keys.get(utt.as_str()).ok_or_else(|| {
            Error::UttSetMismatch(format!("`{utt}` scored but absent from the manifest"))
        })?;
        let cfg = plan
            .lookup(utt)
            .ok_or_else(|| Error::PlanMissingUtt(utt.clone()))?;
        let bitrate = cfg
            .bitrate_bps
            .map_or_else(|| "none".to_string(), |b| b.to_string());
        let group_keys = [
            "ALL".to_string(),
            format!("codec={}", cfg.kind.as_str()),
            format!("category={}", cfg.kind.category()),
            format!("bitrate={bitrate}"),
            format!("loss={}", cfg.loss_rate),
            format!("dtx={}", if cfg.dtx { "on" } else { "off" }),
            format!("band={}", cfg.band.as_str()),
        ];
        for g in group_keys {
            let slot = groups.entry(g).or_default();
            match key {
                Key::Bonafide => slot.0.push(*score),
                Key::Spoof => slot.1.push(*score),
            }
        }
    }

    let rows = groups
        .into_iter()
        .map(|(group_key, (bona, spoof))| {
            let eer_percent = if !bona.is_empty() && !spoof.is_empty() {
                Some(compute_eer(&bona, &spoof)?)
            } else {
                None
            };
            let mut pooled: Vec<f64> = bona.iter().chain(&spoof).copied().collect();
            pooled.sort_by(f64::total_cmp);
            Ok(ReportRow {
                group_key,
                eer_percent,
                n_bona: bona.len(),
                n_spoof: spoof.len(),
                q1: quantile(&pooled, 0.25),
                median: quantile(&pooled, 0.5),
                q3: quantile(&pooled, 0.75),
                min: pooled[0],
                max: pooled[pooled.len() - 1],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows)
}

pub fn report_to_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from("group_key,eer,n_bona,n_spoof,q1,median,q3,min,max\n");
    for r in rows {
        let eer = r
            .eer_percent
            .map_or_else(|| "NA".to_string(), |e| format!("{e:.6}"));
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6}",
            r.group_key, eer, r.n_bona, r.n_spoof, r.q1, r.median, r.q3, r.min, r.max
        );
    }
    out
}
