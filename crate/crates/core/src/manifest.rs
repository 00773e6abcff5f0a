//! Trial manifests and degradation plans.
//!
//! A manifest line is whitespace-separated: `speaker utt key [attack]
//! [codec_tag]`, where `-` marks an absent field and is discarded during
//! parsing. Lines from ASVspoof-style protocols (`speaker utt - attack key`)
//! therefore parse too: after dropping `-` tokens the key is either the
//! third or the fourth remaining token.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;

use crate::codecsim::CodecConfig;
use crate::error::{Error, Result};
use crate::util::rng_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Key {
    Bonafide,
    Spoof,
}

impl Key {
    pub fn as_str(self) -> &'static str {
        match self {
            Key::Bonafide => "bonafide",
            Key::Spoof => "spoof",
        }
    }

    /// Class index used by the losses: bonafide is 0, spoof is 1.
    pub fn label(self) -> usize {
        match self {
            Key::Bonafide => 0,
            Key::Spoof => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub speaker: String,
    pub utt_id: String,
    pub key: Key,
    pub attack: Option<String>,
    pub codec_tag: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    records: Vec<Record>,
}

impl Manifest {
    pub fn from_records(records: Vec<Record>) -> Self {
        Manifest { records }
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn counts(&self) -> (usize, usize) {
        let bona = self.records.iter().filter(|r| r.key == Key::Bonafide).count();
        (bona, self.records.len() - bona)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut records = Vec::new();
        let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() < 3 {
                return Err(Error::ShortLine {
                    line: line_no,
                    got: tokens.len(),
                });
            }
            let key_of = |tok: &str| match tok {
                "bonafide" => Some(Key::Bonafide),
                "spoof" => Some(Key::Spoof),
                _ => None,
            };
            fn dash<'a>(t: Option<&&'a str>) -> Option<&'a str> {
                t.copied().filter(|s| *s != "-")
            }
            let rest = &tokens[2..];
            // key right after the utterance: trailing tokens are the attack
            // and codec tag, with `-` as an explicit placeholder.
            let (key, attack, codec_tag) = if let Some(k) = key_of(rest[0]) {
                (k, dash(rest.get(1)), dash(rest.get(2)))
            } else {
                // protocol-style line: drop `-` fields, after which the key
                // sits either directly after the utterance or one slot
                // later (preceded by the attack)
                let kept: Vec<&str> = rest.iter().copied().filter(|s| *s != "-").collect();
                if kept.is_empty() {
                    return Err(Error::ShortLine {
                        line: line_no,
                        got: 2,
                    });
                }
                if let Some(k) = key_of(kept[0]) {
                    (k, dash(kept.get(1)), dash(kept.get(2)))
                } else if kept.len() >= 2 && key_of(kept[1]).is_some() {
                    (key_of(kept[1]).unwrap(), Some(kept[0]), dash(kept.get(2)))
                } else {
                    return Err(Error::UnknownKey {
                        line: line_no,
                        token: kept[kept.len().min(2) - 1].to_string(),
                    });
                }
            };
            let utt_id = tokens[1];
            if seen.insert(utt_id, line_no).is_some() {
                return Err(Error::DuplicateUtt {
                    line: line_no,
                    utt_id: utt_id.to_string(),
                });
            }
            records.push(Record {
                speaker: tokens[0].to_string(),
                utt_id: utt_id.to_string(),
                key,
                attack: attack.map(str::to_string),
                codec_tag: codec_tag.map(str::to_string),
            });
        }
        Ok(Manifest { records })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Manifest::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let _ = write!(out, "{} {} {}", r.speaker, r.utt_id, r.key.as_str());
            match (&r.attack, &r.codec_tag) {
                (None, None) => {}
                (attack, None) => {
                    let _ = write!(out, " {}", attack.as_deref().unwrap_or("-"));
                }
                (attack, Some(tag)) => {
                    let _ = write!(out, " {} {}", attack.as_deref().unwrap_or("-"), tag);
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    /// Splits into (train, dev) by drawing `dev_count` records uniformly
    /// at random. Both halves keep the original manifest ordering.
    pub fn build_splits(&self, dev_count: usize, seed: u64) -> Result<(Manifest, Manifest)> {
        if dev_count > self.records.len() {
            return Err(Error::DevCountTooLarge {
                dev_count,
                total: self.records.len(),
            });
        }
        let mut indices: Vec<usize> = (0..self.records.len()).collect();
        indices.shuffle(&mut rng_for(seed, "split"));
        let mut in_dev = vec![false; self.records.len()];
        for &i in &indices[..dev_count] {
            in_dev[i] = true;
        }
        let (mut train, mut dev) = (Vec::new(), Vec::new());
        for (i, r) in self.records.iter().enumerate() {
            if in_dev[i] {
                dev.push(r.clone());
            } else {
                train.push(r.clone());
            }
        }
        Ok((Manifest::from_records(train), Manifest::from_records(dev)))
    }

    /// Assigns one codec config to every utterance, cycling through the
    /// codec list over a shuffled record order so that the per-config counts
    /// differ by at most one while the pairing stays random.
    pub fn assign_degradations(
        &self,
        codecs: &[CodecConfig],
        seed: u64,
    ) -> Result<DegradationPlan> {
        if codecs.is_empty() {
            return Err(Error::EmptyCodecList);
        }
        let mut indices: Vec<usize> = (0..self.records.len()).collect();
        indices.shuffle(&mut rng_for(seed, "plan"));
        let mut assigned: Vec<Option<&CodecConfig>> = vec![None; self.records.len()];
        for (pos, &rec_idx) in indices.iter().enumerate() {
            assigned[rec_idx] = Some(&codecs[pos % codecs.len()]);
        }
        let entries = self
            .records
            .iter()
            .zip(assigned)
            .map(|(r, cfg)| (r.utt_id.clone(), cfg.expect("every index assigned").clone()))
            .collect();
        Ok(DegradationPlan::from_entries(entries))
    }
}

/// One codec config per utterance, in manifest order.
#[derive(Debug, Clone, PartialEq)]
pub struct DegradationPlan {
    entries: Vec<(String, CodecConfig)>,
    index: BTreeMap<String, usize>,
}

impl DegradationPlan {
    pub fn from_entries(entries: Vec<(String, CodecConfig)>) -> Self {
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, (utt, _))| (utt.clone(), i))
            .collect();
        DegradationPlan { entries, index }
    }

    pub fn entries(&self) -> &[(String, CodecConfig)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, utt_id: &str) -> Option<&CodecConfig> {
        self.index.get(utt_id).map(|&i| &self.entries[i].1)
    }

    /// Count of utterances per distinct config string, sorted by config.
    pub fn config_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for (_, cfg) in &self.entries {
            *counts.entry(cfg.to_string()).or_insert(0) += 1;
        }
        counts
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (utt, cfg) in &self.entries {
            let _ = writeln!(out, "{utt}\t{cfg}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (utt, cfg) = line.split_once('\t').ok_or_else(|| {
                Error::Parse(format!("plan line {}: expected utt<TAB>config", idx + 1))
            })?;
            entries.push((utt.to_string(), CodecConfig::parse(cfg)?));
        }
        let plan = DegradationPlan::from_entries(entries);
        if plan.index.len() != plan.entries.len() {
            return Err(Error::Parse("plan contains duplicate utterances".into()));
        }
        Ok(plan)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        DegradationPlan::parse(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Reads a codec list file: one config string per line, `#` comments.
pub fn read_codec_list(path: &Path) -> Result<Vec<CodecConfig>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_codec_list(&text)
}

pub fn parse_codec_list(text: &str) -> Result<Vec<CodecConfig>> {
    let configs = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(CodecConfig::parse)
        .collect::<Result<Vec<_>>>()?;
    if configs.is_empty() {
        return Err(Error::EmptyCodecList);
    }
    Ok(configs)
}
