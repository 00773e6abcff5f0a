//! Synthetic two-class toy corpus.
//!
//! Bonafide utterances are harmonic-rich voiced tones: coherent partials
//! with a 1/k^1.1 rolloff, gentle vibrato and amplitude modulation, and a
//! −40 dB noise floor. Spoofs imitate vocoder output: flattened spectral
//! tilt, stretched (inharmonic) partials, per-partial random phases, no
//! vibrato, and a much higher noise floor — so the classes differ in
//! exactly the kind of spectral-envelope detail cepstral features pick
//! up, while staying distinguishable (though harder) after codec damage.
//!
//! Every utterance is generated from its own derived RNG stream, so
//! corpus generation is order-independent and any single utterance can
//! be re-synthesized in isolation.

use std::f64::consts::TAU;

use rand::Rng;

use crate::audio::{Waveform, RATE_WIDE};
use crate::error::{Error, Result};
use crate::manifest::{Key, Manifest, Record};
use crate::util::rng_for;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthConfig {
    pub n_utts: usize,
    pub n_speakers: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { n_utts: 200, n_speakers: 4, seed: 0 }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_utts == 0 || self.n_speakers == 0 {
            return Err(Error::Parse(
                "synth needs at least one utterance and one speaker".into(),
            ));
        }
        Ok(())
    }
}

/// Per-attack recipes: spectral-tilt exponent, inharmonicity stretch,
/// and noise floor (dBFS). A01 additionally carries a 30 Hz buzz.
const ATTACK_TILT: [f64; 3] = [-0.85, -0.95, -0.75];
const ATTACK_STRETCH: [f64; 3] = [0.004, 0.002, 0.006];
const ATTACK_NOISE_DB: [f64; 3] = [-22.0, -26.0, -18.0];

const BONA_TILT: f64 = -1.1;
const BONA_NOISE_DB: f64 = -40.0;
/// Partials stop below this frequency for both classes.
const MAX_PARTIAL_HZ: f64 = 4_000.0;

fn utt_id(index: usize) -> String {
    format!("U{index:05}")
}

/// Index of this spoof among all spoofs (utterances at i % 3 == 0 are
/// bonafide, the rest spoof ~ a 1:2 class imbalance).
fn spoof_rank(index: usize) -> usize {
    index - index / 3 - 1
}

pub fn record(cfg: &SynthConfig, index: usize) -> Record {
    let bona = index.is_multiple_of(3);
    Record {
        speaker: format!("SPK{:02}", index % cfg.n_speakers),
        utt_id: utt_id(index),
        key: if bona { Key::Bonafide } else { Key::Spoof },
        attack: if bona {
            None
        } else {
            Some(format!("A{:02}", 1 + spoof_rank(index) % 3))
        },
        codec_tag: None,
    }
}

/// Manifest for the whole corpus without synthesizing any audio.
pub fn manifest(cfg: &SynthConfig) -> Result<Manifest> {
    cfg.validate()?;
    Ok(Manifest::from_records(
        (0..cfg.n_utts).map(|i| record(cfg, i)).collect(),
    ))
}

/// Synthesizes utterance `index`; deterministic in (cfg.seed, index).
pub fn utterance(cfg: &SynthConfig, index: usize) -> Result<(Record, Waveform)> {
    cfg.validate()?;
    if index >= cfg.n_utts {
        return Err(Error::Parse(format!(
            "utterance index {index} out of range (corpus has {})",
            cfg.n_utts
        )));
    }
    let rec = record(cfg, index);
    let rate = RATE_WIDE as f64;
    let mut rng = rng_for(cfg.seed, &format!("synth.{}", rec.utt_id));

    let speaker_f0 = 95.0 + 24.0 * (index % cfg.n_speakers) as f64;
    let f0 = speaker_f0 * (1.0 + rng.random_range(-0.06..0.06));
    let dur_s: f64 = rng.random_range(1.05..2.4);
    let lead_s: f64 = rng.random_range(0.05..0.2);
    let trail_s: f64 = rng.random_range(0.05..0.2);
    let peak: f64 = rng.random_range(0.35..0.5);
    let n_core = (dur_s * rate) as usize;

    let core: Vec<f64> = match rec.key {
        Key::Bonafide => {
            let glottal = rng.random_range(0.0..TAU);
            let vib_phase = rng.random_range(0.0..TAU);
            let am_freq = rng.random_range(1.5..3.0);
            let am_phase = rng.random_range(0.0..TAU);
            let n_partials = (MAX_PARTIAL_HZ / f0) as usize;
            let amps: Vec<f64> =
                (1..=n_partials).map(|k| (k as f64).powf(BONA_TILT)).collect();
            let noise = 10f64.powf(BONA_NOISE_DB / 20.0);
            let mut phase = 0.0_f64;
            (0..n_core)
                .map(|n| {
                    let t = n as f64 / rate;
                    // vibrato via phase accumulation keeps partials locked
                    let inst = f0 * (1.0 + 0.015 * (TAU * 4.5 * t + vib_phase).sin());
                    phase += TAU * inst / rate;
                    let mut v = 0.0;
                    for (k, amp) in amps.iter().enumerate() {
                        v += amp * ((k + 1) as f64 * (phase + glottal)).sin();
                    }
                    let am = 1.0 + 0.25 * (TAU * am_freq * t + am_phase).sin();
                    v * am + noise * rng.random_range(-1.0..1.0)
                })
                .collect()
        }
        Key::Spoof => {
            let a = spoof_rank(index) % 3;
            let noise = 10f64.powf(ATTACK_NOISE_DB[a] / 20.0);
            // stretched partial series: partial k sits at k·f0·(1 + βk)
            let mut partials: Vec<(f64, f64, f64)> = Vec::new();
            for k in 1.. {
                let freq = k as f64 * f0 * (1.0 + ATTACK_STRETCH[a] * k as f64);
                if freq >= MAX_PARTIAL_HZ {
                    break;
                }
                let amp = (k as f64).powf(ATTACK_TILT[a]);
                let ph = rng.random_range(0.0..TAU);
                partials.push((freq, amp, ph));
            }
            (0..n_core)
                .map(|n| {
                    let t = n as f64 / rate;
                    let mut v = 0.0;
                    for &(freq, amp, ph) in &partials {
                        v += amp * (TAU * freq * t + ph).sin();
                    }
                    if a == 0 {
                        v *= 1.0 + 0.35 * (TAU * 30.0 * t).sin();
                    }
                    v + noise * rng.random_range(-1.0..1.0)
                })
                .collect()
        }
    };

    let silence = |rng: &mut _, secs: f64| -> Vec<f64> {
        let rng: &mut rand_chacha::ChaCha8Rng = rng;
        (0..(secs * rate) as usize)
            .map(|_| 1e-4 * rng.random_range(-1.0..1.0f64))
            .collect()
    };
    let mut samples = silence(&mut rng, lead_s);
    samples.extend_from_slice(&core);
    samples.extend(silence(&mut rng, trail_s));

    let max_abs = samples.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    let scale = peak / max_abs;
    let scaled: Vec<f32> = samples.iter().map(|&v| (v * scale) as f32).collect();
    Ok((rec, Waveform::new(scaled, RATE_WIDE)?))
}

/// Whole corpus in memory; prefer `utterance` for streaming generation.
pub fn generate(cfg: &SynthConfig) -> Result<(Manifest, Vec<(String, Waveform)>)> {
    let manifest = manifest(cfg)?;
    let mut audio = Vec::with_capacity(cfg.n_utts);
    for i in 0..cfg.n_utts {
        let (rec, wave) = utterance(cfg, i)?;
        audio.push((rec.utt_id, wave));
    }
    Ok((manifest, audio))
}
