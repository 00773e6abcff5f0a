//! Discontinuous transmission (DTX) simulation.
//!
//! Frames whose power falls below a threshold are treated as silence and
//! replaced with low-level comfort noise, as a voice-activity-gated channel
//! would do. A hangover counter keeps transmitting for a few frames after
//! speech ends so word tails are not clipped.

use rand::Rng;

use crate::audio::Waveform;
use crate::error::Result;
use crate::util::{power_db, rng_for};

pub const DTX_FRAME_MS: u32 = 20;
pub const DTX_THRESHOLD_DB: f64 = -40.0;
pub const DTX_HANGOVER_FRAMES: u32 = 4;
/// Uniform amplitude giving -60 dBFS RMS comfort noise.
const COMFORT_PEAK: f64 = 1e-3 * 1.732_050_807_568_877_2; // 1e-3 * sqrt(3)

/// Applies DTX gating with the given activity threshold and hangover.
/// Returns the gated waveform and the number of frames that were
/// transmitted (active or held by hangover).
pub fn apply_dtx(
    input: &Waveform,
    threshold_db: f64,
    hangover_frames: u32,
    seed: u64,
) -> Result<(Waveform, usize)> {
    let frame_len = (input.rate() as usize * DTX_FRAME_MS as usize) / 1_000;
    let mut out = input.samples().to_vec();
    if out.is_empty() {
        return Ok((Waveform::new(out, input.rate())?, 0));
    }
    let mut rng = rng_for(seed, "dtx");
    let mut hangover = 0u32;
    let mut transmitted = 0usize;
    let mut start = 0;
    while start < out.len() {
        let end = (start + frame_len).min(out.len());
        let frame = &out[start..end];
        let mean_sq =
            frame.iter().map(|&s| f64::from(s) * f64::from(s)).sum::<f64>() / frame.len() as f64;
        let active = power_db(mean_sq) > threshold_db;
        if active {
            hangover = hangover_frames;
            transmitted += 1;
        } else if hangover > 0 {
            hangover -= 1;
            transmitted += 1;
        } else {
            for s in &mut out[start..end] {
                *s = (rng.random_range(-COMFORT_PEAK..=COMFORT_PEAK)) as f32;
            }
        }
        start = end;
    }
    Ok((Waveform::new(out, input.rate())?, transmitted))
}
