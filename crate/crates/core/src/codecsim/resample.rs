//! Fixed 2:1 resampling between 8 kHz and 16 kHz.
//!
//! Both directions share one 95-tap Hamming-windowed sinc lowpass with a
//! 3.6 kHz cutoff (referred to the 16 kHz side), so a 16k -> 8k -> 16k round
//! trip is just two passes of the same anti-alias filter. Edges are handled
//! by clamping the sample index, and the tap sets are renormalized so that a
//! DC input comes back exactly at DC.

use crate::audio::{Waveform, RATE_NARROW, RATE_WIDE};
use crate::error::{Error, Result};

const TAPS: usize = 95;
const HALF: isize = (TAPS as isize - 1) / 2; // 47, the filter group delay
/// Cutoff as a fraction of the 16 kHz sampling rate: 3600 / 16000.
const CUTOFF: f64 = 0.225;

fn windowed_sinc() -> [f64; TAPS] {
    let mut h = [0.0; TAPS];
    for (k, tap) in h.iter_mut().enumerate() {
        let n = k as f64 - HALF as f64;
        let sinc = if n == 0.0 {
            2.0 * CUTOFF
        } else {
            (2.0 * std::f64::consts::PI * CUTOFF * n).sin() / (std::f64::consts::PI * n)
        };
        let window = 0.54 - 0.46 * (2.0 * std::f64::consts::PI * k as f64 / (TAPS - 1) as f64).cos();
        *tap = sinc * window;
    }
    h
}

fn clamp_idx(i: isize, len: usize) -> usize {
    i.clamp(0, len as isize - 1) as usize
}

/// 16 kHz -> 8 kHz: filter then keep every other sample.
fn downsample(x: &[f32]) -> Vec<f32> {
    let mut h = windowed_sinc();
    let sum: f64 = h.iter().sum();
    for tap in &mut h {
        *tap /= sum;
    }
    let out_len = x.len().div_ceil(2);
    (0..out_len)
        .map(|m| {
            let center = 2 * m as isize + HALF;
            let acc: f64 = h
                .iter()
                .enumerate()
                .map(|(k, &tap)| tap * f64::from(x[clamp_idx(center - k as isize, x.len())]))
                .sum();
            acc as f32
        })
        .collect()
}

/// 8 kHz -> 16 kHz: zero-stuff then filter. Each output parity only ever
/// sees one subset of taps, so the two subsets are normalized separately;
/// this absorbs the usual gain-of-2 compensation and makes DC exact.
fn upsample(x: &[f32]) -> Vec<f32> {
    let h = windowed_sinc();
    let mut even: Vec<(isize, f64)> = Vec::new();
    let mut odd: Vec<(isize, f64)> = Vec::new();
    for (k, &tap) in h.iter().enumerate() {
        // tap at offset m (in 16 kHz samples from the center) weights input
        // sample (j - m)/2 when producing output j; relative to base = j/2
        // that is -m/2 for even outputs and (1 - m)/2 for odd ones
        let m = k as isize - HALF;
        if m.rem_euclid(2) == 0 {
            even.push((-m / 2, tap));
        } else {
            odd.push(((1 - m) / 2, tap));
        }
    }
    for branch in [&mut even, &mut odd] {
        let sum: f64 = branch.iter().map(|&(_, t)| t).sum();
        for (_, t) in branch.iter_mut() {
            *t /= sum;
        }
    }
    let n = x.len();
    (0..2 * n)
        .map(|j| {
            let (base, branch) = if j % 2 == 0 {
                (j as isize / 2, &even)
            } else {
                (j as isize / 2, &odd)
            };
            let acc: f64 = branch
                .iter()
                .map(|&(off, tap)| tap * f64::from(x[clamp_idx(base + off, n)]))
                .sum();
            acc as f32
        })
        .collect()
}

/// Converts between the two supported rates. Requesting the current rate
/// returns a clone; any other pair is an error.
pub fn resample(input: &Waveform, target_rate: u32) -> Result<Waveform> {
    match (input.rate(), target_rate) {
        (from, to) if from == to => Ok(input.clone()),
        (RATE_WIDE, RATE_NARROW) => Waveform::new(downsample(input.samples()), RATE_NARROW),
        (RATE_NARROW, RATE_WIDE) => Waveform::new(upsample(input.samples()), RATE_WIDE),
        (from, to) => Err(Error::UnsupportedResamplePair { from, to }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::snr_db;

    fn tone(freq: f64, rate: u32, n: usize) -> Waveform {
        let samples: Vec<f32> = (0..n)
            .map(|i| (0.5 * (2.0 * std::f64::consts::PI * freq * i as f64 / rate as f64).sin()) as f32)
            .collect();
        Waveform::new(samples, rate).unwrap()
    }

    #[test]
    fn output_lengths() {
        let w = Waveform::new(vec![0.1; 16_000], RATE_WIDE).unwrap();
        assert_eq!(resample(&w, RATE_NARROW).unwrap().len(), 8_000);
        let w = Waveform::new(vec![0.1; 8_001], RATE_NARROW).unwrap();
        assert_eq!(resample(&w, RATE_WIDE).unwrap().len(), 16_002);
        // odd wide length rounds up
        let w = Waveform::new(vec![0.1; 16_001], RATE_WIDE).unwrap();
        assert_eq!(resample(&w, RATE_NARROW).unwrap().len(), 8_001);
    }

    #[test]
    fn dc_is_exact_both_ways() {
        let w = Waveform::new(vec![0.25; 4_000], RATE_WIDE).unwrap();
        let down = resample(&w, RATE_NARROW).unwrap();
        let mid = down.len() / 2;
        assert!((down.samples()[mid] - 0.25).abs() < 1e-6);
        let up = resample(&down, RATE_WIDE).unwrap();
        assert!((up.samples()[up.len() / 2] - 0.25).abs() < 1e-6);
    }

    #[test]
    fn same_rate_is_identity() {
        let w = tone(440.0, RATE_WIDE, 1_600);
        let out = resample(&w, RATE_WIDE).unwrap();
        assert_eq!(out.samples(), w.samples());
    }

    #[test]
    fn round_trip_preserves_in_band_tone() {
        // 1 kHz is well inside the 3.6 kHz passband. The taps are centered
        // on each output sample (zero-phase), so no delay compensation is
        // needed; only the clamped edges are excluded from the comparison.
        let w = tone(1_000.0, RATE_WIDE, 16_000);
        let down = resample(&w, RATE_NARROW).unwrap();
        let up = resample(&down, RATE_WIDE).unwrap();
        let a = &w.samples()[1_000..15_000];
        let b = &up.samples()[1_000..15_000];
        let snr = snr_db(a, b);
        assert!(snr > 25.0, "round-trip SNR {snr:.1} dB <= 25 dB");
    }

    #[test]
    fn downsample_kills_out_of_band_energy() {
        // 6 kHz lies above the 3.6 kHz cutoff: it must be strongly attenuated
        // rather than aliased into the 8 kHz signal.
        let w = tone(6_000.0, RATE_WIDE, 16_000);
        let down = resample(&w, RATE_NARROW).unwrap();
        let body = &down.samples()[500..7_500];
        let rms: f64 = (body.iter().map(|&s| f64::from(s) * f64::from(s)).sum::<f64>()
            / body.len() as f64)
            .sqrt();
        assert!(rms < 0.01, "residual rms {rms}");
    }

    #[test]
    fn rejects_unsupported_pairs() {
        let w = Waveform::new(vec![0.0; 100], RATE_NARROW).unwrap();
        assert!(matches!(
            resample(&w, 44_100),
            Err(Error::UnsupportedResamplePair { .. })
        ));
    }
}
