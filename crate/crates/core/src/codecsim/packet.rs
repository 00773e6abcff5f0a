//! Packet loss simulation.
//!
//! The waveform is cut into fixed-duration packets (a trailing partial
//! packet counts as a packet) and each one is dropped independently with
//! the configured probability. Dropped packets are concealed either by
//! zero fill or by repeating the previous *concealed* packet, which is how
//! simple real-world concealment behaves under burst loss.

use rand::Rng;

use crate::audio::Waveform;
use crate::error::Result;
use crate::util::rng_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Concealment {
    ZeroFill,
    RepeatPrevious,
}

/// Drops packets of `packet_ms` with probability `loss_rate`, concealing
/// each dropped span. Output length always equals input length.
pub fn apply_packet_loss(
    input: &Waveform,
    loss_rate: f64,
    packet_ms: u32,
    concealment: Concealment,
    seed: u64,
) -> Result<Waveform> {
    let packet_len = (input.rate() as usize * packet_ms as usize) / 1_000;
    let mut out = input.samples().to_vec();
    if packet_len == 0 || out.is_empty() || loss_rate <= 0.0 {
        return Waveform::new(out, input.rate());
    }
    let mut rng = rng_for(seed, "packet_loss");
    let n = out.len();
    let mut start = 0;
    while start < n {
        let end = (start + packet_len).min(n);
        let dropped = rng.random::<f64>() < loss_rate;
        if dropped {
            match concealment {
                Concealment::ZeroFill => out[start..end].fill(0.0),
                Concealment::RepeatPrevious => {
                    if start == 0 {
                        out[..end].fill(0.0);
                    } else {
                        // copy from the already-concealed output, one sample
                        // at a time so short leading packets repeat cleanly
                        for i in start..end {
                            out[i] = out[i - packet_len.min(start)];
                        }
                    }
                }
            }
        }
        start = end;
    }
    Waveform::new(out, input.rate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::RATE_WIDE;

    fn dc(n: usize) -> Waveform {
        Waveform::new(vec![0.5; n], RATE_WIDE).unwrap()
    }

    #[test]
    fn zero_rate_is_identity() {
        let w = dc(16_000);
        let out = apply_packet_loss(&w, 0.0, 20, Concealment::ZeroFill, 7).unwrap();
        assert_eq!(out.samples(), w.samples());
    }

    #[test]
    fn length_is_preserved_including_tail_packet() {
        for n in [16_000, 16_001, 16_319, 320, 1] {
            let w = dc(n);
            let out = apply_packet_loss(&w, 0.5, 20, Concealment::ZeroFill, 3).unwrap();
            assert_eq!(out.len(), n);
        }
    }

    #[test]
    fn full_rate_zero_fill_silences_everything() {
        let w = dc(10_000);
        let out = apply_packet_loss(&w, 1.0, 20, Concealment::ZeroFill, 11).unwrap();
        assert!(out.samples().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn repeat_previous_copies_last_good_packet() {
        // ramp signal: any repeated packet shows up as a value discontinuity
        // equal to the previous packet's contents
        let samples: Vec<f32> = (0..1_600).map(|i| i as f32 / 10_000.0).collect();
        let w = Waveform::new(samples, RATE_WIDE).unwrap();
        let out = apply_packet_loss(&w, 0.5, 20, Concealment::RepeatPrevious, 5).unwrap();
        let packet = 320;
        for (p, chunk) in out.samples().chunks(packet).enumerate() {
            let original: Vec<f32> = (0..chunk.len())
                .map(|i| (p * packet + i) as f32 / 10_000.0)
                .collect();
            if chunk != original.as_slice() {
                if p == 0 {
                    // nothing to repeat yet: first packet falls back to zeros
                    assert!(chunk.iter().all(|&s| s == 0.0));
                } else {
                    // concealed: equals the concealed output one packet back
                    let prev = &out.samples()[(p - 1) * packet..p * packet];
                    assert_eq!(chunk, &prev[..chunk.len()]);
                }
            }
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let w = dc(16_000);
        let a = apply_packet_loss(&w, 0.3, 20, Concealment::ZeroFill, 42).unwrap();
        let b = apply_packet_loss(&w, 0.3, 20, Concealment::ZeroFill, 42).unwrap();
        assert_eq!(a.samples(), b.samples());
        let c = apply_packet_loss(&w, 0.3, 20, Concealment::ZeroFill, 43).unwrap();
        assert_ne!(a.samples(), c.samples());
    }

    #[test]
    fn drop_fraction_matches_binomial_expectation() {
        // Count zeroed packets on a DC signal across many seeds; the
        // aggregate must sit within 3 sigma of the binomial mean.
        let w = dc(16_000); // 50 packets of 320 at 16 kHz / 20 ms
        let packets_per_run = 50usize;
        let runs = 400usize;
        let p = 0.3;
        let mut dropped = 0usize;
        for seed in 0..runs as u64 {
            let out = apply_packet_loss(&w, p, 20, Concealment::ZeroFill, seed).unwrap();
            dropped += out
                .samples()
                .chunks(320)
                .filter(|c| c.iter().all(|&s| s == 0.0))
                .count();
        }
        let total = (packets_per_run * runs) as f64;
        let mean = total * p;
        let sigma = (total * p * (1.0 - p)).sqrt();
        let got = dropped as f64;
        assert!(
            (got - mean).abs() < 3.0 * sigma,
            "dropped {got} vs expected {mean} +- {:.1}",
            3.0 * sigma
        );
    }
}
