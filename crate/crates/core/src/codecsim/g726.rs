//! Simplified G.726-style ADPCM at 16/24/32/40 kbit/s (2-5 bits per
//! 8 kHz sample).
//!
//! This is a floating-point re-derivation of the classic structure rather
//! than the bit-exact standard: a two-pole / six-zero adaptive predictor,
//! a midtread quantizer on the prediction residual, and Jayant one-word
//! step-size adaptation. The quantizer works on the *reconstructed* signal
//! (closed loop), so the decoder replays the encoder state exactly and
//! quality degrades gracefully as the bit budget shrinks.

use crate::audio::{Waveform, RATE_NARROW};
use crate::codecsim::config::G726_BITRATES;
use crate::error::{Error, Result};

const STEP_INIT: f64 = 0.02;
const STEP_MIN: f64 = 1e-5;
const STEP_MAX: f64 = 0.5;

/// Jayant step multipliers, indexed by quantized magnitude.
fn multipliers(bits: u32) -> &'static [f64] {
    match bits {
        2 => &[0.9, 1.6],
        3 => &[0.9, 0.95, 1.2, 1.75],
        4 => &[0.9, 0.9, 0.95, 1.0, 1.1, 1.2, 1.4, 1.8],
        5 => &[
            0.9, 0.9, 0.9, 0.95, 0.95, 1.0, 1.0, 1.05, 1.1, 1.15, 1.2, 1.3, 1.4, 1.55, 1.7, 1.9,
        ],
        _ => unreachable!("bits validated by bits_per_sample"),
    }
}

pub fn bits_per_sample(bitrate_bps: u32) -> Result<u32> {
    if !G726_BITRATES.contains(&bitrate_bps) {
        return Err(Error::UnsupportedBitrate {
            codec: "g726",
            bitrate: bitrate_bps,
        });
    }
    Ok(bitrate_bps / RATE_NARROW)
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Predictor + quantizer state shared by encoder and decoder.
#[derive(Debug, Clone)]
struct State {
    step: f64,
    /// pole coefficients on past reconstructed samples
    a: [f64; 2],
    /// zero coefficients on past quantized differences
    b: [f64; 6],
    /// past reconstructed samples, sr[0] most recent
    sr: [f64; 2],
    /// past quantized differences, dq[0] most recent
    dq: [f64; 6],
    /// signs of the two most recent surrogate signals p = dq + sez
    pk: [f64; 2],
    max_mag: f64,
    mult: &'static [f64],
}

impl State {
    fn new(bits: u32) -> Self {
        State {
            step: STEP_INIT,
            a: [0.0; 2],
            b: [0.0; 6],
            sr: [0.0; 2],
            dq: [0.0; 6],
            pk: [0.0; 2],
            max_mag: f64::from((1u32 << (bits - 1)) - 1),
            mult: multipliers(bits),
        }
    }

    fn predict(&self) -> (f64, f64) {
        let sez: f64 = self.b.iter().zip(&self.dq).map(|(b, dq)| b * dq).sum();
        let se = sez + self.a.iter().zip(&self.sr).map(|(a, sr)| a * sr).sum::<f64>();
        (se, sez)
    }

    /// Quantizes a residual to (sign, magnitude code).
    fn quantize(&self, d: f64) -> (f64, u32) {
        let mag = (d.abs() / self.step).round().min(self.max_mag);
        (sgn(d), mag as u32)
    }

    /// Advances the state given the transmitted (sign, magnitude) pair and
    /// returns the reconstructed sample. This is the complete shared
    /// encoder/decoder update.
    fn reconstruct(&mut self, sign: f64, mag: u32) -> f64 {
        let (se, sez) = self.predict();
        let dq = if mag == 0 { 0.0 } else { sign * f64::from(mag) * self.step };
        let sr = se + dq;
        let p = dq + sez;

        // pole adaptation: sign-sign LMS with leakage, stability-clamped
        let spk = sgn(p);
        let f = if self.a[0].abs() <= 0.5 {
            4.0 * self.a[0]
        } else {
            2.0 * sgn(self.a[0])
        };
        let a1 = self.a[0] + 3.0 * 2f64.powi(-8) * spk * self.pk[0] - 2f64.powi(-8) * self.a[0];
        let a2 = self.a[1]
            + 2f64.powi(-7) * (spk * self.pk[1] - f * spk * self.pk[0])
            - 2f64.powi(-7) * self.a[1];
        let a2 = a2.clamp(-0.75, 0.75);
        let a1_limit = 1.0 - 2f64.powi(-4) - a2;
        self.a = [a1.clamp(-a1_limit, a1_limit), a2];

        // zero adaptation on the sign of each delayed difference
        let sdq = sgn(dq);
        for (b, &past) in self.b.iter_mut().zip(&self.dq) {
            *b = (1.0 - 2f64.powi(-8)) * *b + 2f64.powi(-7) * sdq * sgn(past);
        }

        self.dq.rotate_right(1);
        self.dq[0] = dq;
        self.sr.rotate_right(1);
        self.sr[0] = sr;
        self.pk.rotate_right(1);
        self.pk[0] = spk;

        self.step = (self.step * self.mult[mag as usize]).clamp(STEP_MIN, STEP_MAX);
        sr
    }
}

/// Encodes to (sign, magnitude) codes.
pub fn encode(input: &Waveform, bits: u32) -> Vec<(f64, u32)> {
    let mut st = State::new(bits);
    input
        .samples()
        .iter()
        .map(|&x| {
            let (se, _) = st.predict();
            let (sign, mag) = st.quantize(f64::from(x) - se);
            st.reconstruct(sign, mag);
            (sign, mag)
        })
        .collect()
}

/// Decodes codes produced by [`encode`] with the same `bits`.
pub fn decode(codes: &[(f64, u32)], bits: u32) -> Result<Waveform> {
    let mut st = State::new(bits);
    let samples: Vec<f32> = codes
        .iter()
        .map(|&(sign, mag)| st.reconstruct(sign, mag).clamp(-1.0, 1.0) as f32)
        .collect();
    Waveform::new(samples, RATE_NARROW)
}

/// Encode + decode at the given bitrate. Input must be 8 kHz.
pub fn transcode(input: &Waveform, bitrate_bps: u32) -> Result<Waveform> {
    if input.rate() != RATE_NARROW {
        return Err(Error::RateMismatch {
            expected: RATE_NARROW,
            got: input.rate(),
        });
    }
    let bits = bits_per_sample(bitrate_bps)?;
    let codes = encode(input, bits);
    decode(&codes, bits)
}
