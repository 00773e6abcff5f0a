//! G.711 companding (continuous-curve approximation).
//!
//! Rather than the tabulated segmented encoder from the standard, we compand
//! with the continuous mu-law / A-law curves and quantize the companded
//! magnitude to 7 bits plus sign (128 levels per polarity, 256 total). This
//! keeps the characteristic logarithmic quantization-noise profile while
//! staying easy to reason about in tests.

use crate::audio::{Waveform, RATE_NARROW};
use crate::codecsim::config::CompandingLaw;
use crate::error::{Error, Result};

const MU: f64 = 255.0;
const A: f64 = 87.6;
/// 7 magnitude bits.
const LEVELS: f64 = 127.0;

/// Forward companding curve on [-1, 1].
fn compress(x: f64, law: CompandingLaw) -> f64 {
    let sign = x.signum();
    let mag = x.abs();
    let y = match law {
        CompandingLaw::Mu => (1.0 + MU * mag).ln() / (1.0 + MU).ln(),
        CompandingLaw::A => {
            if mag < 1.0 / A {
                A * mag / (1.0 + A.ln())
            } else {
                (1.0 + (A * mag).ln()) / (1.0 + A.ln())
            }
        }
    };
    sign * y
}

/// Inverse companding curve on [-1, 1].
fn expand(y: f64, law: CompandingLaw) -> f64 {
    let sign = y.signum();
    let mag = y.abs();
    let x = match law {
        CompandingLaw::Mu => ((1.0 + MU).powf(mag) - 1.0) / MU,
        CompandingLaw::A => {
            if mag < 1.0 / (1.0 + A.ln()) {
                mag * (1.0 + A.ln()) / A
            } else {
                ((mag * (1.0 + A.ln()) - 1.0).exp()) / A
            }
        }
    };
    sign * x
}

/// Compand, quantize to sign + 7-bit magnitude, expand.
pub fn transcode(input: &Waveform, law: CompandingLaw) -> Result<Waveform> {
    if input.rate() != RATE_NARROW {
        return Err(Error::RateMismatch {
            expected: RATE_NARROW,
            got: input.rate(),
        });
    }
    let out: Vec<f32> = input
        .samples()
        .iter()
        .map(|&s| {
            let x = f64::from(s).clamp(-1.0, 1.0);
            let y = compress(x, law);
            let code = (y.abs() * LEVELS).round().min(LEVELS);
            let q = y.signum() * code / LEVELS;
            expand(q, law) as f32
        })
        .collect();
    Waveform::new(out, RATE_NARROW)
}
