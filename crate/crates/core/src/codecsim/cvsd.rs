//! CVSD-style delta modulation.
//!
//! Continuously variable slope delta modulation encodes each sample as a
//! small step relative to an accumulator. At 1 bit/sample the step size is
//! adapted with syllabic companding (grow on runs of identical bits, decay
//! otherwise); the multi-bit variants quantize the residual to a few levels
//! and adapt on saturation. Encoder and decoder share the same state
//! machine, so decoding replays the accumulator trajectory exactly.

use crate::audio::Waveform;
use crate::error::{Error, Result};

const STEP_INIT: f64 = 0.02;
const STEP_MIN: f64 = 1e-3;
const STEP_MAX: f64 = 0.25;
const STEP_GROW: f64 = 1.25;
const STEP_DECAY: f64 = 0.98;
const ACC_LEAK: f64 = 0.999;

/// Bits per sample supported by the simulator. The bitrate is expressed in
/// bits/s and must be an exact multiple of the waveform's sample rate.
pub fn bits_per_sample(bitrate_bps: u32, rate: u32) -> Result<u32> {
    if !bitrate_bps.is_multiple_of(rate) {
        return Err(Error::UnsupportedBitrate {
            codec: "cvsd",
            bitrate: bitrate_bps,
        });
    }
    let bps = bitrate_bps / rate;
    if !matches!(bps, 1 | 2 | 4) {
        return Err(Error::UnsupportedBitrate {
            codec: "cvsd",
            bitrate: bitrate_bps,
        });
    }
    Ok(bps)
}

#[derive(Debug, Clone)]
struct OneBitState {
    acc: f64,
    step: f64,
    /// last three emitted bits, packed LSB-first; seeded with alternating
    /// bits so an idle channel starts in the decay regime
    history: u8,
}

impl OneBitState {
    fn new() -> Self {
        OneBitState {
            acc: 0.0,
            step: STEP_INIT,
            history: 0b101,
        }
    }

    /// Advances the shared encoder/decoder state by one bit.
    fn step_with(&mut self, bit: bool) -> f64 {
        self.history = ((self.history << 1) | u8::from(bit)) & 0b111;
        // run of three identical bits means the accumulator is lagging
        if self.history == 0b111 || self.history == 0b000 {
            self.step = (self.step * STEP_GROW).min(STEP_MAX);
        } else {
            self.step = (self.step * STEP_DECAY).max(STEP_MIN);
        }
        self.acc += if bit { self.step } else { -self.step };
        self.acc *= ACC_LEAK;
        self.acc = self.acc.clamp(-1.0, 1.0);
        self.acc
    }
}

#[derive(Debug, Clone)]
struct MultiBitState {
    acc: f64,
    step: f64,
    max_code: i32,
}

impl MultiBitState {
    fn new(bits: u32) -> Self {
        MultiBitState {
            acc: 0.0,
            step: STEP_INIT,
            max_code: (1 << (bits - 1)) - 1,
        }
    }

    fn quantize(&self, x: f64) -> i32 {
        let code = ((x - self.acc) / self.step).round();
        (code as i32).clamp(-self.max_code, self.max_code)
    }

    fn step_with(&mut self, code: i32) -> f64 {
        self.acc += f64::from(code) * self.step;
        self.acc *= ACC_LEAK;
        self.acc = self.acc.clamp(-1.0, 1.0);
        if code.abs() == self.max_code {
            self.step = (self.step * STEP_GROW).min(STEP_MAX);
        } else if code == 0 {
            self.step = (self.step * STEP_DECAY).max(STEP_MIN);
        }
        self.acc
    }
}

/// Encodes to the bitstream codes. Exposed for the bitstream tests; the
/// usual entry point is [`transcode`].
pub fn encode(input: &Waveform, bits: u32) -> Vec<i32> {
    match bits {
        1 => {
            let mut st = OneBitState::new();
            input
                .samples()
                .iter()
                .map(|&s| {
                    let bit = f64::from(s) >= st.acc;
                    st.step_with(bit);
                    i32::from(bit)
                })
                .collect()
        }
        _ => {
            let mut st = MultiBitState::new(bits);
            input
                .samples()
                .iter()
                .map(|&s| {
                    let code = st.quantize(f64::from(s));
                    st.step_with(code);
                    code
                })
                .collect()
        }
    }
}

/// Decodes a bitstream produced by [`encode`] with the same `bits`.
pub fn decode(codes: &[i32], bits: u32, rate: u32) -> Result<Waveform> {
    let samples: Vec<f32> = match bits {
        1 => {
            let mut st = OneBitState::new();
            codes.iter().map(|&c| st.step_with(c != 0) as f32).collect()
        }
        _ => {
            let mut st = MultiBitState::new(bits);
            codes.iter().map(|&c| st.step_with(c) as f32).collect()
        }
    };
    Waveform::new(samples, rate)
}

/// Encode + decode at the given bitrate.
pub fn transcode(input: &Waveform, bitrate_bps: u32) -> Result<Waveform> {
    let bits = bits_per_sample(bitrate_bps, input.rate())?;
    let codes = encode(input, bits);
    decode(&codes, bits, input.rate())
}
