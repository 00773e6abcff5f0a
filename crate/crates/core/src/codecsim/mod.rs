//! Transmission-channel simulation: codecs plus the degradations layered
//! around them.
//!
//! [`degrade`] is the main entry point. It takes 16 kHz audio and applies,
//! in order: bandwidth reduction (for narrowband configs), DTX gating,
//! the codec kernel itself, packet loss, and the return to 16 kHz. Every
//! random stage draws from a seed derived from the caller's seed, so a
//! (waveform, config, seed) triple always produces the same output.

pub mod config;
pub mod cvsd;
pub mod dtx;
pub mod external;
pub mod g711;
pub mod g726;
pub mod packet;
pub mod resample;

pub use config::{Band, CodecConfig, CodecKind, CompandingLaw};
pub use dtx::{DTX_FRAME_MS, DTX_HANGOVER_FRAMES, DTX_THRESHOLD_DB};
pub use packet::Concealment;
pub use resample::resample;

use crate::audio::{Waveform, RATE_NARROW, RATE_WIDE};
use crate::error::{Error, Result};
use crate::util::derive_seed;

/// Packet duration used when a config requests loss.
pub const LOSS_PACKET_MS: u32 = 20;

/// Runs a 16 kHz waveform through the channel described by `config`.
///
/// The output is always 16 kHz and clamped to [-1, 1]; narrowband configs
/// come back upsampled, so the spectral ceiling — not the container rate —
/// carries the band limitation, matching how narrowband recordings appear
/// in real wideband corpora.
pub fn degrade(input: &Waveform, config: &CodecConfig, seed: u64) -> Result<Waveform> {
    config.validate()?;
    if input.rate() != RATE_WIDE {
        return Err(Error::RateMismatch {
            expected: RATE_WIDE,
            got: input.rate(),
        });
    }

    let mut w = if config.band == Band::Narrow {
        resample(input, RATE_NARROW)?
    } else {
        input.clone()
    };

    if config.dtx {
        let (gated, _active) = dtx::apply_dtx(
            &w,
            DTX_THRESHOLD_DB,
            DTX_HANGOVER_FRAMES,
            derive_seed(seed, "dtx"),
        )?;
        w = gated;
    }

    w = match config.kind {
        CodecKind::Passthrough => w,
        CodecKind::G711 => {
            let law = config.law.unwrap_or(CompandingLaw::Mu);
            g711::transcode(&w, law)?
        }
        CodecKind::G726 => {
            let bitrate = config.bitrate_bps.expect("validated");
            g726::transcode(&w, bitrate)?
        }
        CodecKind::Cvsd => {
            let bitrate = config.bitrate_bps.expect("validated");
            cvsd::transcode(&w, bitrate)?
        }
        CodecKind::External => {
            let cmd = config.external_cmd.as_deref().expect("validated");
            external::run_external(&w, cmd)?
        }
    };

    if config.loss_rate > 0.0 {
        w = packet::apply_packet_loss(
            &w,
            config.loss_rate,
            LOSS_PACKET_MS,
            Concealment::ZeroFill,
            derive_seed(seed, "loss"),
        )?;
    }

    if w.rate() == RATE_NARROW {
        w = resample(&w, RATE_WIDE)?;
    }
    let rate = w.rate();
    Waveform::clamped(w.into_samples(), rate)
}
