//! Desk-scale anti-spoofing countermeasure experimentation toolkit.
//!
//! The crate covers the full loop of a codec-degradation study: trial
//! manifests and cyclic degradation plans, parameterized codec simulations
//! (G.711, G.726 ADPCM, CVSD) with packet-loss / DTX / bandwidth stages,
//! a 60-dimensional LFCC front-end, margin-based training losses with
//! analytic gradients, data-feeding and mini-batching strategies, a small
//! convolutional encoder trained with Adam, and EER evaluation with
//! per-codec breakdowns and weighted score fusion.

pub mod audio;
pub mod batcher;
pub mod codecsim;
pub mod error;
pub mod frontend;
pub mod losses;
pub mod manifest;
pub mod metrics;
pub mod synth;
pub mod trainer;
pub mod util;

pub use audio::Waveform;
pub use error::{Error, Result};
