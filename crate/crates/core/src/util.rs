//! Seed derivation and small shared helpers.
//!
//! All stochastic stages in the pipeline draw from [`ChaCha8Rng`] seeded
//! through [`derive_seed`], so artifacts are reproducible across runs and
//! independent of platform hasher state.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// FNV-1a 64-bit hash. Stable across platforms and toolchains, unlike
/// `std::hash::DefaultHasher`.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derives a sub-seed from a global seed and a label (stage name, utt id).
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut buf = Vec::with_capacity(8 + label.len());
    buf.extend_from_slice(&seed.to_le_bytes());
    buf.extend_from_slice(label.as_bytes());
    fnv1a64(&buf)
}

/// A deterministic RNG per (seed, label) pair.
pub fn rng_for(seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, label))
}

/// log10 of a power quantity in dB, floored to avoid -inf on silence.
pub fn power_db(mean_square: f64) -> f64 {
    10.0 * (mean_square.max(1e-12)).log10()
}

/// Round-trip signal-to-noise ratio in dB between a reference and a
/// processed signal of equal length.
pub fn snr_db(reference: &[f32], processed: &[f32]) -> f64 {
    assert_eq!(reference.len(), processed.len());
    let mut sig = 0.0f64;
    let mut err = 0.0f64;
    for (&r, &p) in reference.iter().zip(processed) {
        let r = f64::from(r);
        let e = r - f64::from(p);
        sig += r * r;
        err += e * e;
    }
    10.0 * (sig / err.max(1e-300)).log10()
}
