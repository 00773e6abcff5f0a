//! LFCC front end: 60-dimensional linear-frequency cepstral features.
//!
//! 20 ms Hamming-windowed frames with a 10 ms hop go through a 512-point
//! FFT, a bank of 20 triangular filters spaced *linearly* from DC to
//! Nyquist (unlike the mel spacing of MFCCs, which would compress exactly
//! the high band where vocoder artifacts live), a floored log, and an
//! orthonormal DCT-II keeping 20 coefficients. Delta and delta-delta
//! append to 60 columns per frame.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::audio::Waveform;
use crate::error::{Error, Result};

pub const NUM_FILTERS: usize = 20;
pub const NUM_CEPS: usize = 20;
pub const FEATURE_DIM: usize = 3 * NUM_CEPS;
pub const FRAME_MS: u32 = 20;
pub const HOP_MS: u32 = 10;
pub const FFT_SIZE: usize = 512;
/// Energies are floored here before the log, so silent frames produce a
/// large negative c0 instead of -inf.
pub const LOG_FLOOR: f64 = 1e-30;
/// Regression width for the delta computation.
const DELTA_WIDTH: isize = 2;

pub fn frame_len(rate: u32) -> usize {
    (rate as usize * FRAME_MS as usize) / 1_000
}

pub fn hop_len(rate: u32) -> usize {
    (rate as usize * HOP_MS as usize) / 1_000
}

/// Number of full frames for `n` samples, or an error if not even one
/// frame fits.
pub fn frame_count(n: usize, rate: u32) -> Result<usize> {
    let l = frame_len(rate);
    if n < l {
        return Err(Error::InputTooShort { len: n, min: l });
    }
    Ok((n - l) / hop_len(rate) + 1)
}

fn hamming(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.54 - 0.46 * (2.0 * std::f64::consts::PI * n as f64 / (len - 1) as f64).cos())
        .collect()
}

/// Triangular filterbank as a dense [NUM_FILTERS x (FFT_SIZE/2 + 1)]
/// weight table, linearly spaced between DC and Nyquist.
fn filterbank(rate: u32) -> Vec<Vec<f64>> {
    let nyquist = f64::from(rate) / 2.0;
    let n_bins = FFT_SIZE / 2 + 1;
    let edge = |j: usize| nyquist * j as f64 / (NUM_FILTERS + 1) as f64;
    (1..=NUM_FILTERS)
        .map(|i| {
            let (lo, mid, hi) = (edge(i - 1), edge(i), edge(i + 1));
            (0..n_bins)
                .map(|b| {
                    let f = b as f64 * f64::from(rate) / FFT_SIZE as f64;
                    if f >= lo && f <= mid {
                        (f - lo) / (mid - lo)
                    } else if f > mid && f <= hi {
                        (hi - f) / (hi - mid)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// Orthonormal DCT-II of the log energies, truncated to NUM_CEPS.
fn dct_ii(log_energies: &[f64]) -> Vec<f64> {
    let m = log_energies.len() as f64;
    (0..NUM_CEPS)
        .map(|k| {
            let scale = if k == 0 { (1.0 / m).sqrt() } else { (2.0 / m).sqrt() };
            scale
                * log_energies
                    .iter()
                    .enumerate()
                    .map(|(j, &e)| {
                        e * (std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / m).cos()
                    })
                    .sum::<f64>()
        })
        .collect()
}

/// Static 20-coefficient LFCCs, one row per frame.
pub fn lfcc_static(input: &Waveform) -> Result<Array2<f64>> {
    let l = frame_len(input.rate());
    let h = hop_len(input.rate());
    let t = frame_count(input.len(), input.rate())?;
    let window = hamming(l);
    let bank = filterbank(input.rate());
    let fft = FftPlanner::<f64>::new().plan_fft_forward(FFT_SIZE);
    let samples = input.samples();

    let mut out = Array2::zeros((t, NUM_CEPS));
    let mut buf = vec![Complex::new(0.0, 0.0); FFT_SIZE];
    for ti in 0..t {
        let start = ti * h;
        for (i, slot) in buf.iter_mut().enumerate() {
            *slot = if i < l {
                Complex::new(f64::from(samples[start + i]) * window[i], 0.0)
            } else {
                Complex::new(0.0, 0.0)
            };
        }
        fft.process(&mut buf);
        let power: Vec<f64> = buf[..FFT_SIZE / 2 + 1].iter().map(|c| c.norm_sqr()).collect();
        let log_energies: Vec<f64> = bank
            .iter()
            .map(|filt| {
                let e: f64 = filt.iter().zip(&power).map(|(w, p)| w * p).sum();
                e.max(LOG_FLOOR).ln()
            })
            .collect();
        let ceps = dct_ii(&log_energies);
        for (k, &c) in ceps.iter().enumerate() {
            out[[ti, k]] = c;
        }
    }
    Ok(out)
}

/// Two-sided regression delta over +-DELTA_WIDTH frames, with the frame
/// index clamped at the edges.
pub fn deltas(input: &Array2<f64>) -> Array2<f64> {
    let (t, d) = input.dim();
    let denom: f64 = 2.0 * (1..=DELTA_WIDTH).map(|n| (n * n) as f64).sum::<f64>();
    let clamp = |i: isize| i.clamp(0, t as isize - 1) as usize;
    let mut out = Array2::zeros((t, d));
    for ti in 0..t {
        for di in 0..d {
            let mut acc = 0.0;
            for n in 1..=DELTA_WIDTH {
                acc += n as f64
                    * (input[[clamp(ti as isize + n), di]] - input[[clamp(ti as isize - n), di]]);
            }
            out[[ti, di]] = acc / denom;
        }
    }
    out
}

/// Full 60-dimensional feature matrix (static + delta + delta-delta),
/// stored as f32 to match the on-disk cache format.
pub fn extract(input: &Waveform) -> Result<Array2<f32>> {
    let statics = lfcc_static(input)?;
    let d1 = deltas(&statics);
    let d2 = deltas(&d1);
    let t = statics.nrows();
    let mut out = Array2::zeros((t, FEATURE_DIM));
    for ti in 0..t {
        for k in 0..NUM_CEPS {
            out[[ti, k]] = statics[[ti, k]] as f32;
            out[[ti, NUM_CEPS + k]] = d1[[ti, k]] as f32;
            out[[ti, 2 * NUM_CEPS + k]] = d2[[ti, k]] as f32;
        }
    }
    Ok(out)
}

// --- feature cache -------------------------------------------------------

const CACHE_MAGIC: &[u8; 4] = b"LFCC";
const CACHE_VERSION: u32 = 1;

/// Writes one utterance's features as a little-endian binary blob.
pub fn write_cache(path: &Path, utt_id: &str, feats: &Array2<f32>) -> Result<()> {
    let (t, d) = feats.dim();
    let mut buf = Vec::with_capacity(24 + utt_id.len() + 4 * t * d);
    buf.extend_from_slice(CACHE_MAGIC);
    buf.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    buf.extend_from_slice(&(utt_id.len() as u32).to_le_bytes());
    buf.extend_from_slice(utt_id.as_bytes());
    buf.extend_from_slice(&(t as u32).to_le_bytes());
    buf.extend_from_slice(&(d as u32).to_le_bytes());
    buf.extend_from_slice(&FRAME_MS.to_le_bytes());
    buf.extend_from_slice(&HOP_MS.to_le_bytes());
    for row in feats.rows() {
        for &v in row {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

struct Cursor<'a> {
    raw: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let s = self.raw.get(self.pos..self.pos + n)?;
        self.pos += n;
        Some(s)
    }

    fn take_u32(&mut self) -> Option<u32> {
        let b = self.take(4)?;
        Some(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

/// Reads a blob written by [`write_cache`], returning the utterance id and
/// the feature matrix.
pub fn read_cache(path: &Path) -> Result<(String, Array2<f32>)> {
    let mut file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut raw = Vec::new();
    file.read_to_end(&mut raw).map_err(|e| Error::io(path, e))?;
    let bad = |why: &str| Error::InvalidCache(format!("{}: {why}", path.display()));
    let trunc = || bad("truncated");

    let mut cur = Cursor { raw: &raw, pos: 0 };
    if cur.take(4).ok_or_else(trunc)? != CACHE_MAGIC {
        return Err(bad("bad magic"));
    }
    if cur.take_u32().ok_or_else(trunc)? != CACHE_VERSION {
        return Err(bad("unsupported version"));
    }
    let utt_len = cur.take_u32().ok_or_else(trunc)? as usize;
    let utt_id = String::from_utf8(cur.take(utt_len).ok_or_else(trunc)?.to_vec())
        .map_err(|_| bad("utt id not utf-8"))?;
    let t = cur.take_u32().ok_or_else(trunc)? as usize;
    let d = cur.take_u32().ok_or_else(trunc)? as usize;
    if d != FEATURE_DIM {
        return Err(bad(&format!("expected {FEATURE_DIM} columns, got {d}")));
    }
    if cur.take_u32().ok_or_else(trunc)? != FRAME_MS
        || cur.take_u32().ok_or_else(trunc)? != HOP_MS
    {
        return Err(bad("frame geometry mismatch"));
    }
    let data = cur.take(4 * t * d).ok_or_else(trunc)?;
    if cur.pos != raw.len() {
        return Err(bad("trailing bytes"));
    }
    let values: Vec<f32> = data
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    let feats = Array2::from_shape_vec((t, d), values)
        .map_err(|e| bad(&format!("shape error: {e}")))?;
    Ok((utt_id, feats))
}

/// Text index mapping utterance ids to cache file names, one
/// `utt<TAB>file` pair per line, in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CacheIndex {
    entries: Vec<(String, String)>,
}

impl CacheIndex {
    pub fn new() -> Self {
        CacheIndex::default()
    }

    pub fn push(&mut self, utt_id: impl Into<String>, file: impl Into<String>) {
        self.entries.push((utt_id.into(), file.into()));
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn get(&self, utt_id: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(u, _)| u == utt_id)
            .map(|(_, f)| f.as_str())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        for (utt, file) in &self.entries {
            writeln!(out, "{utt}\t{file}").map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut index = CacheIndex::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (utt, file) = line.split_once('\t').ok_or_else(|| {
                Error::InvalidCache(format!("{}: index line {} lacks a tab", path.display(), i + 1))
            })?;
            index.push(utt, file);
        }
        Ok(index)
    }
}
