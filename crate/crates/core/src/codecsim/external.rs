//! External-command codec escape hatch.
//!
//! The command is run through `sh -c` with raw little-endian PCM16 mono on
//! stdin and is expected to write the processed audio in the same format to
//! stdout. The sample rate is exported as `SPOOFCM_RATE` so wrappers around
//! tools like sox or ffmpeg can construct their own argument lists.

use std::io::{Read, Write};
use std::process::{Command, Stdio};

use crate::audio::Waveform;
use crate::error::{Error, Result};

/// Pipes the waveform through `cmd`. The output length may differ from the
/// input; it is the command's responsibility to preserve duration if the
/// downstream pipeline requires it.
pub fn run_external(input: &Waveform, cmd: &str) -> Result<Waveform> {
    let pcm: Vec<u8> = input
        .samples()
        .iter()
        .flat_map(|&s| {
            let v = (f64::from(s).clamp(-1.0, 1.0) * 32_767.0).round() as i16;
            v.to_le_bytes()
        })
        .collect();

    let mut child = Command::new("sh")
        .arg("-c")
        .arg(cmd)
        .env("SPOOFCM_RATE", input.rate().to_string())
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::ExternalCommand {
            cmd: cmd.to_string(),
            reason: format!("spawn failed: {e}"),
        })?;

    // feed stdin from a separate thread so a command that writes before
    // consuming all input cannot deadlock the pipe pair
    let mut stdin = child.stdin.take().expect("stdin was piped");
    let writer = std::thread::spawn(move || {
        let _ = stdin.write_all(&pcm);
        // dropping stdin closes the pipe and signals EOF
    });

    let mut raw = Vec::new();
    child
        .stdout
        .as_mut()
        .expect("stdout was piped")
        .read_to_end(&mut raw)
        .map_err(|e| Error::ExternalCommand {
            cmd: cmd.to_string(),
            reason: format!("read failed: {e}"),
        })?;
    let status = child.wait().map_err(|e| Error::ExternalCommand {
        cmd: cmd.to_string(),
        reason: format!("wait failed: {e}"),
    })?;
    writer.join().expect("stdin writer panicked");

    if !status.success() {
        let mut stderr = String::new();
        if let Some(mut err) = child.stderr.take() {
            let _ = err.read_to_string(&mut stderr);
        }
        return Err(Error::ExternalCommand {
            cmd: cmd.to_string(),
            reason: format!("exit status {status}: {}", stderr.trim()),
        });
    }
    if raw.len() % 2 != 0 {
        return Err(Error::ExternalCommand {
            cmd: cmd.to_string(),
            reason: format!("output has odd byte length {}", raw.len()),
        });
    }
    let samples: Vec<f32> = raw
        .chunks_exact(2)
        .map(|b| f32::from(i16::from_le_bytes([b[0], b[1]])) / 32_768.0)
        .collect();
    Waveform::new(samples, input.rate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::RATE_WIDE;

    fn ramp() -> Waveform {
        let samples: Vec<f32> = (0..2_000).map(|i| (i as f32 / 4_000.0) - 0.25).collect();
        Waveform::new(samples, RATE_WIDE).unwrap()
    }

    #[test]
    fn cat_is_a_transparent_codec() {
        let w = ramp();
        let out = run_external(&w, "cat").unwrap();
        assert_eq!(out.len(), w.len());
        // one trip through PCM16 quantization, so equality within 1 LSB
        for (a, b) in w.samples().iter().zip(out.samples()) {
            assert!((a - b).abs() <= 1.0 / 32_768.0);
        }
    }

    #[test]
    fn rate_is_exported_to_the_command() {
        let w = ramp();
        // command that fails unless the env var matches
        let out = run_external(&w, "test \"$SPOOFCM_RATE\" = 16000 && cat");
        assert!(out.is_ok());
    }

    #[test]
    fn failing_command_reports_stderr() {
        let w = ramp();
        let err = run_external(&w, "echo boom >&2; exit 9").unwrap_err();
        match err {
            Error::ExternalCommand { reason, .. } => assert!(reason.contains("boom")),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn large_input_does_not_deadlock() {
        // 10 s of audio exceeds the kernel pipe buffer in both directions
        let samples = vec![0.1f32; 160_000];
        let w = Waveform::new(samples, RATE_WIDE).unwrap();
        let out = run_external(&w, "cat").unwrap();
        assert_eq!(out.len(), 160_000);
    }
}
