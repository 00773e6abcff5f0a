//! Error plumbing that preserves the exit-code contract: configuration
//! and validation problems exit 2, runtime data problems exit 3.

use std::process::ExitCode;

#[derive(Debug)]
pub enum Failure {
    /// Bad or inconsistent configuration, missing input paths, unknown
    /// strategy names — anything detectable before real work starts.
    Config(anyhow::Error),
    /// Errors from the data itself: unreadable audio, mismatched score
    /// sets, diverging training.
    Data(anyhow::Error),
}

pub type CmdResult<T = ()> = Result<T, Failure>;

impl Failure {
    pub fn config(msg: impl Into<String>) -> Self {
        Failure::Config(anyhow::anyhow!(msg.into()))
    }

    pub fn report(self) -> ExitCode {
        match self {
            Failure::Config(e) => {
                eprintln!("configuration error: {e:#}");
                ExitCode::from(2)
            }
            Failure::Data(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(3)
            }
        }
    }
}

/// Tags a fallible step as configuration-phase or data-phase.
pub trait FailExt<T> {
    fn or_config(self) -> CmdResult<T>;
    fn or_data(self) -> CmdResult<T>;
}

impl<T, E: Into<anyhow::Error>> FailExt<T> for Result<T, E> {
    fn or_config(self) -> CmdResult<T> {
        self.map_err(|e| Failure::Config(e.into()))
    }

    fn or_data(self) -> CmdResult<T> {
        self.map_err(|e| Failure::Data(e.into()))
    }
}
