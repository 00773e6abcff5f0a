//! Codec simulation configuration and its string grammar.
//!
//! A configuration is written as `kind[:param=value,...]`, e.g.
//! `g726:bitrate=16000,loss=0.1,band=narrow` or `g711:law=mu`. The format
//! round-trips through [`CodecConfig::parse`] / `Display`.

use std::fmt;

use crate::error::{Error, Result};

pub const G726_BITRATES: [u32; 4] = [16_000, 24_000, 32_000, 40_000];
pub const CVSD_BITRATES: [u32; 3] = [16_000, 32_000, 64_000];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodecKind {
    G711,
    G726,
    Cvsd,
    External,
    Passthrough,
}

impl CodecKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CodecKind::G711 => "g711",
            CodecKind::G726 => "g726",
            CodecKind::Cvsd => "cvsd",
            CodecKind::External => "external",
            CodecKind::Passthrough => "passthrough",
        }
    }

    /// Usage category, mirroring how telephony codecs are grouped by
    /// deployment (landline / satellite / ...).
    pub fn category(self) -> &'static str {
        match self {
            CodecKind::G711 | CodecKind::G726 => "landline",
            CodecKind::Cvsd => "satellite",
            CodecKind::External => "external",
            CodecKind::Passthrough => "clean",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompandingLaw {
    Mu,
    A,
}

impl CompandingLaw {
    pub fn as_str(self) -> &'static str {
        match self {
            CompandingLaw::Mu => "mu",
            CompandingLaw::A => "a",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Band {
    Narrow,
    Wide,
}

impl Band {
    pub fn as_str(self) -> &'static str {
        match self {
            Band::Narrow => "narrow",
            Band::Wide => "wide",
        }
    }
}

/// One codec simulation: a kernel plus the composable degradation stages
/// (packet loss, DTX, bandwidth) applied around it.
#[derive(Debug, Clone, PartialEq)]
pub struct CodecConfig {
    pub kind: CodecKind,
    pub bitrate_bps: Option<u32>,
    pub law: Option<CompandingLaw>,
    pub loss_rate: f64,
    pub dtx: bool,
    pub band: Band,
    pub external_cmd: Option<String>,
}

impl CodecConfig {
    pub fn passthrough() -> Self {
        CodecConfig {
            kind: CodecKind::Passthrough,
            bitrate_bps: None,
            law: None,
            loss_rate: 0.0,
            dtx: false,
            band: Band::Wide,
            external_cmd: None,
        }
    }

    pub fn g711(law: CompandingLaw) -> Self {
        CodecConfig {
            kind: CodecKind::G711,
            law: Some(law),
            band: Band::Narrow,
            ..CodecConfig::passthrough()
        }
    }

    pub fn g726(bitrate_bps: u32) -> Self {
        CodecConfig {
            kind: CodecKind::G726,
            bitrate_bps: Some(bitrate_bps),
            band: Band::Narrow,
            ..CodecConfig::passthrough()
        }
    }

    pub fn cvsd(bitrate_bps: u32) -> Self {
        CodecConfig {
            kind: CodecKind::Cvsd,
            bitrate_bps: Some(bitrate_bps),
            ..CodecConfig::passthrough()
        }
    }

    pub fn external(cmd: impl Into<String>) -> Self {
        CodecConfig {
            kind: CodecKind::External,
            external_cmd: Some(cmd.into()),
            ..CodecConfig::passthrough()
        }
    }

    pub fn with_loss(mut self, loss_rate: f64) -> Self {
        self.loss_rate = loss_rate;
        self
    }

    pub fn with_dtx(mut self, dtx: bool) -> Self {
        self.dtx = dtx;
        self
    }

    pub fn with_band(mut self, band: Band) -> Self {
        self.band = band;
        self
    }

    fn invalid(&self, reason: impl Into<String>) -> Error {
        Error::InvalidCodecConfig {
            config: self.to_string(),
            reason: reason.into(),
        }
    }

    /// Checks the cross-field invariants.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.loss_rate) {
            return Err(self.invalid(format!("loss_rate {} outside [0, 1]", self.loss_rate)));
        }
        if self.law.is_some() && self.kind != CodecKind::G711 {
            return Err(self.invalid("law is only valid for g711"));
        }
        if self.external_cmd.is_some() && self.kind != CodecKind::External {
            return Err(self.invalid("cmd is only valid for external"));
        }
        match self.kind {
            CodecKind::G711 => {
                if self.bitrate_bps.is_some() {
                    return Err(self.invalid("g711 takes no bitrate"));
                }
                if self.band != Band::Narrow {
                    return Err(self.invalid("g711 is a narrowband codec"));
                }
            }
            CodecKind::G726 => {
                let b = self
                    .bitrate_bps
                    .ok_or_else(|| self.invalid("g726 requires a bitrate"))?;
                if !G726_BITRATES.contains(&b) {
                    return Err(Error::UnsupportedBitrate {
                        codec: "g726",
                        bitrate: b,
                    });
                }
                if self.band != Band::Narrow {
                    return Err(self.invalid("g726 is a narrowband codec"));
                }
            }
            CodecKind::Cvsd => {
                let b = self
                    .bitrate_bps
                    .ok_or_else(|| self.invalid("cvsd requires a bitrate"))?;
                if !CVSD_BITRATES.contains(&b) {
                    return Err(Error::UnsupportedBitrate {
                        codec: "cvsd",
                        bitrate: b,
                    });
                }
            }
            CodecKind::External => {
                if self.external_cmd.is_none() {
                    return Err(self.invalid("external requires cmd="));
                }
                if self.bitrate_bps.is_some() {
                    return Err(self.invalid("external takes no bitrate"));
                }
            }
            CodecKind::Passthrough => {
                if self.bitrate_bps.is_some() {
                    return Err(self.invalid("passthrough takes no bitrate"));
                }
            }
        }
        Ok(())
    }

    /// Parses `kind[:param=value,...]`. For `external`, everything after
    /// `cmd=` (including commas) belongs to the command.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = |reason: &str| Error::InvalidCodecConfig {
            config: text.to_string(),
            reason: reason.to_string(),
        };
        let (kind_tok, params) = match text.split_once(':') {
            Some((k, p)) => (k, p),
            None => (text, ""),
        };
        let kind = match kind_tok {
            "g711" => CodecKind::G711,
            "g726" => CodecKind::G726,
            "cvsd" => CodecKind::Cvsd,
            "external" => CodecKind::External,
            "passthrough" => CodecKind::Passthrough,
            other => {
                return Err(Error::InvalidCodecConfig {
                    config: text.to_string(),
                    reason: format!("unknown codec kind `{other}`"),
                })
            }
        };
        let mut cfg = CodecConfig {
            kind,
            bitrate_bps: None,
            law: None,
            loss_rate: 0.0,
            dtx: false,
            band: match kind {
                CodecKind::G711 | CodecKind::G726 => Band::Narrow,
                _ => Band::Wide,
            },
            external_cmd: None,
        };
        let mut rest = params;
        while !rest.is_empty() {
            let (key, after_key) = rest
                .split_once('=')
                .ok_or_else(|| bad(&format!("expected key=value in `{rest}`")))?;
            let key = key.trim();
            let (value, next): (&str, &str) = if key == "cmd" {
                // the command consumes the remainder verbatim
                (after_key, "")
            } else {
                match after_key.split_once(',') {
                    Some((v, n)) => (v, n),
                    None => (after_key, ""),
                }
            };
            let value = if key == "cmd" { value } else { value.trim() };
            match key {
                "law" => {
                    cfg.law = Some(match value {
                        "mu" => CompandingLaw::Mu,
                        "a" => CompandingLaw::A,
                        _ => return Err(bad(&format!("unknown law `{value}`"))),
                    })
                }
                "bitrate" => {
                    cfg.bitrate_bps = Some(
                        value
                            .parse()
                            .map_err(|_| bad(&format!("bad bitrate `{value}`")))?,
                    )
                }
                "loss" => {
                    cfg.loss_rate = value
                        .parse()
                        .map_err(|_| bad(&format!("bad loss `{value}`")))?
                }
                "dtx" => {
                    cfg.dtx = match value {
                        "true" => true,
                        "false" => false,
                        _ => return Err(bad(&format!("bad dtx `{value}`"))),
                    }
                }
                "band" => {
                    cfg.band = match value {
                        "narrow" => Band::Narrow,
                        "wide" => Band::Wide,
                        _ => return Err(bad(&format!("unknown band `{value}`"))),
                    }
                }
                "cmd" => cfg.external_cmd = Some(value.to_string()),
                _ => return Err(bad(&format!("unknown parameter `{key}`"))),
            }
            rest = next;
        }
        if kind == CodecKind::G711 && cfg.law.is_none() {
            cfg.law = Some(CompandingLaw::Mu);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for CodecConfig {
    /// Canonical form: parameters in a fixed order, defaults omitted
    /// (except `law` and `bitrate`, which are always explicit).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.as_str())?;
        let mut parts: Vec<String> = Vec::new();
        if let Some(law) = self.law {
            parts.push(format!("law={}", law.as_str()));
        }
        if let Some(b) = self.bitrate_bps {
            parts.push(format!("bitrate={b}"));
        }
        if self.loss_rate > 0.0 {
            parts.push(format!("loss={}", self.loss_rate));
        }
        if self.dtx {
            parts.push("dtx=true".to_string());
        }
        let default_band = match self.kind {
            CodecKind::G711 | CodecKind::G726 => Band::Narrow,
            _ => Band::Wide,
        };
        if self.band != default_band {
            parts.push(format!("band={}", self.band.as_str()));
        }
        if let Some(cmd) = &self.external_cmd {
            parts.push(format!("cmd={cmd}"));
        }
        if !parts.is_empty() {
            write!(f, ":{}", parts.join(","))?;
        }
        Ok(())
    }
}
