// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

use serde::Serialize;
use thiserror::Error;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
/// Acceptance run completed but at least one criterion failed.
pub const EXIT_CRITERIA: u8 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: adiabat::Error,
    },
}

impl CliError {
    pub fn numerical(context: impl Into<String>, source: adiabat::Error) -> Self {
        Self::Numerical {
            context: context.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Io { .. } => EXIT_CONFIG,
            Self::Numerical { .. } => EXIT_NUMERICAL,
        }
    }

    /// Short machine-readable tag: `config`, `io`, or the numerical error variant.
    pub fn kind(&self) -> String {
        match self {
            Self::Config(_) => "config".into(),
            Self::Io { .. } => "io".into(),
            Self::Numerical { source, .. } => error_kind(source),
        }
    }

    /// One-line JSON for standard error.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            kind: String,
            exit_code: u8,
            message: &'a str,
        }
        #[derive(Serialize)]
        struct Wrapper<'a> {
            error: Body<'a>,
        }
        let message = self.to_string();
        serde_json::to_string(&Wrapper {
            error: Body {
                kind: self.kind(),
                exit_code: self.exit_code(),
                message: &message,
            },
        })
        .expect("plain strings serialize")
    }
}

/// Snake-case variant name of a library error.
pub fn error_kind(e: &adiabat::Error) -> String {
    let debug = format!("{e:?}");
    let name = debug.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error");
    let mut out = String::new();
    for (i, ch) in name.chars().enumerate() {
        if ch.is_uppercase() {
            if i > 0 {
                out.push('_');
            }
            out.extend(ch.to_lowercase());
        } else {
            out.push(ch);
        }
    }
    out
}

pub type CliResult<T> = Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_and_codes() {
        let e = CliError::numerical(
            "scan",
            adiabat::Error::GapClosed { level: 2, t: 0.5 },
        );
        assert_eq!(e.kind(), "gap_closed");
        assert_eq!(e.exit_code(), 3);
        let v: serde_json::Value = serde_json::from_str(&e.to_json()).unwrap();
        assert_eq!(v["error"]["exit_code"], 3);
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(error_kind(&adiabat::Error::InvalidArgument("a".into())), "invalid_argument");
    }
}
