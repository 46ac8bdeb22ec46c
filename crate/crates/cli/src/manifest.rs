//! Sidecar manifest written next to every output file.
//!
//! The manifest is itself a config file: `run.*` keys describe the run and
//! the remaining keys are the fully resolved settings, so the snapshot can
//! be fed back with `--config`.

use std::fmt::Write as _;

use chrono::{DateTime, SecondsFormat, Utc};

use crate::config::{parse_pairs, Settings};
use crate::error::CliError;

/// Fixes the manifest timestamp (seconds since the epoch) for reproducible output.
pub const SOURCE_DATE_EPOCH: &str = "SOURCE_DATE_EPOCH";

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub timestamp: String,
    pub inputs: Vec<String>,
    pub output: String,
    pub settings: Settings,
}

/// RFC 3339 UTC time from `SOURCE_DATE_EPOCH` if set, else the current time.
pub fn timestamp() -> Result<String, CliError> {
    let time: DateTime<Utc> = match std::env::var(SOURCE_DATE_EPOCH) {
        Ok(s) => {
            let secs: i64 = s
                .trim()
                .parse()
                .map_err(|_| CliError::Input(format!("{SOURCE_DATE_EPOCH} must be an integer, got '{s}'")))?;
            DateTime::from_timestamp(secs, 0)
                .ok_or_else(|| CliError::Input(format!("{SOURCE_DATE_EPOCH} out of range: {secs}")))?
        }
        Err(_) => Utc::now(),
    };
    Ok(time.to_rfc3339_opts(SecondsFormat::Secs, true))
}

impl RunManifest {
    pub fn new(command: &str, inputs: Vec<String>, output: &str, settings: &Settings) -> Result<Self, CliError> {
        Ok(RunManifest {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: timestamp()?,
            inputs,
            output: output.to_string(),
            settings: settings.clone(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "run.command = {}", self.command);
        let _ = writeln!(s, "run.tool_version = {}", self.tool_version);
        let _ = writeln!(s, "run.timestamp = {}", self.timestamp);
        let inputs = if self.inputs.is_empty() {
            "-".to_string()
        } else {
            self.inputs.join(" ; ")
        };
        let _ = writeln!(s, "run.inputs = {inputs}");
        let _ = writeln!(s, "run.output = {}", self.output);
        s.push_str(&self.settings.to_text());
        s
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut pairs = parse_pairs(text)?;
        let mut take = |key: &str| {
            pairs
                .remove(key)
                .map(|(_, v)| v)
                .ok_or_else(|| CliError::Input(format!("manifest is missing '{key}'")))
        };
        let command = take("run.command")?;
        let tool_version = take("run.tool_version")?;
        let timestamp = take("run.timestamp")?;
        let inputs = match take("run.inputs")?.as_str() {
            "-" => Vec::new(),
            list => list.split(" ; ").map(str::to_string).collect(),
        };
        let output = take("run.output")?;
        Ok(RunManifest {
            command,
            tool_version,
            timestamp,
            inputs,
            output,
            settings: Settings::from_pairs(pairs)?,
        })
    }
}

/// Path of the manifest for an output file.
pub fn sidecar_path(output: &std::path::Path) -> std::path::PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest");
    name.into()
}
