//! File loading, hashing and the failure-log CSV dialect.

use std::path::Path;

use mginf::repair::{LogEvent, Site};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const LOG_HEADER: &str = "timestamp_weeks,site,transported";

/// Short content hash used in report provenance.
pub fn short_hash(content: &str) -> String {
    let digest = Sha256::digest(content.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    hex[..12].to_string()
}

pub fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

pub fn write_output(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|e| CliError::Failure(format!("cannot write {}: {e}", path.display())))
}

/// Parses a failure log: comma-separated, UTF-8, LF, header row
/// `timestamp_weeks,site,transported`, one event per line. Diagnostics carry
/// 1-based line numbers.
pub fn parse_log_csv(content: &str) -> Result<Vec<LogEvent>, CliError> {
    let mut lines = content.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end_matches('\r') == LOG_HEADER => {}
        Some((_, header)) => {
            return Err(CliError::Usage(format!(
                "line 1: expected header `{LOG_HEADER}`, got `{header}`"
            )))
        }
        None => return Err(CliError::Usage("empty log file".into())),
    }
    let mut events = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(CliError::Usage(format!(
                "line {line_no}: expected 3 comma-separated fields, got {}",
                fields.len()
            )));
        }
        let timestamp_weeks: f64 = fields[0].trim().parse().map_err(|_| {
            CliError::Usage(format!(
                "line {line_no}: cannot parse timestamp `{}`",
                fields[0]
            ))
        })?;
        let site = match fields[1].trim() {
            "base" => Site::Base,
            "station" => Site::Station,
            other => {
                return Err(CliError::Usage(format!(
                    "line {line_no}: site must be `base` or `station`, got `{other}`"
                )))
            }
        };
        let transported = match fields[2].trim() {
            "true" | "1" => true,
            "false" | "0" => false,
            other => {
                return Err(CliError::Usage(format!(
                    "line {line_no}: transported must be true/false, got `{other}`"
                )))
            }
        };
        events.push(LogEvent {
            timestamp_weeks,
            site,
            transported,
        });
    }
    Ok(events)
}
