//! Artifact writers. Every text artifact carries the configuration that
//! produced it: CSV files in a leading block of `# ` lines, JSON files in a
//! `config` string.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::cache::write_atomic;
use crate::error::CliError;

/// Floats in shortest round-trip scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

/// Incrementally built CSV file.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(config: &str, columns: &[&str]) -> Self {
        let mut text = String::new();
        for line in config.lines() {
            let _ = writeln!(text, "# {line}");
        }
        text.push_str(&columns.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> Result<PathBuf, CliError> {
        write_atomic(path, self.text.as_bytes())?;
        Ok(path.to_path_buf())
    }
}

/// The configuration block of a CSV artifact.
pub fn embedded_config_csv(text: &str) -> String {
    let mut out = String::new();
    for line in text.lines() {
        match line.strip_prefix("# ") {
            Some(rest) => {
                out.push_str(rest);
                out.push('\n');
            }
            None if line == "#" => out.push('\n'),
            None => break,
        }
    }
    out
}

/// The `config` string of a JSON artifact.
pub fn embedded_config_json(text: &str) -> Option<String> {
    let value: serde_json::Value = serde_json::from_str(text).ok()?;
    value.get("config")?.as_str().map(str::to_owned)
}

/// Reads the configuration embedded in an artifact of either kind.
pub fn embedded_config(path: &Path) -> Result<String, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    if text.trim_start().starts_with('{') {
        embedded_config_json(&text).ok_or_else(|| CliError::Usage(format!("{} has no config field", path.display())))
    } else {
        Ok(embedded_config_csv(&text))
    }
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    write_atomic(path, text.as_bytes())?;
    Ok(path.to_path_buf())
}

pub fn f64_le_bytes(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_config_block_round_trips() {
        let config = "[system]\nalpha = 1.3e0\n\n[meanfield]\nrtol = 1e-13\n";
        let mut csv = Csv::new(config, &["a", "b"]);
        csv.row(&[fmt_f64(0.5), fmt_f64(-2.0)]);
        assert_eq!(embedded_config_csv(csv.as_str()), config);
        assert!(csv.as_str().ends_with("a,b\n5e-1,-2e0\n"));
    }
}
