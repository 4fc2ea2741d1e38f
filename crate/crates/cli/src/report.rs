//! Flat `key=value` reports.

use std::fmt::Display;
use std::path::Path;

use ionjump_core::format::sig6;

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    /// Report whose first line is the config digest.
    pub fn new(config_digest: &str) -> Self {
        let mut r = Self::default();
        r.text("config_digest", config_digest);
        r
    }

    pub fn num(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.lines.push((key.into(), sig6(value)));
        self
    }

    pub fn text(&mut self, key: impl Into<String>, value: impl Display) -> &mut Self {
        self.lines.push((key.into(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.lines.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.render()).map_err(|e| CliError::io(path, e))
    }
}
