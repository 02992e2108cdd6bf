//! CSV tables with a one-line `# key=value;...` provenance header.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;

/// Ordered `key=value` pairs written as the first line of every CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata(Vec<(String, String)>);

impl Metadata {
    pub fn new() -> Self {
        Self::default().with("version", crate::VERSION)
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.set(key, value);
        self
    }

    /// Inserts or replaces `key`, keeping first-insertion order.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = sanitize(&value.to_string());
        match self.0.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.0.push((sanitize(key), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn line(&self) -> String {
        let body: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("# {}", body.join(";"))
    }

    /// Parses a line produced by [`Metadata::line`].
    pub fn parse(line: &str) -> Option<Self> {
        let body = line.strip_prefix('#')?.trim();
        let mut out = Self::default();
        for pair in body.split(';').filter(|p| !p.is_empty()) {
            let (k, v) = pair.split_once('=')?;
            out.0.push((k.to_string(), v.to_string()));
        }
        Some(out)
    }
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| match c {
            ';' | '=' | '\n' | '\r' | ',' => '_',
            c => c,
        })
        .collect()
}

/// Scientific notation with 17 significant digits, enough to round-trip any
/// `f64`.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub metadata: Metadata,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new<S: AsRef<str>>(metadata: Metadata, header: &[S]) -> Self {
        Self {
            metadata,
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.metadata.line());
        out.push('\n');
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_number(v)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir)?;
            }
        }
        fs::write(path, self.render())?;
        Ok(())
    }
}
