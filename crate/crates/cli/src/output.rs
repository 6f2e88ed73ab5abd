//! Report files: CSV tables and `key = value` summaries, written atomically.
//!
//! Reals are printed as `{:.16e}` (17 significant digits), booleans as
//! `true`/`false`, missing values as `nan`. Lines end with LF.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn opt_real(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), real)
}

/// Column-typed CSV table with a header row.
#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Ordered `key = value` lines.
#[derive(Debug, Clone, Default)]
pub struct Summary {
    entries: Vec<(String, String)>,
}

impl Summary {
    pub fn new(command: &str) -> Self {
        let mut s = Self::default();
        s.text("command", command);
        s
    }

    pub fn text(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn real(&mut self, key: &str, value: f64) -> &mut Self {
        self.text(key, real(value))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

/// Output directory; every file is written to a temporary sibling and
/// renamed into place.
#[derive(Debug, Clone)]
pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root)
            .with_context(|| format!("cannot create output directory {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let target = self.path(name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.root)
            .with_context(|| format!("cannot create a file in {}", self.root.display()))?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(&target)
            .with_context(|| format!("cannot write {}", target.display()))?;
        Ok(target)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<PathBuf> {
        self.write(name, text.as_bytes())
    }
}
