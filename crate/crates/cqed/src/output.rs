//! Text artifacts: fixed-format CSV, pretty JSON, and the staged file set
//! that is written in one go at the end of a run.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::manifest::FileEntry;

/// 17 significant digits, exponent notation, locale independent.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv<I>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt_f64).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Files collected in memory and flushed in insertion order.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, String)>,
}

impl Artifacts {
    pub fn add(&mut self, name: &str, content: String) {
        self.files.push((name.to_string(), content));
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) {
        self.add(name, json(value));
    }

    pub fn entries(&self) -> Vec<FileEntry> {
        self.files
            .iter()
            .map(|(name, content)| FileEntry {
                name: name.clone(),
                bytes: content.len() as u64,
                sha256: sha256_hex(content.as_bytes()),
            })
            .collect()
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_path_buf(), source })?;
        for (name, content) in &self.files {
            let path = dir.join(name);
            fs::write(&path, content).map_err(|source| CliError::Write { path, source })?;
        }
        Ok(())
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.to_path_buf(), source })
}

/// Numeric CSV with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        let bad = |line: usize, message: String| CliError::Parse { path: path.display().to_string(), line, message };
        let mut lines = text.lines().enumerate();
        let header: Vec<String> = match lines.next() {
            Some((_, h)) => h.split(',').map(|c| c.trim().to_string()).collect(),
            None => return Err(bad(1, "empty file".into())),
        };
        let mut rows = Vec::new();
        for (n, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|c| c.trim().parse::<f64>().map_err(|_| bad(n + 1, format!("`{}` is not a number", c.trim()))))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != header.len() {
                return Err(bad(n + 1, format!("expected {} columns, found {}", header.len(), row.len())));
            }
            rows.push(row);
        }
        Ok(Table { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// `MIN:MAX:N`.
pub fn parse_range(text: &str, what: &str) -> Result<(f64, f64, usize)> {
    let bad = || CliError::Config(format!("{what}: expected MIN:MAX:N, got `{text}`"));
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, n] = parts[..] else { return Err(bad()) };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi && n >= 2) {
        return Err(CliError::Config(format!("{what}: need finite MIN < MAX and N >= 2, got `{text}`")));
    }
    Ok((lo, hi, n))
}

pub fn out_dir(out: Option<&PathBuf>, command: &str) -> Result<PathBuf> {
    out.cloned().ok_or_else(|| CliError::Config(format!("{command}: --out DIR is required")))
}
