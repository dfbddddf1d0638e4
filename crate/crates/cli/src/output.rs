use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::{Command, RunConfig};

/// Who produced a file and from which configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub seed: u64,
    pub config_sha256: String,
}

impl Provenance {
    pub fn of(cfg: &RunConfig) -> Self {
        Self {
            tool: "lrdspde".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: cfg.command,
            seed: cfg.seed,
            config_sha256: cfg.hash(),
        }
    }
}

/// Envelope of every JSON artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub provenance: Provenance,
    pub result: T,
}

pub fn json<T: Serialize>(cfg: &RunConfig, result: T) -> Result<Vec<u8>> {
    let doc = Document { provenance: Provenance::of(cfg), result };
    let mut out = serde_json::to_vec_pretty(&doc)?;
    out.push(b'\n');
    Ok(out)
}

/// Full-precision, locale-independent rendering: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Table {
    pub columns: Vec<&'static str>,
    pub notes: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), notes: vec![], rows: vec![] }
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.rows.push(row.iter().copied().map(num).collect());
    }

    pub fn render(&self, cfg: &RunConfig) -> Vec<u8> {
        let p = Provenance::of(cfg);
        let mut s = format!(
            "# {} {}\n# command: {}\n# seed: {}\n# config_sha256: {}\n",
            p.tool,
            p.version,
            serde_json::to_value(p.command).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            p.seed,
            p.config_sha256
        );
        for n in &self.notes {
            s.push_str("# ");
            s.push_str(n);
            s.push('\n');
        }
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s.into_bytes()
    }

    /// Rows as JSON objects keyed by column name.
    pub fn records(&self) -> Vec<serde_json::Map<String, serde_json::Value>> {
        self.rows
            .iter()
            .map(|r| {
                self.columns
                    .iter()
                    .zip(r)
                    .map(|(c, v)| {
                        let value = v.parse::<f64>().map(serde_json::Value::from).unwrap_or_else(|_| v.clone().into());
                        (c.to_string(), value)
                    })
                    .collect()
            })
            .collect()
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so readers never see a partial file. `-` means standard output.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if path.as_os_str() == "-" {
        std::io::stdout().write_all(bytes)?;
        return Ok(());
    }
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write to {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}
