//! Stable file formats: fixed-precision CSV and JSON sidecars, written
//! atomically.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use tempfile::NamedTempFile;

use crate::error::CliError;

/// 15 significant digits in scientific notation.
pub fn num(v: f64) -> String {
    format!("{v:.14e}")
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(digest: &str, columns: &[&str]) -> Self {
        let mut text = format!("# config_digest={digest}\n");
        text.push_str(&columns.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for cell in cells {
            if !first {
                self.text.push(',');
            }
            first = false;
            self.text.push_str(cell.as_ref());
        }
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::from(e.error))?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub config_digest: String,
    pub tool_version: &'static str,
    pub subcommand: &'static str,
    pub wall_time_s: f64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(
        digest: &str,
        subcommand: &'static str,
        started: Instant,
        outputs: Vec<PathBuf>,
    ) -> Self {
        Self {
            config_digest: digest.to_string(),
            tool_version: env!("CARGO_PKG_VERSION"),
            subcommand,
            wall_time_s: started.elapsed().as_secs_f64(),
            outputs,
        }
    }
}

/// Sidecar JSON: the manifest plus command-specific fields.
pub fn sidecar(manifest: &RunManifest, extra: Value) -> Result<String, CliError> {
    let mut doc = serde_json::json!({ "manifest": manifest });
    if let (Value::Object(doc), Value::Object(extra)) = (&mut doc, extra) {
        doc.extend(extra);
    }
    let mut text = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::Config(format!("serialize sidecar: {e}")))?;
    text.push('\n');
    Ok(text)
}

pub fn summary_line(label: &str, pairs: &[(&str, String)]) -> String {
    let mut line = label.to_string();
    for (k, v) in pairs {
        let _ = write!(line, " {k}={v}");
    }
    line
}
