//! Output directory handling, CSV/JSON emission and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Environment variable naming the output directory.
pub const OUTPUT_DIR_ENV: &str = "FOWLER_OUTPUT_DIR";

const DEFAULT_OUTPUT_DIR: &str = "fowler-output";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Path relative to the output directory.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsProvenance {
    pub name: String,
    pub a: f64,
    pub b: f64,
    /// Oracle residual of every candidate that was considered.
    pub residuals: Vec<(String, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub compute_seconds: f64,
    pub write_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub arguments: Vec<String>,
    /// `ok` or `numerical-failure`.
    pub status: String,
    /// Fully resolved configuration; accepted back by `--config`.
    pub config: Value,
    pub constants: ConstantsProvenance,
    pub timings: Timings,
    pub outputs: Vec<OutputFile>,
    pub results: Value,
}

/// Resolve the output directory: flag, then environment, then `./fowler-output`.
pub fn output_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Header row plus one line per row, every value with 17 significant digits.
pub fn csv_string<H: AsRef<str>, R: AsRef<[f64]>>(header: &[H], rows: impl IntoIterator<Item = R>) -> String {
    let mut out = header.iter().map(|h| h.as_ref()).collect::<Vec<_>>().join(",");
    out.push('\n');
    for row in rows {
        for (i, v) in row.as_ref().iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v:.16e}");
        }
        out.push('\n');
    }
    out
}

/// Files written so far in one run.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<OutputFile>,
}

impl Outputs {
    pub fn create(dir: PathBuf) -> Result<Self, CliError> {
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(Outputs { dir, files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.files.push(OutputFile {
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn csv<H: AsRef<str>, R: AsRef<[f64]>>(
        &mut self,
        name: &str,
        header: &[H],
        rows: impl IntoIterator<Item = R>,
    ) -> Result<(), CliError> {
        self.write(name, csv_string(header, rows).as_bytes())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::numerical(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Snapshot file `{stem}_{index:04}.csv` with columns `x, u`.
    pub fn snapshot(&mut self, stem: &str, index: usize, xs: &[f64], u: &[f64]) -> Result<String, CliError> {
        let name = format!("{stem}_{index:04}.csv");
        self.csv(&name, &["x", "u"], xs.iter().zip(u).map(|(&x, &v)| [x, v]))?;
        Ok(name)
    }

    pub fn into_files(self) -> Vec<OutputFile> {
        self.files
    }
}

/// Write `{stem}.manifest.json` next to the outputs it lists.
pub fn write_manifest(dir: &Path, stem: &str, manifest: &RunManifest) -> Result<PathBuf, CliError> {
    let path = dir.join(format!("{stem}.manifest.json"));
    let mut text = serde_json::to_string_pretty(manifest).map_err(|e| CliError::numerical(e.to_string()))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_doubles() {
        let vals = [0.1, -1.0 / 3.0, f64::MIN_POSITIVE, 1e300, 0.0];
        let text = csv_string(&["v"], vals.iter().map(|v| [*v]));
        let parsed: Vec<f64> = text.lines().skip(1).map(|l| l.parse().unwrap()).collect();
        assert_eq!(parsed, vals);
        assert!(text.starts_with("v\n1.0000000000000001e-1\n"));
    }

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
