//! Output files: atomic writes, report files and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::experiments::{ExperimentConfig, ExperimentReport};

/// Environment variable overriding the output directory.
pub const OUT_DIR_ENV: &str = "SEQEMP_OUT_DIR";

/// Writes `bytes` to a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub experiment: String,
    pub outputs: Vec<String>,
    pub duration_secs: f64,
}

impl RunManifest {
    pub fn new(config: &ExperimentConfig, experiment: &str, outputs: Vec<String>, duration_secs: f64) -> Self {
        Self {
            config: config.clone(),
            config_hash: config.hash(),
            seed: config.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            experiment: experiment.to_string(),
            outputs,
            duration_secs,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// Writes `{stem}.json`, `{stem}.csv` and `{stem}_plot.csv`; returns the paths.
pub fn write_report(dir: &Path, report: &ExperimentReport) -> Result<Vec<PathBuf>> {
    let stem = report.stem();
    let files = [
        (format!("{stem}.json"), report.to_json()),
        (format!("{stem}.csv"), report.raw_csv()),
        (format!("{stem}_plot.csv"), report.plot_csv()),
    ];
    let mut out = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        write_atomic(&path, body.as_bytes())?;
        out.push(path);
    }
    Ok(out)
}

/// Writes `{stem}.manifest.json` next to the report files.
pub fn write_manifest(dir: &Path, stem: &str, manifest: &RunManifest) -> Result<PathBuf> {
    let path = dir.join(format!("{stem}.manifest.json"));
    write_atomic(&path, manifest.to_json().as_bytes())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("seqemp-io-{}", std::process::id()));
        let path = dir.join("a.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two");
        let leftovers = fs::read_dir(&dir).unwrap().count();
        assert_eq!(leftovers, 1);
        fs::remove_dir_all(&dir).unwrap();
    }
}
