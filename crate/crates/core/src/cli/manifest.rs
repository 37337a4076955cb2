use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::error::{Error, Result};

/// Everything needed to reproduce one output file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub derived: Derived,
    pub outputs: Vec<String>,
    /// Unix seconds, only recorded on request so outputs stay byte-identical.
    pub timestamp: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub delta_min: f64,
    pub delta_max: f64,
    pub lambda_sp_m: f64,
    pub z_dip_m: f64,
    pub fringe_count: f64,
    pub visibility: Option<f64>,
    pub v_cms_m_per_s: f64,
    pub t_f_s: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
}

impl RunManifest {
    pub fn new(command: &str, config: &RunConfig, derived: Derived, stamp: bool) -> Self {
        let timestamp = stamp.then(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config: config.clone(),
            derived,
            outputs: Vec::new(),
            timestamp,
        }
    }
}

/// `foo.csv` -> `foo.<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

pub fn file_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Full-precision float for CSV cells.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a header and rows to `path`, or to stdout when `path` is `None`.
pub fn write_csv(path: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    fn fill<W: std::io::Write>(w: &mut csv::Writer<W>, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush().map_err(|e| Error::io("csv output", e))?;
        Ok(())
    }
    match path {
        Some(p) => {
            let mut w = csv::Writer::from_path(p)?;
            fill(&mut w, header, rows)
        }
        None => {
            let mut w = csv::Writer::from_writer(std::io::stdout().lock());
            fill(&mut w, header, rows)
        }
    }
}
