//! Report, CSV, and metadata files.

use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::commands::Table;

/// Run facts that legitimately vary between runs, kept out of the report.
#[derive(Serialize)]
pub struct Metadata<'a> {
    pub subcommand: &'a str,
    pub scenario_file: String,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub elapsed_ms: u128,
    pub workers: usize,
    pub cache_dir: Option<String>,
    pub warnings: Vec<String>,
}

pub fn unix_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

/// Writes `report.json`, one CSV per table, and `metadata.json`. Returns the
/// report path.
pub fn write_all(dir: &Path, report: &str, tables: &[Table], metadata: &Metadata<'_>) -> io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let report_path = dir.join("report.json");
    std::fs::write(&report_path, report)?;
    for t in tables {
        let mut w = csv::Writer::from_path(dir.join(format!("{}.csv", t.name)))?;
        w.write_record(&t.header)?;
        for row in &t.rows {
            w.write_record(row)?;
        }
        w.flush()?;
    }
    let mut meta = serde_json::to_string_pretty(metadata).map_err(io::Error::other)?;
    meta.push('\n');
    std::fs::write(dir.join("metadata.json"), meta)?;
    Ok(report_path)
}
