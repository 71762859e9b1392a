use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::driver::RunReport;
use super::sim::GroundTruth;
use crate::error::Error;
use crate::model::Observation;

pub const TRUTH_FILE: &str = "truth.json";
pub const OBSERVATIONS_FILE: &str = "observations.jsonl";
pub const SCANS_FILE: &str = "scans.jsonl";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Filter(#[from] Error),
}

impl HarnessError {
    /// Process exit code: 2 for configuration problems, 3 for a degenerate
    /// update, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Filter(Error::Config(_) | Error::Dimension { .. }) => 2,
            Self::Filter(Error::DegenerateUpdate) => 3,
            _ => 1,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ScanLine {
    scan: u32,
    observations: Vec<Observation>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn json_err(path: &Path) -> impl FnOnce(serde_json::Error) -> HarnessError + '_ {
    move |source| HarnessError::Json {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_config(path: &Path) -> Result<ScenarioConfig, HarnessError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(ScenarioConfig::from_json(&text)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value).map_err(json_err(path))?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

fn write_lines<T: Serialize>(
    path: &Path,
    rows: impl Iterator<Item = T>,
) -> Result<(), HarnessError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    for row in rows {
        serde_json::to_writer(&mut w, &row).map_err(json_err(path))?;
        w.write_all(b"\n").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn ensure_dir(dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

pub fn write_truth(dir: &Path, truth: &GroundTruth) -> Result<(), HarnessError> {
    ensure_dir(dir)?;
    write_json(&dir.join(TRUTH_FILE), truth)
}

pub fn read_truth(dir: &Path) -> Result<GroundTruth, HarnessError> {
    let path = dir.join(TRUTH_FILE);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text).map_err(json_err(&path))
}

pub fn write_observations(dir: &Path, scans: &[Vec<Observation>]) -> Result<(), HarnessError> {
    ensure_dir(dir)?;
    let rows = scans.iter().enumerate().map(|(t, z)| ScanLine {
        scan: t as u32,
        observations: z.clone(),
    });
    write_lines(&dir.join(OBSERVATIONS_FILE), rows)
}

/// Reads the scans written by [`write_observations`]; scans must appear in
/// order starting from zero.
pub fn read_observations(dir: &Path) -> Result<Vec<Vec<Observation>>, HarnessError> {
    let path = dir.join(OBSERVATIONS_FILE);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let mut scans = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let row: ScanLine = serde_json::from_str(line).map_err(json_err(&path))?;
        if row.scan as usize != scans.len() {
            return Err(Error::Contract(format!(
                "scan {} out of order in {}",
                row.scan,
                path.display()
            ))
            .into());
        }
        scans.push(row.observations);
    }
    Ok(scans)
}

/// Writes one line per scan to `scans.jsonl` and the whole report to
/// `report.json`.
pub fn write_run(dir: &Path, report: &RunReport) -> Result<(), HarnessError> {
    ensure_dir(dir)?;
    write_lines(&dir.join(SCANS_FILE), report.scans.iter())?;
    write_json(&dir.join(REPORT_FILE), report)
}

pub fn read_report(dir: &Path) -> Result<RunReport, HarnessError> {
    let path = dir.join(REPORT_FILE);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text).map_err(json_err(&path))
}
