use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Summary, TrialResult};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 9] = [
    "trial_index",
    "traced_count",
    "out_sample_decision",
    "q_k_num",
    "q_k_den",
    "count_above",
    "release_error",
    "inner_min",
    "inner_mean",
];

pub fn csv_header() -> String {
    CSV_HEADER.join(",")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidParameter(format!("unknown report format {other:?}"))),
        }
    }
}

/// The JSON report: summary and every trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub summary: Summary,
    pub results: Vec<TrialResult>,
}

impl Report {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_reader(std::io::BufReader::new(file)).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Where the CSV format puts its summary: `results.csv` ->
/// `results.summary.json`.
pub fn summary_path(path: &Path) -> PathBuf {
    path.with_extension("summary.json")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_record(r: &TrialResult) -> [String; 9] {
    [
        r.trial_index.to_string(),
        opt(r.traced_count),
        opt(r.out_sample_decision),
        opt(r.q_k.map(|q| q.num)),
        opt(r.q_k.map(|q| q.den)),
        opt(r.count_above),
        opt(r.release_error),
        opt(r.inner_min),
        opt(r.inner_mean),
    ]
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Writes the per-trial table. CSV goes to `path` (one header line, one row
/// per trial) with the summary in [`summary_path`]; JSON writes a
/// [`Report`] to `path`.
pub fn write_report(summary: &Summary, results: &[TrialResult], path: &Path, format: ReportFormat) -> Result<()> {
    if results.is_empty() {
        return Err(Error::InvalidParameter(
            "refusing to write a report with no trials".into(),
        ));
    }
    match format {
        ReportFormat::Csv => {
            let csv_err = |source| Error::Csv {
                path: path.to_path_buf(),
                source,
            };
            let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
            w.write_record(CSV_HEADER).map_err(csv_err)?;
            for r in results {
                w.write_record(csv_record(r)).map_err(csv_err)?;
            }
            w.flush().map_err(|e| Error::io(path, e))?;
            write_json(summary, &summary_path(path))
        }
        ReportFormat::Json => write_json(
            &Report {
                summary: summary.clone(),
                results: results.to_vec(),
            },
            path,
        ),
    }
}
