//! CSV and JSON export of sweep results, with exact re-import.
//!
//! Floats are written in Rust's shortest round-trip form, so parsing a file
//! back reproduces every value bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::sweep::{Record, Statistic, SweepResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Config(format!("unknown export format {other:?}"))),
        }
    }
}

/// `results.csv` → `results_<suffix>.csv`.
pub fn companion_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

fn opt(n: Option<usize>) -> String {
    n.map_or_else(String::new, |v| v.to_string())
}

/// Writes the records to `path`. CSV also writes `<stem>_summary.csv`
/// (`G,N,mean,median`) and `<stem>_curves.csv`
/// (`statistic,threshold,G,N_star`, empty when never reached). JSON holds
/// all three in one document.
pub fn export(result: &SweepResult, path: &Path, format: Format) -> Result<Vec<PathBuf>> {
    match format {
        Format::Json => {
            let mut w = BufWriter::new(File::create(path)?);
            serde_json::to_writer_pretty(&mut w, result)?;
            w.flush()?;
            Ok(vec![path.to_path_buf()])
        }
        Format::Csv => {
            let mut w = csv::Writer::from_path(path)?;
            w.write_record(["G", "N", "trial", "fidelity"])?;
            for r in &result.records {
                w.write_record([r.g.to_string(), r.n.to_string(), r.trial.to_string(), r.fidelity.to_string()])?;
            }
            w.flush()?;

            let summary_path = companion_path(path, "summary");
            let mut w = csv::Writer::from_path(&summary_path)?;
            w.write_record(["G", "N", "mean", "median"])?;
            for s in &result.summaries {
                w.write_record([s.g.to_string(), s.n.to_string(), s.mean.to_string(), s.median.to_string()])?;
            }
            w.flush()?;

            let curves_path = companion_path(path, "curves");
            let mut w = csv::Writer::from_path(&curves_path)?;
            w.write_record(["statistic", "threshold", "G", "N_star"])?;
            for c in &result.curves {
                let stat = match c.statistic {
                    Statistic::Mean => "mean",
                    Statistic::Median => "median",
                };
                for &(g, n) in &c.points {
                    w.write_record([stat.to_string(), c.threshold.to_string(), g.to_string(), opt(n)])?;
                }
            }
            w.flush()?;
            Ok(vec![path.to_path_buf(), summary_path, curves_path])
        }
    }
}

/// Reads a records CSV written by [`export`].
pub fn import_records_csv(path: &Path) -> Result<Vec<Record>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["G", "N", "trial", "fidelity"] {
        return Err(Error::parse(1, "expected header G,N,trial,fidelity"));
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Reads a JSON document written by [`export`].
pub fn import_json(path: &Path) -> Result<SweepResult> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}
