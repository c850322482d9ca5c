use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path as FsPath;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::RunTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidInput(format!(
                "unknown format {other:?}; expected csv or json"
            ))),
        }
    }
}

/// Summary of one solver run. Field order is the CSV column order.
/// `k` and `epsilon` are empty for algorithms that ignore them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub map: String,
    pub scenario: String,
    pub algorithm: String,
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub epsilon: Option<f64>,
    pub seed: u64,
    pub budget_s: f64,
    pub initial_cost: usize,
    pub final_cost: usize,
    pub auc: f64,
    pub iterations: u64,
    pub success_rate: f64,
}

impl RunRecord {
    pub const COLUMNS: [&'static str; 14] = [
        "map",
        "scenario",
        "algorithm",
        "m",
        "N",
        "K",
        "epsilon",
        "seed",
        "budget_s",
        "initial_cost",
        "final_cost",
        "auc",
        "iterations",
        "success_rate",
    ];
}

fn create(path: &FsPath) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// RFC 4180 writer: CRLF records, header written by the caller.
pub(crate) fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::CRLF)
        .from_writer(out)
}

fn csv_error(path: &FsPath, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::format(path, format!("{other:?}")),
    }
}

/// Writes run summaries as CSV (header always present) or as a JSON array.
pub fn write_results(runs: &[RunRecord], format: OutputFormat, path: impl AsRef<FsPath>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    match format {
        OutputFormat::Csv => {
            let mut w = csv_writer(&mut out);
            w.write_record(RunRecord::COLUMNS).map_err(|e| csv_error(path, e))?;
            for r in runs {
                w.serialize(r).map_err(|e| csv_error(path, e))?;
            }
            w.flush().map_err(|e| Error::io(path, e))?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, runs).map_err(|e| Error::format(path, e))?;
            out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Reads a JSON array written by [`write_results`].
pub fn read_results_json(path: impl AsRef<FsPath>) -> Result<Vec<RunRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(std::io::BufReader::new(file)).map_err(|e| Error::format(path, e))
}

/// Writes `time_s,cost` rows, including the closing marker if present.
pub fn write_trace(trace: &RunTrace, path: impl AsRef<FsPath>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    {
        let mut w = csv_writer(&mut out);
        w.write_record(["time_s", "cost"]).map_err(|e| csv_error(path, e))?;
        for e in trace.entries() {
            w.write_record([e.time_s.to_string(), e.cost.to_string()])
                .map_err(|e| csv_error(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}
