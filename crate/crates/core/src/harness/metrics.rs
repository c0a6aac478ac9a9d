use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const METRICS_COLUMNS: [&str; 9] = [
    "step",
    "episode",
    "train_return_raw",
    "train_return_revised",
    "eval_return_mean",
    "memory_entries",
    "mean_score_norm",
    "once_visited_fraction",
    "wall_clock_ms",
];

/// One line of `metrics.csv`. Episode rows carry the train returns, eval
/// rows carry `eval_return_mean`; a NaN eval mean marks a diverged seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub step: u64,
    /// Episodes completed so far.
    pub episode: u64,
    pub train_return_raw: Option<f64>,
    pub train_return_revised: Option<f64>,
    pub eval_return_mean: Option<f64>,
    pub memory_entries: u64,
    pub mean_score_norm: Option<f64>,
    pub once_visited_fraction: Option<f64>,
    pub wall_clock_ms: u64,
}

impl MetricsRow {
    pub fn is_eval(&self) -> bool {
        self.eval_return_mean.is_some()
    }

    pub fn is_failure(&self) -> bool {
        self.eval_return_mean.is_some_and(f64::is_nan)
    }
}

pub struct MetricsWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> MetricsWriter<W> {
    pub fn new(out: W) -> Self {
        Self {
            inner: csv::Writer::from_writer(out),
        }
    }

    pub fn write(&mut self, row: &MetricsRow) -> Result<()> {
        self.inner.serialize(row).map_err(csv_error)?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

pub fn read_metrics<R: Read>(input: R) -> Result<Vec<MetricsRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers().map_err(csv_error)?;
    if header.iter().ne(METRICS_COLUMNS) {
        return Err(Error::Metrics {
            line: 1,
            message: format!("unexpected header {header:?}"),
        });
    }
    reader
        .deserialize()
        .map(|row| row.map_err(csv_error))
        .collect()
}

pub fn load_metrics(path: impl AsRef<Path>) -> Result<Vec<MetricsRow>> {
    read_metrics(std::fs::File::open(path)?)
}

/// First eval step whose mean return reaches `threshold`.
pub fn steps_to_threshold(rows: &[MetricsRow], threshold: f64) -> Option<u64> {
    rows.iter()
        .find(|r| r.eval_return_mean.is_some_and(|m| m >= threshold))
        .map(|r| r.step)
}

/// Mean eval return at the last eval row, if the run did not diverge.
pub fn final_eval(rows: &[MetricsRow]) -> Option<f64> {
    rows.iter()
        .rev()
        .find_map(|r| r.eval_return_mean)
        .filter(|m| !m.is_nan())
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Metrics {
        line,
        message: e.to_string(),
    }
}
