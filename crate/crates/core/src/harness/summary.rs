use std::io::Write;
use std::path::{Path, PathBuf};

use crate::envs::make_env;
use crate::error::{Error, Result};

use super::config::parse_config;
use super::metrics::{final_eval, load_metrics, steps_to_threshold};
use super::run::seed_dirs;

/// Statistics of one run directory, recomputed from its per-seed files.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub env: String,
    pub threshold: f64,
    pub seeds: Vec<u64>,
    /// Seeds whose metrics end without a divergence marker.
    pub completed: usize,
    pub final_eval_mean: Option<f64>,
    /// Sample standard deviation; 0 for a single seed.
    pub final_eval_std: Option<f64>,
    /// Per seed, `None` when the threshold was never reached.
    pub steps_to_threshold: Vec<Option<u64>>,
    pub once_visited_fraction_mean: Option<f64>,
}

impl RunSummary {
    pub fn median_steps_to_threshold(&self) -> Option<f64> {
        median_steps(&self.steps_to_threshold)
    }

    pub fn reached(&self) -> usize {
        self.steps_to_threshold.iter().flatten().count()
    }
}

/// Median where an unreached threshold ranks above every reached one.
pub fn median_steps(values: &[Option<u64>]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted: Vec<u64> = values.iter().map(|v| v.unwrap_or(u64::MAX)).collect();
    sorted.sort_unstable();
    let n = sorted.len();
    let (lo, hi) = (sorted[(n - 1) / 2], sorted[n / 2]);
    if hi == u64::MAX {
        None
    } else {
        Some((lo as f64 + hi as f64) / 2.0)
    }
}

pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Some((mean, var.sqrt()))
}

pub fn summarize_dir(dir: impl AsRef<Path>) -> Result<RunSummary> {
    let dir = dir.as_ref();
    let seeds = seed_dirs(dir)?;
    let (_, first) = seeds
        .first()
        .ok_or_else(|| Error::Config(format!("{} holds no seed directories", dir.display())))?;
    let config = parse_config(first.join("run.toml"))?;
    let threshold = make_env(&config.env)?.spec().success_threshold;

    let mut finals = Vec::new();
    let mut steps = Vec::new();
    let mut once = Vec::new();
    let mut completed = 0;
    for (_, path) in &seeds {
        let rows = load_metrics(path.join("metrics.csv"))?;
        if !rows.iter().any(|r| r.is_failure()) {
            completed += 1;
            finals.extend(final_eval(&rows));
        }
        steps.push(steps_to_threshold(&rows, threshold));
        once.extend(rows.last().and_then(|r| r.once_visited_fraction));
    }
    let stats = mean_std(&finals);
    Ok(RunSummary {
        dir: dir.to_path_buf(),
        env: config.env,
        threshold,
        seeds: seeds.iter().map(|s| s.0).collect(),
        completed,
        final_eval_mean: stats.map(|s| s.0),
        final_eval_std: stats.map(|s| s.1),
        steps_to_threshold: steps,
        once_visited_fraction_mean: mean_std(&once).map(|s| s.0),
    })
}

pub const SUMMARY_COLUMNS: [&str; 10] = [
    "env",
    "seeds",
    "completed",
    "final_eval_mean",
    "final_eval_std",
    "threshold",
    "median_steps_to_threshold",
    "reached",
    "once_visited_fraction_mean",
    "dir",
];

pub(crate) fn summary_fields(s: &RunSummary) -> Vec<String> {
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
    vec![
        s.env.clone(),
        s.seeds.len().to_string(),
        s.completed.to_string(),
        opt(s.final_eval_mean),
        opt(s.final_eval_std),
        s.threshold.to_string(),
        opt(s.median_steps_to_threshold()),
        s.reached().to_string(),
        opt(s.once_visited_fraction_mean),
        s.dir.display().to_string(),
    ]
}

/// Summaries of several run directories as one CSV table.
pub fn compare<W: Write>(dirs: &[PathBuf], out: W) -> Result<Vec<RunSummary>> {
    let summaries = dirs.iter().map(summarize_dir).collect::<Result<Vec<_>>>()?;
    let mut writer = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.into());
    writer.write_record(SUMMARY_COLUMNS).map_err(io)?;
    for s in &summaries {
        writer.write_record(summary_fields(s)).map_err(io)?;
    }
    writer.flush()?;
    Ok(summaries)
}
