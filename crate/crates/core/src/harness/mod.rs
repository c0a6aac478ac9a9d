//! Experiment runner: config files, seeded training runs, ablation sweeps,
//! run comparison and memory density reports.
//!
//! Each seed writes `<outdir>/<seed>/metrics.csv`, the final memory snapshot
//! `memory.txt` and the effective `run.toml`.

mod ablate;
mod config;
mod density;
mod metrics;
mod run;
mod summary;

pub use ablate::{
    ablate, ablation_csv_path, write_ablation_csv, AblationCell, AblationGrid, AxisValue,
};
pub use config::{parse_config, RunConfig};
pub use density::{report_density, DensityReport};
pub use metrics::{
    final_eval, load_metrics, read_metrics, steps_to_threshold, MetricsRow, MetricsWriter,
    METRICS_COLUMNS,
};
pub use run::{derive_seed, run, run_seed, seed_dirs, SeedOutcome, SeedStatus};
pub use summary::{compare, mean_std, median_steps, summarize_dir, RunSummary, SUMMARY_COLUMNS};
