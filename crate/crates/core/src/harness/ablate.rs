use std::io::Write;
use std::path::PathBuf;

use crate::agents::AgentKind;
use crate::error::{Error, Result};
use crate::memory::MeasureMode;
use crate::shaping::AbstractMode;

use super::config::RunConfig;
use super::run::run;
use super::summary::{summarize_dir, summary_fields, RunSummary, SUMMARY_COLUMNS};

/// One swept setting.
#[derive(Debug, Clone, PartialEq)]
pub enum AxisValue {
    PatternLen(usize),
    GridCount(usize),
    Epsilon(f64),
    AbstractMode(AbstractMode),
    MeasureMode(MeasureMode),
    Agent(AgentKind),
}

impl AxisValue {
    pub fn axis(&self) -> &'static str {
        match self {
            Self::PatternLen(_) => "m",
            Self::GridCount(_) => "N",
            Self::Epsilon(_) => "epsilon",
            Self::AbstractMode(_) => "abstract_mode",
            Self::MeasureMode(_) => "measure_mode",
            Self::Agent(_) => "agent",
        }
    }

    pub fn value(&self) -> String {
        match self {
            Self::PatternLen(v) | Self::GridCount(v) => v.to_string(),
            Self::Epsilon(v) => v.to_string(),
            Self::AbstractMode(v) => v.to_string(),
            Self::MeasureMode(v) => v.to_string(),
            Self::Agent(v) => v.to_string(),
        }
    }

    fn parse(axis: &str, value: &str) -> Result<Self> {
        let bad =
            |e: &dyn std::fmt::Display| Error::Config(format!("grid axis {axis}: {value:?}: {e}"));
        Ok(match axis {
            "m" | "pattern_len" => Self::PatternLen(value.parse().map_err(|e| bad(&e))?),
            "N" | "grid_count" => Self::GridCount(value.parse().map_err(|e| bad(&e))?),
            "epsilon" => Self::Epsilon(value.parse().map_err(|e| bad(&e))?),
            "abstract_mode" => Self::AbstractMode(value.parse().map_err(|e| bad(&e))?),
            "measure_mode" => Self::MeasureMode(value.parse().map_err(|e| bad(&e))?),
            "agent" => Self::Agent(value.parse().map_err(|e| bad(&e))?),
            other => return Err(Error::Config(format!("unknown grid axis {other:?}"))),
        })
    }

    fn apply(&self, config: &mut RunConfig) {
        match self {
            Self::PatternLen(v) => config.shaping.pattern_len = *v,
            Self::GridCount(v) => config.shaping.grid_count = *v,
            Self::Epsilon(v) => config.shaping.epsilon = *v,
            Self::AbstractMode(v) => config.shaping.abstract_mode = *v,
            Self::MeasureMode(v) => config.shaping.measure_mode = *v,
            Self::Agent(v) => config.agent = *v,
        }
    }
}

/// Axes of a sweep, parsed from `axis=v1,v2;axis=v1,...`.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationGrid {
    pub axes: Vec<Vec<AxisValue>>,
}

impl AblationGrid {
    pub fn parse(spec: &str) -> Result<Self> {
        let mut axes: Vec<Vec<AxisValue>> = Vec::new();
        for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (axis, values) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("grid entry {part:?} lacks '='")))?;
            let values = values
                .split(',')
                .map(|v| AxisValue::parse(axis.trim(), v.trim()))
                .collect::<Result<Vec<_>>>()?;
            if axes.iter().any(|a| a[0].axis() == values[0].axis()) {
                return Err(Error::Config(format!("grid axis {axis:?} given twice")));
            }
            axes.push(values);
        }
        if axes.is_empty() {
            return Err(Error::Config("empty ablation grid".into()));
        }
        Ok(Self { axes })
    }

    /// Cross product in row-major order, first axis slowest.
    pub fn cells(&self) -> Vec<Vec<AxisValue>> {
        self.axes.iter().fold(vec![Vec::new()], |acc, axis| {
            acc.iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |v| {
                        let mut cell = prefix.clone();
                        cell.push(v.clone());
                        cell
                    })
                })
                .collect()
        })
    }
}

#[derive(Debug, Clone)]
pub struct AblationCell {
    pub settings: Vec<AxisValue>,
    pub summary: RunSummary,
}

impl AblationCell {
    pub fn label(&self) -> String {
        cell_label(&self.settings)
    }
}

fn cell_label(settings: &[AxisValue]) -> String {
    settings
        .iter()
        .map(|v| format!("{}-{}", v.axis(), v.value()))
        .collect::<Vec<_>>()
        .join("_")
}

/// Runs every grid cell over all configured seeds under
/// `<outdir>/<cell-label>/` and writes one summary row per cell to
/// `<outdir>/ablation.csv`.
pub fn ablate(base: &RunConfig, grid: &AblationGrid) -> Result<Vec<AblationCell>> {
    base.validate()?;
    let mut configs = Vec::new();
    for settings in grid.cells() {
        let mut config = base.clone();
        for v in &settings {
            v.apply(&mut config);
        }
        config.outdir = base.outdir.join(cell_label(&settings));
        config.validate()?;
        configs.push((settings, config));
    }
    let mut cells = Vec::new();
    for (settings, config) in configs {
        run(&config)?;
        let summary = summarize_dir(&config.outdir)?;
        cells.push(AblationCell { settings, summary });
    }
    std::fs::create_dir_all(&base.outdir)?;
    let file = std::fs::File::create(base.outdir.join("ablation.csv"))?;
    write_ablation_csv(grid, &cells, std::io::BufWriter::new(file))?;
    Ok(cells)
}

pub fn ablation_csv_path(base: &RunConfig) -> PathBuf {
    base.outdir.join("ablation.csv")
}

pub fn write_ablation_csv<W: Write>(
    grid: &AblationGrid,
    cells: &[AblationCell],
    out: W,
) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.into());
    let mut writer = csv::Writer::from_writer(out);
    let header: Vec<&str> = std::iter::once("cell")
        .chain(grid.axes.iter().map(|a| a[0].axis()))
        .chain(SUMMARY_COLUMNS)
        .collect();
    writer.write_record(&header).map_err(io)?;
    for cell in cells {
        let record: Vec<String> = std::iter::once(cell.label())
            .chain(cell.settings.iter().map(AxisValue::value))
            .chain(summary_fields(&cell.summary))
            .collect();
        writer.write_record(&record).map_err(io)?;
    }
    writer.flush()?;
    Ok(())
}
