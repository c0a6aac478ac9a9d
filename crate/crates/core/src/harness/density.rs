use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::memory::EpisodicMemory;

/// How often stored patterns were visited.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport {
    /// Visit count to number of keys with that count.
    pub histogram: BTreeMap<u64, u64>,
    pub keys: u64,
    /// `sum(visits * keys)` over the histogram.
    pub occurrences: u64,
    pub once_visited_fraction: Option<f64>,
}

impl DensityReport {
    pub fn from_memory(memory: &EpisodicMemory) -> Self {
        let histogram = memory.density_histogram();
        Self {
            keys: histogram.values().sum(),
            occurrences: histogram.iter().map(|(v, k)| v * k).sum(),
            once_visited_fraction: memory.once_visited_fraction(),
            histogram,
        }
    }

    /// `visits,keys` rows followed by a `# ` summary line.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::Io(e.into());
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["visits", "keys"]).map_err(io)?;
        for (visits, keys) in &self.histogram {
            writer
                .write_record([visits.to_string(), keys.to_string()])
                .map_err(io)?;
        }
        writer.flush()?;
        let mut out = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        let fraction = self
            .once_visited_fraction
            .map_or(String::new(), |f| f.to_string());
        writeln!(
            out,
            "# keys={} occurrences={} once_visited_fraction={fraction}",
            self.keys, self.occurrences
        )?;
        Ok(())
    }
}

pub fn report_density(snapshot: impl AsRef<Path>) -> Result<DensityReport> {
    Ok(DensityReport::from_memory(&EpisodicMemory::load(snapshot)?))
}
