//! Line-based text snapshots.
//!
//! ```text
//! necsa-memory v1 mode=score m=3 N=5
//! <pattern-length>,<indices...>,<visits>,<return-sum>,<score>
//! ```
//!
//! Reals are written with 17 significant digits, which round-trips `f64`.
//! Entries are written in insertion order, so a loaded memory rebuilds the
//! same aggregates bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use smallvec::SmallVec;

use super::{EpisodicMemory, MeasureMode, MemoryEntry};
use crate::abstraction::PatternKey;
use crate::error::{Error, Result};

const MAGIC: &str = "necsa-memory";
const VERSION: &str = "v1";

impl EpisodicMemory {
    pub fn snapshot(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_to(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }

    pub fn write_to<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(
            out,
            "{MAGIC} {VERSION} mode={} m={} N={}",
            self.mode, self.pattern_len, self.grid_count
        )?;
        let mut line = String::new();
        for (key, entry) in self.iter() {
            use std::fmt::Write as _;
            line.clear();
            write!(line, "{}", key.len()).unwrap();
            for i in key.indices() {
                write!(line, ",{i}").unwrap();
            }
            write!(
                line,
                ",{},{:.16e},{:.16e}",
                entry.visits, entry.return_sum, entry.score
            )
            .unwrap();
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = match lines.next() {
            Some(line) => line?,
            None => return Err(malformed(1, "missing header")),
        };
        let (mode, pattern_len, grid_count) = parse_header(&header)?;
        let mut memory = EpisodicMemory::new(mode, pattern_len, grid_count);
        for (offset, line) in lines.enumerate() {
            let line_no = offset + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (key, entry) =
                parse_entry(&line, grid_count).map_err(|m| malformed(line_no, &m))?;
            memory.occurrences += entry.visits;
            if memory.table.insert(key, entry).is_some() {
                return Err(malformed(line_no, "duplicate pattern"));
            }
        }
        memory.refresh();
        Ok(memory)
    }
}

fn malformed(line: usize, message: &str) -> Error {
    Error::Snapshot {
        line,
        message: message.to_string(),
    }
}

fn parse_header(header: &str) -> Result<(MeasureMode, usize, usize)> {
    let mut parts = header.split_whitespace();
    if parts.next() != Some(MAGIC) || parts.next() != Some(VERSION) {
        return Err(malformed(1, "expected `necsa-memory v1` header"));
    }
    let (mut mode, mut m, mut n) = (None, None, None);
    for part in parts {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| malformed(1, &format!("bad header field {part:?}")))?;
        let bad = |_| malformed(1, &format!("bad value in {part:?}"));
        match key {
            "mode" => {
                mode = Some(
                    value
                        .parse::<MeasureMode>()
                        .map_err(|e| malformed(1, &e.to_string()))?,
                )
            }
            "m" => m = Some(value.parse::<usize>().map_err(bad)?),
            "N" => n = Some(value.parse::<usize>().map_err(bad)?),
            _ => return Err(malformed(1, &format!("unknown header field {key:?}"))),
        }
    }
    match (mode, m, n) {
        (Some(mode), Some(m), Some(n)) => Ok((mode, m, n)),
        _ => Err(malformed(1, "header needs mode, m and N")),
    }
}

fn parse_entry(
    line: &str,
    grid_count: usize,
) -> std::result::Result<(PatternKey, MemoryEntry), String> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() < 5 {
        return Err(format!(
            "expected at least 5 fields, found {}",
            fields.len()
        ));
    }
    let len: usize = fields[0]
        .parse()
        .map_err(|_| format!("bad pattern length {:?}", fields[0]))?;
    let n_indices = fields.len() - 4;
    if len == 0 || n_indices % len != 0 {
        return Err(format!(
            "{n_indices} indices do not split into {len} grid keys"
        ));
    }
    let indices = fields[1..=n_indices]
        .iter()
        .map(|f| f.parse::<u16>().map_err(|_| format!("bad index {f:?}")))
        .collect::<std::result::Result<SmallVec<[u16; 20]>, _>>()?;
    let key =
        PatternKey::from_flat(indices, n_indices / len, grid_count).map_err(|e| e.to_string())?;
    let tail = &fields[n_indices + 1..];
    let visits: u64 = tail[0]
        .parse()
        .map_err(|_| format!("bad visit count {:?}", tail[0]))?;
    if visits == 0 {
        return Err("visit count must be positive".into());
    }
    let real = |f: &str| match f.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("bad real {f:?}")),
    };
    let entry = MemoryEntry {
        visits,
        return_sum: real(tail[1])?,
        score: real(tail[2])?,
    };
    Ok((key, entry))
}
