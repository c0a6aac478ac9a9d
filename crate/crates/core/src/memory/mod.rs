//! Key-value episodic memory over multi-step patterns.
//!
//! Each stored pattern carries the running total of the returns of the
//! episodes it occurred in, its occurrence count, and their ratio, the
//! reward-confidence score:
//!
//! ```text
//! unseen:  E = G,      n = 1,      c = G
//! seen:    E = E + G,  n = n + 1,  c = E / n
//! ```
//!
//! A pattern that occurs k times in one episode is counted k times.
//!
//! Lookups normalize scores to `[0, 1]` with the current minimum and maximum;
//! when every stored score is equal the normalized score is 0.5. Aggregates
//! (count, sum, min, max) are recomputed by one scan in insertion order after
//! every mutating call, so they always equal a full rescan and are a pure
//! function of the stored entries.
//!
//! In [`MeasureMode::QValue`] the same table stores, per pattern, the sum and
//! count of critic estimates recorded at the pattern's last step and their
//! mean, which then plays the role of the score.

mod snapshot;
mod table;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::abstraction::PatternKey;
use crate::error::{Error, Result};

/// What a memory entry measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureMode {
    /// Mean episodic return of the episodes containing the pattern.
    Score,
    /// Mean critic estimate of the concrete steps ending the pattern.
    #[serde(rename = "qvalue")]
    QValue,
}

impl fmt::Display for MeasureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeasureMode::Score => "score",
            MeasureMode::QValue => "qvalue",
        })
    }
}

impl std::str::FromStr for MeasureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "score" => Ok(MeasureMode::Score),
            "qvalue" => Ok(MeasureMode::QValue),
            other => Err(Error::InvalidArgument(format!(
                "unknown measure mode {other:?} (expected score or qvalue)"
            ))),
        }
    }
}

/// Per-pattern record. In q-value mode the fields hold the sum of critic
/// estimates, their count and their mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryEntry {
    pub return_sum: f64,
    pub visits: u64,
    pub score: f64,
}

impl MemoryEntry {
    fn first(value: f64) -> Self {
        Self {
            return_sum: value,
            visits: 1,
            score: value,
        }
    }

    fn add(&mut self, value: f64) {
        self.return_sum += value;
        self.visits += 1;
        self.score = self.return_sum / self.visits as f64;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryAggregates {
    pub entries: usize,
    pub sum: f64,
    /// `+inf` while the memory is empty.
    pub min: f64,
    /// `-inf` while the memory is empty.
    pub max: f64,
}

impl MemoryAggregates {
    const EMPTY: Self = Self {
        entries: 0,
        sum: 0.0,
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
    };

    fn normalize(&self, value: f64) -> f64 {
        if self.max > self.min {
            ((value - self.min) / (self.max - self.min)).clamp(0.0, 1.0)
        } else {
            0.5
        }
    }
}

use table::PatternTable as Table;

#[derive(Debug, Clone)]
pub struct EpisodicMemory {
    mode: MeasureMode,
    pattern_len: usize,
    grid_count: usize,
    table: Table,
    aggregates: MemoryAggregates,
    occurrences: u64,
}

impl EpisodicMemory {
    /// `pattern_len` and `grid_count` describe the keys and are recorded in
    /// snapshots.
    pub fn new(mode: MeasureMode, pattern_len: usize, grid_count: usize) -> Self {
        Self {
            mode,
            pattern_len,
            grid_count,
            table: Table::default(),
            aggregates: MemoryAggregates::EMPTY,
            occurrences: 0,
        }
    }

    pub fn with_capacity(
        mode: MeasureMode,
        pattern_len: usize,
        grid_count: usize,
        capacity: usize,
    ) -> Self {
        let mut memory = Self::new(mode, pattern_len, grid_count);
        memory.table.reserve(capacity);
        memory
    }

    pub fn mode(&self) -> MeasureMode {
        self.mode
    }

    pub fn pattern_len(&self) -> usize {
        self.pattern_len
    }

    pub fn grid_count(&self) -> usize {
        self.grid_count
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.len() == 0
    }

    pub fn aggregates(&self) -> MemoryAggregates {
        self.aggregates
    }

    /// Total occurrences fed into the memory (sum of all visit counts).
    pub fn total_occurrences(&self) -> u64 {
        self.occurrences
    }

    pub fn get(&self, pattern: &PatternKey) -> Option<&MemoryEntry> {
        self.table.get(pattern)
    }

    /// Entries in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (&PatternKey, &MemoryEntry)> {
        self.table.iter()
    }

    fn require(&self, expected: MeasureMode) -> Result<()> {
        if self.mode == expected {
            Ok(())
        } else {
            Err(Error::ModeMismatch {
                expected,
                actual: self.mode,
            })
        }
    }

    /// Folds one finished episode into the scores: every occurrence in
    /// `patterns` adds `episode_return` to its pattern.
    pub fn observe_episode(&mut self, patterns: &[PatternKey], episode_return: f64) -> Result<()> {
        self.require(MeasureMode::Score)?;
        if !episode_return.is_finite() {
            return Err(Error::NonFinite {
                index: 0,
                value: episode_return,
            });
        }
        if patterns.is_empty() {
            return Ok(());
        }
        for pattern in patterns {
            self.accumulate(pattern, episode_return);
        }
        self.refresh();
        Ok(())
    }

    /// Records one critic estimate for `pattern`.
    pub fn observe_q(&mut self, pattern: &PatternKey, q: f64) -> Result<()> {
        self.observe_q_batch(std::iter::once((pattern, q)))
    }

    /// Records many critic estimates, refreshing the aggregates once.
    pub fn observe_q_batch<'a>(
        &mut self,
        samples: impl IntoIterator<Item = (&'a PatternKey, f64)>,
    ) -> Result<()> {
        self.require(MeasureMode::QValue)?;
        let mut touched = false;
        for (index, (pattern, q)) in samples.into_iter().enumerate() {
            if !q.is_finite() {
                if touched {
                    self.refresh();
                }
                return Err(Error::NonFinite { index, value: q });
            }
            self.accumulate(pattern, q);
            touched = true;
        }
        if touched {
            self.refresh();
        }
        Ok(())
    }

    fn accumulate(&mut self, pattern: &PatternKey, value: f64) {
        self.table.upsert(
            pattern,
            || MemoryEntry::first(value),
            |entry| entry.add(value),
        );
        self.occurrences += 1;
    }

    fn refresh(&mut self) {
        let mut agg = MemoryAggregates::EMPTY;
        for entry in self.table.values() {
            agg.sum += entry.score;
            agg.min = agg.min.min(entry.score);
            agg.max = agg.max.max(entry.score);
        }
        agg.entries = self.table.len();
        self.aggregates = agg;
    }

    /// Score of `pattern` normalized to `[0, 1]`, or `None` if unseen.
    ///
    /// Mode-agnostic: in q-value mode this is the normalized mean estimate.
    pub fn lookup_score(&self, pattern: &PatternKey) -> Option<f64> {
        self.table
            .score(pattern)
            .map(|score| self.aggregates.normalize(score))
    }

    /// [`Self::lookup_score`] for many patterns, appended to `out` in order.
    ///
    /// Independent lookups are overlapped, which is faster than one call per
    /// pattern once the table outgrows the cache.
    pub fn lookup_scores(&self, patterns: &[PatternKey], out: &mut Vec<Option<f64>>) {
        let start = out.len();
        self.table.scores_many(patterns, out);
        for score in out[start..].iter_mut().flatten() {
            *score = self.aggregates.normalize(*score);
        }
    }

    /// Normalized mean critic estimate of `pattern`.
    pub fn lookup_q(&self, pattern: &PatternKey) -> Result<Option<f64>> {
        self.require(MeasureMode::QValue)?;
        Ok(self.lookup_score(pattern))
    }

    /// Mean of the normalized scores of all stored patterns.
    ///
    /// Normalization is affine, so this is the normalized mean raw score.
    pub fn mean_normalized_score(&self) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptyMemory);
        }
        let agg = &self.aggregates;
        Ok(agg.normalize(agg.sum / agg.entries as f64))
    }

    /// Visit count -> number of patterns with that count.
    pub fn density_histogram(&self) -> BTreeMap<u64, u64> {
        let mut histogram = BTreeMap::new();
        for entry in self.table.values() {
            *histogram.entry(entry.visits).or_insert(0) += 1;
        }
        histogram
    }

    /// Fraction of stored patterns seen exactly once; `None` when empty.
    pub fn once_visited_fraction(&self) -> Option<f64> {
        if self.is_empty() {
            return None;
        }
        let once = self.table.values().filter(|e| e.visits == 1).count();
        Some(once as f64 / self.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pk(i: u16) -> PatternKey {
        PatternKey::from_flat(vec![i % 5, i / 5], 2, 5).unwrap()
    }

    #[test]
    fn first_occurrence_inserts() {
        let mut mem = EpisodicMemory::new(MeasureMode::Score, 3, 5);
        mem.observe_episode(&[pk(1)], 10.0).unwrap();
        assert_eq!(
            mem.get(&pk(1)),
            Some(&MemoryEntry {
                return_sum: 10.0,
                visits: 1,
                score: 10.0
            })
        );
    }

    #[test]
    fn second_episode_averages() {
        let mut mem = EpisodicMemory::new(MeasureMode::Score, 3, 5);
        mem.observe_episode(&[pk(1)], 10.0).unwrap();
        mem.observe_episode(&[pk(1)], 20.0).unwrap();
        let e = mem.get(&pk(1)).unwrap();
        assert_eq!((e.return_sum, e.visits, e.score), (30.0, 2, 15.0));
    }

    #[test]
    fn repeated_occurrence_counts_each_time() {
        let mut mem = EpisodicMemory::new(MeasureMode::Score, 3, 5);
        mem.observe_episode(&[pk(1), pk(2), pk(1)], 4.0).unwrap();
        assert_eq!(mem.get(&pk(1)).unwrap().visits, 2);
        assert_eq!(mem.get(&pk(1)).unwrap().return_sum, 8.0);
        assert_eq!(mem.total_occurrences(), 3);
    }

    #[test]
    fn empty_episode_is_noop() {
        let mut mem = EpisodicMemory::new(MeasureMode::Score, 3, 5);
        mem.observe_episode(&[], 3.0).unwrap();
        assert!(mem.is_empty());
        assert_eq!(mem.aggregates(), MemoryAggregates::EMPTY);
    }

    #[test]
    fn rejects_non_finite_returns() {
        let mut mem = EpisodicMemory::new(MeasureMode::Score, 3, 5);
        assert!(mem.observe_episode(&[pk(0)], f64::NAN).is_err());
        assert!(mem.is_empty());
    }

    #[test]
    fn normalization() {
        let mut mem = EpisodicMemory::new(MeasureMode::Score, 3, 5);
        mem.observe_episode(&[pk(1)], 10.0).unwrap();
        assert_eq!(mem.lookup_score(&pk(1)), Some(0.5));
        mem.observe_episode(&[pk(2)], 30.0).unwrap();
        assert_eq!(mem.lookup_score(&pk(2)), Some(1.0));
        assert_eq!(mem.lookup_score(&pk(1)), Some(0.0));
        assert_eq!(mem.lookup_score(&pk(3)), None);
        assert_eq!(mem.mean_normalized_score().unwrap(), 0.5);
    }

    #[test]
    fn mean_of_three() {
        let mut mem = EpisodicMemory::new(MeasureMode::Score, 3, 5);
        for (i, g) in [0.0, 5.0, 10.0].into_iter().enumerate() {
            mem.observe_episode(&[pk(i as u16)], g).unwrap();
        }
        assert_eq!(mem.mean_normalized_score().unwrap(), 0.5);
    }

    #[test]
    fn all_equal_scores_are_neutral() {
        let mut mem = EpisodicMemory::new(MeasureMode::Score, 3, 5);
        mem.observe_episode(&[pk(1), pk(2), pk(3)], 7.0).unwrap();
        assert_eq!(mem.mean_normalized_score().unwrap(), 0.5);
        assert_eq!(mem.lookup_score(&pk(2)), Some(0.5));
    }

    #[test]
    fn empty_mean_is_error() {
        let mem = EpisodicMemory::new(MeasureMode::Score, 3, 5);
        assert!(matches!(
            mem.mean_normalized_score(),
            Err(Error::EmptyMemory)
        ));
    }

    #[test]
    fn extrema_track_decreasing_max() {
        let mut mem = EpisodicMemory::new(MeasureMode::Score, 3, 5);
        mem.observe_episode(&[pk(1)], 10.0).unwrap();
        mem.observe_episode(&[pk(2)], 30.0).unwrap();
        mem.observe_episode(&[pk(2)], 10.0).unwrap();
        let agg = mem.aggregates();
        assert_eq!((agg.min, agg.max, agg.sum), (10.0, 20.0, 30.0));
    }

    #[test]
    fn q_mode() {
        let mut mem = EpisodicMemory::new(MeasureMode::QValue, 3, 5);
        mem.observe_q(&pk(1), 2.0).unwrap();
        assert_eq!(mem.lookup_q(&pk(1)).unwrap(), Some(0.5));
        mem.observe_q(&pk(1), 4.0).unwrap();
        assert_eq!(mem.get(&pk(1)).unwrap().score, 3.0);
        assert_eq!(mem.lookup_q(&pk(9)).unwrap(), None);
        assert!(matches!(
            mem.observe_episode(&[pk(1)], 1.0),
            Err(Error::ModeMismatch { .. })
        ));
        let score_mem = EpisodicMemory::new(MeasureMode::Score, 3, 5);
        assert!(score_mem.lookup_q(&pk(1)).is_err());
        let mut score_mem = score_mem;
        assert!(score_mem.observe_q(&pk(1), 1.0).is_err());
    }

    #[test]
    fn histogram_counts() {
        let mut mem = EpisodicMemory::new(MeasureMode::Score, 3, 5);
        assert!(mem.density_histogram().is_empty());
        mem.observe_episode(&[pk(1), pk(2), pk(3), pk(3)], 1.0)
            .unwrap();
        let h = mem.density_histogram();
        assert_eq!(h, BTreeMap::from([(1, 2), (2, 1)]));
        assert_eq!(mem.once_visited_fraction(), Some(2.0 / 3.0));
    }
}
