use crate::abstraction::{encode_key, PatternKey};

use super::MemoryEntry;

const EMPTY: u32 = u32::MAX;
const PREFETCH_AHEAD: usize = 32;

/// Slots carry a copy of the entry's score so a lookup reads one slot and
/// one key.
#[derive(Debug, Clone, Copy)]
struct Slot {
    code: u64,
    score: f64,
    index: u32,
}

const VACANT: Slot = Slot {
    code: 0,
    score: 0.0,
    index: EMPTY,
};

/// Open-addressing map from patterns to entries with linear probing.
///
/// Keys and entries live in insertion order; `slots[_].score` always equals
/// `entries[slots[_].index].score`. Load factor stays at or below 1/2.
#[derive(Debug, Clone)]
pub(super) struct PatternTable {
    slots: Vec<Slot>,
    keys: Vec<PatternKey>,
    entries: Vec<MemoryEntry>,
}

impl Default for PatternTable {
    fn default() -> Self {
        Self::with_capacity(0)
    }
}

impl PatternTable {
    pub fn with_capacity(capacity: usize) -> Self {
        let slots = (2 * capacity).next_power_of_two().max(16);
        Self {
            slots: vec![VACANT; slots],
            keys: Vec::with_capacity(capacity),
            entries: Vec::with_capacity(capacity),
        }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn reserve(&mut self, additional: usize) {
        let needed = self.len() + additional;
        if 2 * needed > self.slots.len() {
            self.rehash((2 * needed).next_power_of_two());
        }
        self.keys.reserve(additional);
        self.entries.reserve(additional);
    }

    /// Slot holding `pattern`, or the vacant slot where it would go.
    #[inline]
    fn position(&self, pattern: &PatternKey) -> (usize, bool) {
        let code = encode_key(pattern);
        let mask = self.slots.len() - 1;
        let mut i = code as usize & mask;
        loop {
            let slot = &self.slots[i];
            if slot.index == EMPTY {
                return (i, false);
            }
            if slot.code == code && self.keys[slot.index as usize] == *pattern {
                return (i, true);
            }
            i = (i + 1) & mask;
        }
    }

    pub fn get(&self, pattern: &PatternKey) -> Option<&MemoryEntry> {
        match self.position(pattern) {
            (i, true) => Some(&self.entries[self.slots[i].index as usize]),
            _ => None,
        }
    }

    #[inline]
    pub fn score(&self, pattern: &PatternKey) -> Option<f64> {
        match self.position(pattern) {
            (i, true) => Some(self.slots[i].score),
            _ => None,
        }
    }

    /// [`Self::score`] for each pattern, prefetching slots and keys ahead of
    /// use so independent cache misses overlap.
    pub fn scores_many(&self, patterns: &[PatternKey], out: &mut Vec<Option<f64>>) {
        let mask = self.slots.len() - 1;
        out.reserve(patterns.len());
        for j in 0..patterns.len() {
            if let Some(p) = patterns.get(j + PREFETCH_AHEAD) {
                prefetch(&self.slots[encode_key(p) as usize & mask]);
            }
            if let Some(p) = patterns.get(j + PREFETCH_AHEAD / 2) {
                let code = encode_key(p);
                let slot = &self.slots[code as usize & mask];
                if slot.index != EMPTY && slot.code == code {
                    prefetch(&self.keys[slot.index as usize]);
                }
            }
            out.push(self.score(&patterns[j]));
        }
    }

    /// Applies `update` to the entry of `pattern`, inserting `insert()` first
    /// if absent.
    pub fn upsert(
        &mut self,
        pattern: &PatternKey,
        insert: impl FnOnce() -> MemoryEntry,
        update: impl FnOnce(&mut MemoryEntry),
    ) {
        match self.position(pattern) {
            (i, true) => {
                let index = self.slots[i].index as usize;
                update(&mut self.entries[index]);
                self.slots[i].score = self.entries[index].score;
            }
            _ => {
                self.insert_new(pattern.clone(), insert());
            }
        }
    }

    /// Inserts or replaces; returns the previous entry.
    pub fn insert(&mut self, pattern: PatternKey, entry: MemoryEntry) -> Option<MemoryEntry> {
        match self.position(&pattern) {
            (i, true) => {
                self.slots[i].score = entry.score;
                Some(std::mem::replace(
                    &mut self.entries[self.slots[i].index as usize],
                    entry,
                ))
            }
            _ => {
                self.insert_new(pattern, entry);
                None
            }
        }
    }

    fn insert_new(&mut self, pattern: PatternKey, entry: MemoryEntry) {
        assert!(self.len() < EMPTY as usize, "pattern table is full");
        if 2 * (self.len() + 1) > self.slots.len() {
            self.rehash(2 * self.slots.len());
        }
        let (i, _) = self.position(&pattern);
        self.slots[i] = Slot {
            code: encode_key(&pattern),
            score: entry.score,
            index: self.len() as u32,
        };
        self.keys.push(pattern);
        self.entries.push(entry);
    }

    fn rehash(&mut self, slots: usize) {
        let mask = slots - 1;
        self.slots = vec![VACANT; slots];
        for (index, (pattern, entry)) in self.keys.iter().zip(&self.entries).enumerate() {
            let code = encode_key(pattern);
            let mut i = code as usize & mask;
            while self.slots[i].index != EMPTY {
                i = (i + 1) & mask;
            }
            self.slots[i] = Slot {
                code,
                score: entry.score,
                index: index as u32,
            };
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PatternKey, &MemoryEntry)> {
        self.keys.iter().zip(&self.entries)
    }

    pub fn values(&self) -> impl Iterator<Item = &MemoryEntry> {
        self.entries.iter()
    }
}

#[inline(always)]
fn prefetch<T>(value: &T) {
    #[cfg(target_arch = "x86_64")]
    // SAFETY: a prefetch is a hint with no architectural effect.
    unsafe {
        use std::arch::x86_64::{_mm_prefetch, _MM_HINT_T0};
        _mm_prefetch(value as *const T as *const i8, _MM_HINT_T0);
    }
    #[cfg(not(target_arch = "x86_64"))]
    let _ = value;
}
