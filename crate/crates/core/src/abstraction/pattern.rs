use std::hash::{Hash, Hasher};

use smallvec::SmallVec;

use crate::abstraction::grid::{check_grid_count, GridKey};
use crate::error::{Error, Result};

/// An ordered window of consecutive grid keys, stored flat.
///
/// Equality compares every index, so patterns of different length or
/// dimension never compare equal even if their codes were to collide.
///
/// Up to 20 indices are stored inline and a key occupies one cache line.
#[derive(Debug, Clone)]
#[repr(align(64))]
pub struct PatternKey {
    code: u64,
    grid_count: u16,
    dim: u32,
    indices: SmallVec<[u16; 20]>,
}

impl PatternKey {
    pub fn from_grid_keys(keys: &[GridKey]) -> Result<Self> {
        let first = keys.first().ok_or_else(|| {
            Error::InvalidArgument("a pattern needs at least one grid key".into())
        })?;
        let dim = first.dim();
        let grid_count = first.grid_count();
        let mut indices = SmallVec::with_capacity(dim * keys.len());
        for key in keys {
            if key.dim() != dim || key.grid_count() != grid_count {
                return Err(Error::InvalidArgument(format!(
                    "grid key of dim {} / N={} does not match dim {dim} / N={grid_count}",
                    key.dim(),
                    key.grid_count()
                )));
            }
            indices.extend_from_slice(key.indices());
        }
        Self::from_flat(indices, dim, grid_count)
    }

    /// Builds a pattern from `len * dim` concatenated indices.
    pub fn from_flat(
        indices: impl Into<SmallVec<[u16; 20]>>,
        dim: usize,
        grid_count: usize,
    ) -> Result<Self> {
        let indices = indices.into();
        let n = check_grid_count(grid_count)?;
        if dim == 0 || indices.is_empty() || indices.len() % dim != 0 {
            return Err(Error::InvalidArgument(format!(
                "{} indices do not split into grid keys of dim {dim}",
                indices.len()
            )));
        }
        if let Some(bad) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidArgument(format!(
                "grid index {bad} out of range for {n} intervals"
            )));
        }
        let mut key = Self {
            code: 0,
            grid_count: n,
            dim: dim as u32,
            indices,
        };
        key.code = key.compute_code();
        Ok(key)
    }

    /// Number of grid keys in the window.
    pub fn len(&self) -> usize {
        self.indices.len() / self.dim as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn grid_count(&self) -> usize {
        self.grid_count as usize
    }

    pub fn indices(&self) -> &[u16] {
        &self.indices
    }

    pub fn grids(&self) -> impl Iterator<Item = &[u16]> {
        self.indices.chunks(self.dim as usize)
    }

    pub fn code(&self) -> u64 {
        self.code
    }

    fn compute_code(&self) -> u64 {
        const K: u64 = 0x517c_c1b7_2722_0a95;
        let step = |h: u64, w: u64| (h.rotate_left(5) ^ w).wrapping_mul(K);
        let mut h = step(0x9e37_79b9_7f4a_7c15, self.len() as u64);
        h = step(h, self.grid_count as u64);
        h = step(h, self.dim as u64);
        for chunk in self.indices.chunks(4) {
            let mut w = 0u64;
            for (k, &i) in chunk.iter().enumerate() {
                w |= (i as u64) << (16 * k);
            }
            h = step(h, w);
        }
        // splitmix64 finalizer
        h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h ^ (h >> 31)
    }
}

impl PartialEq for PatternKey {
    fn eq(&self, other: &Self) -> bool {
        self.code == other.code
            && self.dim == other.dim
            && self.grid_count == other.grid_count
            && self.indices == other.indices
    }
}

impl Eq for PatternKey {}

impl Hash for PatternKey {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.code);
    }
}

/// Stable 64-bit code over (length, grid count, dimension, indices).
///
/// The code only selects a bucket; lookups still compare full keys.
pub fn encode_key(pattern: &PatternKey) -> u64 {
    pattern.code
}

/// Pass-through hasher for maps keyed by [`PatternKey`], whose `Hash` impl
/// already writes a well-mixed 64-bit code.
#[derive(Debug, Default, Clone, Copy)]
pub struct KeyCodeHasher(u64);

impl Hasher for KeyCodeHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        // FNV-1a, only reached by non-PatternKey keys
        for &b in bytes {
            self.0 = (self.0 ^ b as u64).wrapping_mul(0x0100_0000_01b3);
        }
    }

    fn write_u64(&mut self, code: u64) {
        self.0 = code;
    }
}

/// The last `min(m, t + 1)` grid keys of `history` ending at index `t`.
pub fn extract_pattern(history: &[GridKey], t: usize, m: usize) -> Result<PatternKey> {
    if t >= history.len() {
        return Err(Error::InvalidArgument(format!(
            "step {t} outside a history of length {}",
            history.len()
        )));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("pattern length must be >= 1".into()));
    }
    let start = (t + 1).saturating_sub(m);
    PatternKey::from_grid_keys(&history[start..=t])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn key(i: u16) -> GridKey {
        GridKey::new(vec![i, i + 1], 8).unwrap()
    }

    #[test]
    fn full_window() {
        let h = [key(0), key(1), key(2), key(3)];
        let p = extract_pattern(&h, 3, 3).unwrap();
        assert_eq!(p, PatternKey::from_grid_keys(&h[1..]).unwrap());
        assert_eq!(p.len(), 3);
    }

    #[test]
    fn prefix_window() {
        let h = [key(0), key(1), key(2), key(3)];
        let p = extract_pattern(&h, 0, 3).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.grids().next().unwrap(), h[0].indices());
    }

    #[test]
    fn enumerate_all_windows() {
        // every t yields exactly one pattern; prefixes for t < m - 1
        let h: Vec<GridKey> = (0..6).map(key).collect();
        for m in 1..=4 {
            let lens: Vec<usize> = (0..h.len())
                .map(|t| extract_pattern(&h, t, m).unwrap().len())
                .collect();
            let expected: Vec<usize> = (0..h.len()).map(|t| (t + 1).min(m)).collect();
            assert_eq!(lens, expected);
        }
    }

    #[test]
    fn single_step_equals_grid_key() {
        let h = [key(4), key(2)];
        let p = extract_pattern(&h, 1, 1).unwrap();
        assert_eq!(p.indices(), key(2).indices());
    }

    #[test]
    fn shifted_windows_differ() {
        let h: Vec<GridKey> = (0..4).map(key).collect();
        assert_ne!(
            extract_pattern(&h, 2, 3).unwrap(),
            extract_pattern(&h, 3, 3).unwrap()
        );
    }

    #[test]
    fn different_lengths_never_equal() {
        // same flat indices, different split
        let a = PatternKey::from_flat(vec![1u16, 2, 3, 4], 2, 5).unwrap();
        let b = PatternKey::from_flat(vec![1u16, 2, 3, 4], 4, 5).unwrap();
        assert_ne!(a, b);
        assert_ne!(encode_key(&a), encode_key(&b));
    }

    #[test]
    fn equal_keys_equal_codes() {
        let a = PatternKey::from_grid_keys(&[key(1), key(2)]).unwrap();
        let b = PatternKey::from_flat(vec![1u16, 2, 2, 3], 2, 8).unwrap();
        assert_eq!(a, b);
        assert_eq!(encode_key(&a), encode_key(&b));
    }

    #[test]
    fn codes_spread() {
        let codes: HashSet<u64> = (0..50_000u32)
            .map(|i| {
                let idx: Vec<u16> = (0..6).map(|k| ((i >> (3 * k)) & 7) as u16).collect();
                encode_key(&PatternKey::from_flat(idx, 6, 8).unwrap())
            })
            .collect();
        assert_eq!(codes.len(), 50_000);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(extract_pattern(&[key(0)], 1, 3).is_err());
        assert!(extract_pattern(&[key(0)], 0, 0).is_err());
        assert!(PatternKey::from_grid_keys(&[]).is_err());
        let mixed = [key(0), GridKey::new(vec![0], 8).unwrap()];
        assert!(PatternKey::from_grid_keys(&mixed).is_err());
        assert!(PatternKey::from_flat(vec![1u16, 2, 3], 2, 5).is_err());
        assert!(PatternKey::from_flat(vec![9u16], 1, 5).is_err());
    }
}
