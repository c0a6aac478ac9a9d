use crate::abstraction::BoundedVector;
use crate::error::{ensure_finite, Error, Result};

/// Interval indices of one grid cell; each index lies in `[0, grid_count)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridKey {
    indices: Vec<u16>,
    grid_count: u16,
}

impl GridKey {
    pub fn new(indices: Vec<u16>, grid_count: usize) -> Result<Self> {
        let grid_count = check_grid_count(grid_count)?;
        if let Some(bad) = indices.iter().find(|&&i| i >= grid_count) {
            return Err(Error::InvalidArgument(format!(
                "grid index {bad} out of range for {grid_count} intervals"
            )));
        }
        Ok(Self {
            indices,
            grid_count,
        })
    }

    pub fn indices(&self) -> &[u16] {
        &self.indices
    }

    pub fn grid_count(&self) -> usize {
        self.grid_count as usize
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    /// Center of the cell in the coordinates of `lower`/`upper`.
    pub fn representative(&self, lower: &[f64], upper: &[f64]) -> Vec<f64> {
        let n = self.grid_count as f64;
        self.indices
            .iter()
            .zip(lower.iter().zip(upper))
            .map(|(&i, (&lo, &hi))| lo + (i as f64 + 0.5) * (hi - lo) / n)
            .collect()
    }
}

pub(crate) fn check_grid_count(grid_count: usize) -> Result<u16> {
    if !(2..=u16::MAX as usize).contains(&grid_count) {
        return Err(Error::InvalidArgument(format!(
            "grid count {grid_count} must lie in [2, {}]",
            u16::MAX
        )));
    }
    Ok(grid_count as u16)
}

/// Maps every component to the index of its interval among `grid_count`
/// equal splits of `[lower, upper]`.
///
/// Components below the lower bound land in interval 0, components at or
/// above the upper bound land in the last interval.
pub fn discretize(v: &BoundedVector, grid_count: usize) -> Result<GridKey> {
    let n = check_grid_count(grid_count)?;
    ensure_finite(v.values())?;
    let scale = n as f64;
    let last = (n - 1) as f64;
    let indices = v
        .values()
        .iter()
        .zip(v.lower().iter().zip(v.upper()))
        .map(|(&x, (&lo, &hi))| ((x - lo) * scale / (hi - lo)).floor().clamp(0.0, last) as u16)
        .collect();
    Ok(GridKey {
        indices,
        grid_count: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lower_bounds_map_to_zero() {
        for n in [2, 5, 10] {
            let v = BoundedVector::new(vec![-3.0, 0.0], vec![-3.0, 0.0], vec![1.0, 9.0]).unwrap();
            assert_eq!(discretize(&v, n).unwrap().indices(), &[0, 0]);
        }
    }

    #[test]
    fn upper_bounds_map_to_last_interval() {
        let v = BoundedVector::new(vec![1.0, 9.0], vec![-3.0, 0.0], vec![1.0, 9.0]).unwrap();
        assert_eq!(discretize(&v, 5).unwrap().indices(), &[4, 4]);
    }

    #[test]
    fn hand_enumerated_intervals() {
        // width 0.4: [-1,-0.6) [-0.6,-0.2) [-0.2,0.2) [0.2,0.6) [0.6,1]
        let v = BoundedVector::uniform(vec![0.3, -0.5], -1.0, 1.0).unwrap();
        assert_eq!(discretize(&v, 5).unwrap().indices(), &[3, 1]);
    }

    #[test]
    fn clamps_out_of_range() {
        let v = BoundedVector::uniform(vec![-7.0, 7.0, 1e300, -1e300], -1.0, 1.0).unwrap();
        assert_eq!(discretize(&v, 5).unwrap().indices(), &[0, 4, 4, 0]);
    }

    #[test]
    fn rejects_non_finite_and_tiny_grids() {
        let v = BoundedVector::uniform(vec![0.0, f64::NAN], -1.0, 1.0).unwrap();
        assert!(matches!(
            discretize(&v, 5),
            Err(Error::NonFinite { index: 1, .. })
        ));
        let ok = BoundedVector::uniform(vec![0.0], -1.0, 1.0).unwrap();
        assert!(discretize(&ok, 1).is_err());
    }

    proptest! {
        #[test]
        fn representative_round_trips(
            idx in proptest::collection::vec(0u16..7, 1..8),
            lo in -50.0f64..50.0,
            width in 0.01f64..100.0,
        ) {
            let key = GridKey::new(idx.clone(), 7).unwrap();
            let lower = vec![lo; idx.len()];
            let upper = vec![lo + width; idx.len()];
            let center = key.representative(&lower, &upper);
            let v = BoundedVector::new(center, lower, upper).unwrap();
            prop_assert_eq!(discretize(&v, 7).unwrap(), key);
        }

        #[test]
        fn indices_always_in_range(x in proptest::collection::vec(-1e6f64..1e6, 1..10), n in 2usize..40) {
            let v = BoundedVector::uniform(x, -3.0, 2.0).unwrap();
            let key = discretize(&v, n).unwrap();
            prop_assert!(key.indices().iter().all(|&i| (i as usize) < n));
        }

        #[test]
        fn separated_components_never_share_a_cell(a in -1.0f64..1.0, gap in 0.0f64..1.0) {
            // more than one interval width apart
            let n = 5;
            let width = 2.0 / n as f64;
            let b = a + width * (1.0 + gap) + 1e-9;
            prop_assume!(b <= 1.0);
            let ka = discretize(&BoundedVector::uniform(vec![a], -1.0, 1.0).unwrap(), n).unwrap();
            let kb = discretize(&BoundedVector::uniform(vec![b], -1.0, 1.0).unwrap(), n).unwrap();
            prop_assert_ne!(ka, kb);
        }
    }
}
