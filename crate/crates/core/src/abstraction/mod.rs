//! Grid-based abstraction of concrete vectors.
//!
//! A [`BoundedVector`] carries per-dimension bounds; [`discretize`] maps it to
//! a [`GridKey`] by splitting every dimension into `N` equal intervals.
//! High-dimensional inputs can first be reduced with a fixed
//! [`ProjectionMatrix`]. [`extract_pattern`] groups the last `m` grid keys of
//! an episode into a [`PatternKey`], the unit the episodic memory is keyed on.

mod grid;
mod pattern;
mod projection;

pub use grid::{discretize, GridKey};
pub use pattern::{encode_key, extract_pattern, KeyCodeHasher, PatternKey};
pub use projection::{build_projection, project, ProjectionMatrix};

use crate::error::{Error, Result};

/// A numeric vector together with the box it is expected to live in.
///
/// Values are allowed to leave `[lower, upper]`; discretization clamps them.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedVector {
    values: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoundedVector {
    pub fn new(values: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: values.len(),
                got: lower.len(),
            });
        }
        if upper.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: values.len(),
                got: upper.len(),
            });
        }
        for (m, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidArgument(format!(
                    "dimension {m}: bounds [{lo}, {hi}] must be finite with lower < upper"
                )));
            }
        }
        Ok(Self {
            values,
            lower,
            upper,
        })
    }

    /// Same `[lower, upper]` on every dimension.
    pub fn uniform(values: Vec<f64>, lower: f64, upper: f64) -> Result<Self> {
        let k = values.len();
        Self::new(values, vec![lower; k], vec![upper; k])
    }

    pub fn empty() -> Self {
        Self {
            values: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Replaces the values, keeping the bounds.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::DimensionMismatch {
                expected: self.values.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            values,
            lower: self.lower.clone(),
            upper: self.upper.clone(),
        })
    }
}

/// Concatenates a state and an action, state first.
pub fn concat_state_action(state: &BoundedVector, action: &BoundedVector) -> BoundedVector {
    let join = |a: &[f64], b: &[f64]| a.iter().chain(b).copied().collect::<Vec<_>>();
    BoundedVector {
        values: join(&state.values, &action.values),
        lower: join(&state.lower, &action.lower),
        upper: join(&state.upper, &action.upper),
    }
}
