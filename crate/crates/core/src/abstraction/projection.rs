use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Fixed random linear map used to shrink high-dimensional inputs before
/// discretization. Entries are standard-normal draws clipped to `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix {
    rows: usize,
    cols: usize,
    seed: u64,
    // row-major, rows x cols
    entries: Vec<f64>,
}

impl ProjectionMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

pub fn build_projection(seed: u64, in_dim: usize, out_dim: usize) -> Result<ProjectionMatrix> {
    if in_dim == 0 || out_dim == 0 {
        return Err(Error::InvalidArgument(format!(
            "projection shape ({in_dim}, {out_dim}) must be positive"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..in_dim * out_dim)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z.clamp(-1.0, 1.0)
        })
        .collect();
    Ok(ProjectionMatrix {
        rows: in_dim,
        cols: out_dim,
        seed,
        entries,
    })
}

/// `out[j] = sum_i v[i] * P[i][j]`.
pub fn project(v: &[f64], matrix: &ProjectionMatrix) -> Result<Vec<f64>> {
    if v.len() != matrix.rows {
        return Err(Error::DimensionMismatch {
            expected: matrix.rows,
            got: v.len(),
        });
    }
    let mut out = vec![0.0; matrix.cols];
    for (i, &x) in v.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (o, &p) in out.iter_mut().zip(matrix.row(i)) {
            *o += x * p;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn humanoid_shape_in_range() {
        let p = build_projection(7, 376, 24).unwrap();
        assert_eq!((p.rows(), p.cols()), (376, 24));
        assert_eq!(p.entries().len(), 376 * 24);
        assert!(p.entries().iter().all(|e| (-1.0..=1.0).contains(e)));
        // clipping is visible: a standard normal exceeds 1 in ~32% of draws
        let clipped = p.entries().iter().filter(|e| e.abs() == 1.0).count();
        assert!(clipped > 2000 && clipped < 3800, "clipped = {clipped}");
    }

    #[test]
    fn deterministic_per_seed() {
        let a = build_projection(7, 40, 24).unwrap();
        let b = build_projection(7, 40, 24).unwrap();
        let c = build_projection(8, 40, 24).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.entries(), c.entries());
    }

    #[test]
    fn zero_and_basis_vectors() {
        let p = build_projection(7, 4, 4).unwrap();
        assert_eq!(project(&[0.0; 4], &p).unwrap(), vec![0.0; 4]);
        let big = build_projection(7, 376, 24).unwrap();
        assert_eq!(project(&vec![0.0; 376], &big).unwrap(), vec![0.0; 24]);
        for i in 0..376 {
            let mut e = vec![0.0; 376];
            e[i] = 1.0;
            assert_eq!(project(&e, &big).unwrap(), big.row(i));
        }
    }

    #[test]
    fn matches_naive_double_loop() {
        let p = build_projection(7, 376, 24).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let v: Vec<f64> = (0..376).map(|_| rng.random_range(-10.0..10.0)).collect();
            let fast = project(&v, &p).unwrap();
            for j in 0..24 {
                let mut acc = 0.0;
                for i in 0..376 {
                    acc += v[i] * p.entry(i, j);
                }
                assert!((acc - fast[j]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(build_projection(1, 0, 3).is_err());
        let p = build_projection(1, 3, 2).unwrap();
        assert!(matches!(
            project(&[1.0, 2.0], &p),
            Err(Error::DimensionMismatch {
                expected: 3,
                got: 2
            })
        ));
    }
}
