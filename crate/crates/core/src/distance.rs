//! Wide distance blocks between a batch of rows and the full dataset.
//!
//! Euclidean blocks use the expanded form |p|^2 + |x|^2 - 2 p.x with the
//! result clamped at zero before the square root; cosine blocks use
//! 1 - p.x / (|p| |x|). Self-distances are written as exact zeros by index,
//! never trusted to floating point. A precomputed n x n store serves the
//! non-Euclidean path (graph or metric data entering via distances).
//!
//! Every entry depends only on the point pair, not on the batch shape, so
//! the same pair yields the same bits no matter which block it lands in.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{DataMatrix, DistanceBlock};

/// Points above this count skip the full symmetry scan of a precomputed
/// store and are spot-checked by seeded random sampling instead.
pub const FULL_VALIDATION_LIMIT: usize = 2048;
const SPOT_CHECK_PAIRS: usize = 20_000;

/// A validated full n x n distance matrix, read by row ranges.
#[derive(Clone, Debug)]
pub struct PrecomputedMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl PrecomputedMatrix {
    /// Validates and wraps a row-major n x n distance matrix: finite
    /// non-negative entries, zero diagonal, symmetric. Symmetry is checked
    /// exhaustively for small n and by random sampling above
    /// [`FULL_VALIDATION_LIMIT`].
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("distance store is empty".into()));
        }
        if entries.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {n} x {n} distance store, got {}",
                n * n,
                entries.len()
            )));
        }
        if let Some(pos) = entries.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "distance store entry ({}, {}) is {}",
                pos / n,
                pos % n,
                entries[pos]
            )));
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "distance store diagonal entry ({i}, {i}) is {}, expected 0",
                    entries[i * n + i]
                )));
            }
        }
        let check = |i: usize, j: usize| -> Result<()> {
            if entries[i * n + j] != entries[j * n + i] {
                return Err(Error::InvalidInput(format!(
                    "distance store is asymmetric at ({i}, {j}): {} vs {}",
                    entries[i * n + j],
                    entries[j * n + i]
                )));
            }
            Ok(())
        };
        if n <= FULL_VALIDATION_LIMIT {
            for i in 0..n {
                for j in (i + 1)..n {
                    check(i, j)?;
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5fdd);
            for _ in 0..SPOT_CHECK_PAIRS {
                let i = rng.random_range(0..n);
                let j = rng.random_range(0..n);
                check(i, j)?;
            }
        }
        Ok(PrecomputedMatrix { n, entries })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }
}

/// Where distances come from: computed on the fly from a data matrix
/// (Euclidean or cosine) or served from a precomputed store.
#[derive(Clone, Debug)]
pub enum DistanceSource {
    Euclidean {
        data: DataMatrix,
        /// Cached squared row norms.
        sq_norms: Vec<f64>,
    },
    Cosine {
        data: DataMatrix,
        /// Cached row norms, all strictly positive.
        norms: Vec<f64>,
    },
    Precomputed(PrecomputedMatrix),
}

impl DistanceSource {
    pub fn euclidean(data: DataMatrix) -> Self {
        let sq_norms = (0..data.n())
            .map(|i| dot(data.row(i), data.row(i)))
            .collect();
        DistanceSource::Euclidean { data, sq_norms }
    }

    /// Fails if any row has zero norm (cosine distance undefined).
    pub fn cosine(data: DataMatrix) -> Result<Self> {
        let mut norms = Vec::with_capacity(data.n());
        for i in 0..data.n() {
            let norm = dot(data.row(i), data.row(i)).sqrt();
            if norm == 0.0 {
                return Err(Error::InvalidInput(format!(
                    "row {i} has zero norm; cosine distance is undefined"
                )));
            }
            norms.push(norm);
        }
        Ok(DistanceSource::Cosine { data, norms })
    }

    pub fn precomputed(store: PrecomputedMatrix) -> Self {
        DistanceSource::Precomputed(store)
    }

    pub fn n(&self) -> usize {
        match self {
            DistanceSource::Euclidean { data, .. } | DistanceSource::Cosine { data, .. } => {
                data.n()
            }
            DistanceSource::Precomputed(store) => store.n(),
        }
    }

    /// Feature dimensionality, when backed by a data matrix.
    pub fn dims(&self) -> Option<usize> {
        match self {
            DistanceSource::Euclidean { data, .. } | DistanceSource::Cosine { data, .. } => {
                Some(data.d())
            }
            DistanceSource::Precomputed(_) => None,
        }
    }

    pub fn metric_name(&self) -> &'static str {
        match self {
            DistanceSource::Euclidean { .. } => "euclidean",
            DistanceSource::Cosine { .. } => "cosine",
            DistanceSource::Precomputed(_) => "precomputed",
        }
    }

    /// Computes the wide distance block for `m` consecutive rows starting at
    /// `row_offset`.
    pub fn block(&self, row_offset: usize, m: usize) -> Result<DistanceBlock> {
        let n = self.n();
        if row_offset + m > n || m == 0 {
            return Err(Error::WindowOutOfRange {
                offset: row_offset,
                m,
                n,
            });
        }
        let mut entries = vec![0.0; m * n];
        for r in 0..m {
            let g = row_offset + r;
            self.fill_row(&mut entries[r * n..(r + 1) * n], g);
        }
        Ok(DistanceBlock::new(row_offset, m, n, entries))
    }

    /// Computes distance rows for an arbitrary (not necessarily contiguous)
    /// set of global indices; returns a row-major `indices.len() x n` buffer.
    /// Used for the centralized mini-center pass.
    pub fn rows_for(&self, indices: &[usize]) -> Result<Vec<f64>> {
        let n = self.n();
        let mut out = vec![0.0; indices.len() * n];
        for (r, &g) in indices.iter().enumerate() {
            if g >= n {
                return Err(Error::WindowOutOfRange { offset: g, m: 1, n });
            }
            self.fill_row(&mut out[r * n..(r + 1) * n], g);
        }
        Ok(out)
    }

    /// Distance between two points, bit-identical to the same pair's entry
    /// in any block produced by this source.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        match self {
            DistanceSource::Euclidean { data, sq_norms } => {
                euclid_entry(sq_norms[i], sq_norms[j], dot(data.row(i), data.row(j)))
            }
            DistanceSource::Cosine { data, norms } => {
                cosine_entry(dot(data.row(i), data.row(j)), norms[i], norms[j])
            }
            DistanceSource::Precomputed(store) => store.row(i)[j],
        }
    }

    fn fill_row(&self, out: &mut [f64], g: usize) {
        match self {
            DistanceSource::Euclidean { data, sq_norms } => {
                let p = data.row(g);
                let sq_p = sq_norms[g];
                for (j, slot) in out.iter_mut().enumerate() {
                    *slot = euclid_entry(sq_p, sq_norms[j], dot(p, data.row(j)));
                }
                out[g] = 0.0;
            }
            DistanceSource::Cosine { data, norms } => {
                let p = data.row(g);
                let norm_p = norms[g];
                for (j, slot) in out.iter_mut().enumerate() {
                    *slot = cosine_entry(dot(p, data.row(j)), norm_p, norms[j]);
                }
                out[g] = 0.0;
            }
            DistanceSource::Precomputed(store) => out.copy_from_slice(store.row(g)),
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Expanded-form Euclidean distance. Near-duplicate points can push the
/// radicand a few ulps below zero; clamp before the square root so no NaN is
/// ever produced.
#[inline]
fn euclid_entry(sq_i: f64, sq_j: f64, dot_ij: f64) -> f64 {
    let v = sq_i + sq_j - 2.0 * dot_ij;
    if v > 0.0 {
        v.sqrt()
    } else {
        0.0
    }
}

/// Cosine distance 1 - cos(p, x), clamped to its mathematical range [0, 2].
#[inline]
fn cosine_entry(dot_ij: f64, norm_i: f64, norm_j: f64) -> f64 {
    (1.0 - dot_ij / (norm_i * norm_j)).clamp(0.0, 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, d: usize, seed: u64) -> DataMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..n * d).map(|_| rng.random_range(-3.0..3.0)).collect();
        DataMatrix::new(n, d, values).unwrap()
    }

    /// Brute-force per-pair Euclidean distance, the independent oracle for
    /// the expanded matrix form.
    fn naive_euclid(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    fn naive_cosine(a: &[f64], b: &[f64]) -> f64 {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        1.0 - dot / (na * nb)
    }

    #[test]
    fn euclidean_pythagorean_triple() {
        let data = DataMatrix::from_rows(&[vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        let source = DistanceSource::euclidean(data);
        let block = source.block(0, 1).unwrap();
        assert_eq!(block.row(0), &[0.0, 5.0]);
    }

    #[test]
    fn euclidean_single_point_self_distance() {
        let data = DataMatrix::from_rows(&[vec![1.5, -2.0, 7.0]]).unwrap();
        let source = DistanceSource::euclidean(data);
        let block = source.block(0, 1).unwrap();
        assert_eq!(block.row(0), &[0.0]);
    }

    #[test]
    fn euclidean_matches_per_pair_oracle() {
        let data = random_matrix(100, 5, 11);
        let source = DistanceSource::euclidean(data.clone());
        let block = source.block(0, 100).unwrap();
        for i in 0..100 {
            for j in 0..100 {
                let expected = if i == j {
                    0.0
                } else {
                    naive_euclid(data.row(i), data.row(j))
                };
                assert!(
                    (block.row(i)[j] - expected).abs() <= 1e-9,
                    "mismatch at ({i}, {j}): {} vs {expected}",
                    block.row(i)[j]
                );
            }
        }
    }

    #[test]
    fn euclidean_block_stitching_equals_full_matrix() {
        let n = 137;
        let data = random_matrix(n, 4, 23);
        let source = DistanceSource::euclidean(data.clone());
        let full = source.block(0, n).unwrap();
        let mut offset = 0;
        for m in [1usize, 10, 30, 96] {
            let block = source.block(offset, m).unwrap();
            for r in 0..m {
                assert_eq!(block.row(r), full.row(offset + r));
            }
            offset += m;
        }
        assert_eq!(offset, n);
    }

    #[test]
    fn euclidean_blocks_are_symmetric() {
        let data = random_matrix(60, 3, 7);
        let source = DistanceSource::euclidean(data);
        let full = source.block(0, 60).unwrap();
        for i in 0..60 {
            for j in 0..60 {
                assert!((full.row(i)[j] - full.row(j)[i]).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn euclidean_duplicates_never_produce_nan() {
        let row = vec![0.123456789, -9.87654321, 3.3333333333];
        let data = DataMatrix::from_rows(&[row.clone(), row.clone(), row]).unwrap();
        let source = DistanceSource::euclidean(data);
        let block = source.block(0, 3).unwrap();
        for v in block.entries() {
            assert!(v.is_finite() && *v >= 0.0);
        }
    }

    #[test]
    fn euclidean_window_out_of_range() {
        let data = random_matrix(10, 2, 1);
        let source = DistanceSource::euclidean(data);
        assert!(matches!(
            source.block(8, 3),
            Err(Error::WindowOutOfRange { .. })
        ));
    }

    #[test]
    fn cosine_orthogonal_vectors() {
        let data = DataMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let source = DistanceSource::cosine(data).unwrap();
        let block = source.block(0, 1).unwrap();
        assert_eq!(block.row(0), &[0.0, 1.0]);
    }

    #[test]
    fn cosine_is_scale_invariant() {
        let data = DataMatrix::from_rows(&[vec![2.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let source = DistanceSource::cosine(data).unwrap();
        let block = source.block(0, 2).unwrap();
        assert_eq!(block.row(0), &[0.0, 0.0]);
        assert_eq!(block.row(1), &[0.0, 0.0]);
    }

    #[test]
    fn cosine_matches_per_pair_oracle() {
        let data = random_matrix(100, 8, 31);
        let source = DistanceSource::cosine(data.clone()).unwrap();
        let block = source.block(0, 100).unwrap();
        for i in 0..100 {
            for j in 0..100 {
                let expected = if i == j {
                    0.0
                } else {
                    naive_cosine(data.row(i), data.row(j))
                };
                assert!((block.row(i)[j] - expected).abs() <= 1e-9);
                assert!(block.row(i)[j] >= 0.0 && block.row(i)[j] <= 2.0);
            }
        }
    }

    #[test]
    fn cosine_rejects_zero_norm_row_naming_it() {
        let data = DataMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let err = DistanceSource::cosine(data).unwrap_err();
        assert!(err.to_string().contains("row 1"));
    }

    #[test]
    fn precomputed_row_extraction() {
        let store =
            PrecomputedMatrix::new(3, vec![0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0]).unwrap();
        let source = DistanceSource::precomputed(store);
        let block = source.block(1, 1).unwrap();
        assert_eq!(block.row(0), &[1.0, 0.0, 1.0]);
        let full = source.block(0, 3).unwrap();
        assert_eq!(full.entries().len(), 9);
        assert!(matches!(
            source.block(2, 2),
            Err(Error::WindowOutOfRange { .. })
        ));
    }

    #[test]
    fn precomputed_rejects_asymmetry_and_bad_diagonal() {
        let asym = PrecomputedMatrix::new(2, vec![0.0, 1.0, 2.0, 0.0]);
        assert!(asym.is_err());
        let diag = PrecomputedMatrix::new(2, vec![0.5, 1.0, 1.0, 0.0]);
        assert!(diag.is_err());
        let neg = PrecomputedMatrix::new(2, vec![0.0, -1.0, -1.0, 0.0]);
        assert!(neg.is_err());
    }

    #[test]
    fn large_store_spot_check_catches_broad_asymmetry() {
        let n = FULL_VALIDATION_LIMIT + 5;
        // Symmetric base: d(i, j) = |i - j| scaled down.
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = (i as f64 - j as f64).abs() * 1e-3;
            }
        }
        assert!(PrecomputedMatrix::new(n, entries.clone()).is_ok());
        // Tilt the whole upper triangle; sampling must trip over it.
        for i in 0..n {
            for j in (i + 1)..n {
                entries[i * n + j] += 1.0;
            }
        }
        assert!(PrecomputedMatrix::new(n, entries).is_err());
    }

    #[test]
    fn pair_distance_matches_block_entry_bitwise() {
        let data = random_matrix(40, 6, 5);
        let source = DistanceSource::euclidean(data);
        let block = source.block(0, 40).unwrap();
        for i in 0..40 {
            for j in 0..40 {
                assert_eq!(source.distance(i, j).to_bits(), block.row(i)[j].to_bits());
            }
        }
    }

    #[test]
    fn rows_for_matches_contiguous_blocks() {
        let data = random_matrix(50, 3, 77);
        let source = DistanceSource::euclidean(data);
        let full = source.block(0, 50).unwrap();
        let picked = [3usize, 17, 44];
        let rows = source.rows_for(&picked).unwrap();
        for (r, &g) in picked.iter().enumerate() {
            assert_eq!(&rows[r * 50..(r + 1) * 50], full.row(g));
        }
    }
}
