//! Shared domain types: the data matrix, distance blocks, neighbor tables,
//! density vectors, the density total order, and the run configuration.

use serde::Serialize;

use crate::error::{Error, Result};

/// Sentinel stored in a `mu` vector for points whose leading node is not (or
/// not yet) assigned. After mini-center resolution exactly one entry keeps
/// this value: the densest point of the dataset, the root of the leading
/// forest. Serialized as -1.
pub const ROOT: i64 = -1;

/// Default seed used by generators and the cutoff-distance estimator when the
/// caller does not supply one.
pub const DEFAULT_SEED: u64 = 42;

/// Density kernel used when turning distances into local densities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    /// rho_i = sum_{j != i} exp(-(d_ij / d_c)^2); real-valued.
    Gaussian,
    /// rho_i = |{ j != i : d_ij < d_c }|; integer-valued.
    Cutoff,
}

/// How the cutoff distance d_c is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DcMode {
    /// Use this value directly.
    Explicit(f64),
    /// Estimate d_c as this percentile of sampled pairwise distances.
    Percentile(f64),
}

/// How the number of clusters C is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterCount {
    Explicit(usize),
    /// Pick C at the largest consecutive ratio gap of the sorted center
    /// potentials (minimum 2).
    Auto,
}

/// Full configuration of a clustering run.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub kernel: Kernel,
    pub dc: DcMode,
    /// Neighbors per point in the tall neighbor table.
    pub k: usize,
    /// Rows per distance block; bounds transient memory by batch_size * n.
    pub batch_size: usize,
    /// Worker count; `None` means available hardware parallelism capped at
    /// the number of batches.
    pub workers: Option<usize>,
    pub clusters: ClusterCount,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            kernel: Kernel::Gaussian,
            dc: DcMode::Percentile(2.0),
            k: 16,
            batch_size: 1024,
            workers: None,
            clusters: ClusterCount::Auto,
            seed: DEFAULT_SEED,
        }
    }
}

impl RunConfig {
    /// Checks the configuration against a dataset of `n` points.
    pub fn validate(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::InvalidInput("dataset is empty".into()));
        }
        if self.k == 0 || self.k >= n {
            return Err(Error::InvalidConfig(format!(
                "k must satisfy 1 <= k < n (k={}, n={n})",
                self.k
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be >= 1".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidConfig("worker count must be >= 1".into()));
        }
        match self.dc {
            DcMode::Explicit(v) => {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "cutoff distance must be finite and > 0 (got {v})"
                    )));
                }
            }
            DcMode::Percentile(p) => {
                if !(p.is_finite() && p > 0.0 && p < 100.0) {
                    return Err(Error::InvalidConfig(format!(
                        "dc percentile must lie in (0, 100) (got {p})"
                    )));
                }
            }
        }
        if let ClusterCount::Explicit(c) = self.clusters {
            if c == 0 || c > n {
                return Err(Error::InvalidConfig(format!(
                    "cluster count must satisfy 1 <= C <= n (C={c}, n={n})"
                )));
            }
        }
        Ok(())
    }
}

/// Dense row-major sample matrix (n points, d dimensions).
///
/// All values are finite; n >= 1 and d >= 1.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn new(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidInput(format!(
                "data matrix must have n >= 1 and d >= 1 (got {n} x {d})"
            )));
        }
        if values.len() != n * d {
            return Err(Error::InvalidInput(format!(
                "expected {} values for a {n} x {d} matrix, got {}",
                n * d,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite value at row {}, column {}",
                pos / d,
                pos % d
            )));
        }
        Ok(DataMatrix { n, d, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidInput("ragged rows in data matrix".into()));
        }
        DataMatrix::new(n, d, rows.concat())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// One wide distance block: distances from `m` consecutive rows (starting at
/// `row_offset`) to all `n` points. The only quadratic-shaped object in the
/// pipeline, and its lifetime is one batch.
#[derive(Clone, Debug)]
pub struct DistanceBlock {
    row_offset: usize,
    m: usize,
    n: usize,
    entries: Vec<f64>,
}

impl DistanceBlock {
    pub fn new(row_offset: usize, m: usize, n: usize, entries: Vec<f64>) -> Self {
        debug_assert_eq!(entries.len(), m * n);
        debug_assert!(row_offset + m <= n);
        DistanceBlock {
            row_offset,
            m,
            n,
            entries,
        }
    }

    #[inline]
    pub fn row_offset(&self) -> usize {
        self.row_offset
    }

    /// Rows in this block.
    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Total points (columns).
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Distances from block row `r` (global row `row_offset + r`) to all points.
    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.entries[r * self.n..(r + 1) * self.n]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

/// Tall neighbor table: for every point, its `k` nearest neighbors (global
/// indices and distances), each row sorted ascending by (distance, index) and
/// never containing the point itself.
#[derive(Clone, Debug, PartialEq)]
pub struct KnnTable {
    n: usize,
    k: usize,
    ids: Vec<u32>,
    dists: Vec<f64>,
}

impl KnnTable {
    pub fn new_empty(n: usize, k: usize) -> Self {
        KnnTable {
            n,
            k,
            ids: vec![0; n * k],
            dists: vec![0.0; n * k],
        }
    }

    /// Writes rows for the window starting at global row `offset`.
    pub fn write_rows(&mut self, offset: usize, ids: &[u32], dists: &[f64]) {
        debug_assert_eq!(ids.len(), dists.len());
        debug_assert!(ids.len().is_multiple_of(self.k));
        let start = offset * self.k;
        self.ids[start..start + ids.len()].copy_from_slice(ids);
        self.dists[start..start + dists.len()].copy_from_slice(dists);
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn row_ids(&self, i: usize) -> &[u32] {
        &self.ids[i * self.k..(i + 1) * self.k]
    }

    #[inline]
    pub fn row_dists(&self, i: usize) -> &[f64] {
        &self.dists[i * self.k..(i + 1) * self.k]
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn dists(&self) -> &[f64] {
        &self.dists
    }
}

/// Local densities of all points together with the kernel and cutoff distance
/// that produced them. Under the cutoff kernel every entry is an exactly
/// represented non-negative integer.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityVector {
    pub rho: Vec<f64>,
    pub kernel: Kernel,
    pub dc: f64,
}

impl DensityVector {
    #[inline]
    pub fn n(&self) -> usize {
        self.rho.len()
    }

    /// Density total order between points `i` and `j`.
    #[inline]
    pub fn outranks(&self, i: usize, j: usize) -> bool {
        outranks(i, self.rho[i], j, self.rho[j])
    }

    /// The unique maximum point under the density total order.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for i in 1..self.rho.len() {
            if outranks(i, self.rho[i], best, self.rho[best]) {
                best = i;
            }
        }
        best
    }
}

/// The density total order: `i` outranks `j` iff rho_i > rho_j, with exact
/// ties broken in favor of the smaller index. Ties are systematic under the
/// cutoff kernel (integer densities); without a total order the leading
/// forest could contain cycles and parallel runs could diverge from
/// sequential ones.
#[inline]
pub fn outranks(i: usize, rho_i: f64, j: usize, rho_j: f64) -> bool {
    rho_i > rho_j || (rho_i == rho_j && i < j)
}

/// Leading structure: for every point, the nearest point that outranks it
/// (`mu`, with [`ROOT`] marking the global density maximum) and the distance
/// to that point (`delta`). Following `mu` from any point reaches the root.
#[derive(Clone, Debug, PartialEq)]
pub struct LeadingStructure {
    pub mu: Vec<i64>,
    pub delta: Vec<f64>,
}

impl LeadingStructure {
    #[inline]
    pub fn n(&self) -> usize {
        self.mu.len()
    }

    /// Index of the root, if exactly one entry is [`ROOT`].
    pub fn root(&self) -> Option<usize> {
        let mut it = self.mu.iter().enumerate().filter(|(_, &m)| m == ROOT);
        match (it.next(), it.next()) {
            (Some((i, _)), None) => Some(i),
            _ => None,
        }
    }

    /// Checks completeness and the tree invariants against a density vector:
    /// exactly one root (the density-order maximum), every other entry a
    /// valid index that outranks its point. Together these rule out cycles.
    pub fn validate(&self, rho: &DensityVector) -> Result<()> {
        let n = self.n();
        if rho.n() != n || self.delta.len() != n {
            return Err(Error::Internal("leading structure length mismatch".into()));
        }
        let root = self.root().ok_or_else(|| {
            Error::Internal("leading structure must have exactly one root".into())
        })?;
        if root != rho.argmax() {
            return Err(Error::Internal(
                "root is not the density-order maximum".into(),
            ));
        }
        for (i, &m) in self.mu.iter().enumerate() {
            if i == root {
                continue;
            }
            if m < 0 || m as usize >= n {
                return Err(Error::Internal(format!("mu[{i}] = {m} out of range")));
            }
            if !rho.outranks(m as usize, i) {
                return Err(Error::Internal(format!(
                    "mu[{i}] = {m} does not outrank its point"
                )));
            }
            if !(self.delta[i].is_finite() && self.delta[i] >= 0.0) {
                return Err(Error::Internal(format!(
                    "delta[{i}] = {} invalid",
                    self.delta[i]
                )));
            }
        }
        Ok(())
    }
}

/// Final clustering: ordered center indices and a label per point in
/// `[0, centers.len())`, with `labels[centers[j]] == j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterResult {
    pub centers: Vec<usize>,
    pub labels: Vec<u32>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outranks_strict_density_dominance() {
        assert!(outranks(3, 2.0, 7, 1.0));
    }

    #[test]
    fn outranks_tie_broken_by_lower_index() {
        assert!(outranks(3, 1.0, 7, 1.0));
    }

    #[test]
    fn outranks_tie_rule_is_antisymmetric() {
        assert!(!outranks(7, 1.0, 3, 1.0));
    }

    #[test]
    fn density_argmax_uses_total_order() {
        let dv = DensityVector {
            rho: vec![2.0, 5.0, 5.0, 1.0],
            kernel: Kernel::Cutoff,
            dc: 1.0,
        };
        assert_eq!(dv.argmax(), 1);
    }

    #[test]
    fn config_validation_bounds() {
        let mut cfg = RunConfig::default();
        assert!(cfg.validate(100).is_ok());
        assert!(cfg.validate(16).is_err()); // k = 16 not < n
        cfg.k = 0;
        assert!(cfg.validate(100).is_err());
        cfg.k = 4;
        cfg.dc = DcMode::Explicit(0.0);
        assert!(cfg.validate(100).is_err());
        cfg.dc = DcMode::Percentile(100.0);
        assert!(cfg.validate(100).is_err());
        cfg.dc = DcMode::Percentile(2.0);
        cfg.clusters = ClusterCount::Explicit(0);
        assert!(cfg.validate(100).is_err());
        cfg.clusters = ClusterCount::Explicit(101);
        assert!(cfg.validate(100).is_err());
    }

    #[test]
    fn data_matrix_rejects_non_finite() {
        assert!(DataMatrix::new(1, 2, vec![0.0, f64::NAN]).is_err());
        assert!(DataMatrix::new(0, 2, vec![]).is_err());
        assert!(DataMatrix::new(2, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn leading_structure_root_detection() {
        let ls = LeadingStructure {
            mu: vec![1, ROOT, 1],
            delta: vec![1.0, 1.0, 1.0],
        };
        assert_eq!(ls.root(), Some(1));
        let incomplete = LeadingStructure {
            mu: vec![ROOT, ROOT, 1],
            delta: vec![0.0; 3],
        };
        assert_eq!(incomplete.root(), None);
    }
}
