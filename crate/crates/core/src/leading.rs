//! Stage 2 machinery: the tall neighbor table, the inverse leading-node scan,
//! and the centralized mini-center resolution.
//!
//! The scan walks each point's neighbor list in ascending (distance, index)
//! order and stops at the first neighbor that outranks the point under the
//! density total order. Because the list holds the K smallest entries in
//! that same order, any point lexicographically closer than the match was
//! already seen and rejected, so a match is the global nearest outranking
//! point. Points with no match in their list are mini centers and get a full
//! wide-distance row later.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

use crate::distance::DistanceSource;
use crate::error::{Error, Result};
use crate::memory::MemoryMeter;
use crate::model::{outranks, DensityVector, DistanceBlock, KnnTable, ROOT};

/// Neighbor rows for one block window, destined for a [`KnnTable`].
#[derive(Clone, Debug)]
pub struct KnnRows {
    pub row_offset: usize,
    pub m: usize,
    pub ids: Vec<u32>,
    pub dists: Vec<f64>,
}

/// Max-heap entry ordered by (distance, index); the heap keeps the current
/// worst candidate at the top.
struct HeapEntry(f64, u32);

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Selects, for every row of the block, the `k` nearest other points,
/// sorted ascending by (distance, index). The index tiebreak makes the
/// selection deterministic under equal distances.
pub fn knn_from_block(block: &DistanceBlock, k: usize) -> Result<KnnRows> {
    let n = block.n();
    if k == 0 || k >= n {
        return Err(Error::InvalidConfig(format!(
            "k must satisfy 1 <= k < n (k={k}, n={n})"
        )));
    }
    let m = block.m();
    let mut ids = Vec::with_capacity(m * k);
    let mut dists = Vec::with_capacity(m * k);
    let mut heap = BinaryHeap::with_capacity(k + 1);
    for r in 0..m {
        let self_col = block.row_offset() + r;
        heap.clear();
        for (j, &d) in block.row(r).iter().enumerate() {
            if j == self_col {
                continue;
            }
            let entry = HeapEntry(d, j as u32);
            if heap.len() < k {
                heap.push(entry);
            } else if entry < *heap.peek().expect("heap is non-empty") {
                heap.pop();
                heap.push(entry);
            }
        }
        let mut row: Vec<HeapEntry> = heap.drain().collect();
        row.sort_unstable();
        for HeapEntry(d, id) in row {
            ids.push(id);
            dists.push(d);
        }
    }
    Ok(KnnRows {
        row_offset: block.row_offset(),
        m,
        ids,
        dists,
    })
}

/// Points whose neighbor list contained no outranking point. Always contains
/// the global density-order maximum; indices are ascending.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MiniCenterSet {
    pub indices: Vec<usize>,
}

impl MiniCenterSet {
    /// Collects the indices whose `mu` entry is still the sentinel.
    pub fn from_mu(mu: &[i64]) -> Self {
        MiniCenterSet {
            indices: mu
                .iter()
                .enumerate()
                .filter(|(_, &m)| m == ROOT)
                .map(|(i, _)| i)
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Partial leading vectors for one window plus its mini centers.
#[derive(Clone, Debug)]
pub struct ScanOutcome {
    pub row_offset: usize,
    pub mu: Vec<i64>,
    pub delta: Vec<f64>,
    pub mini_centers: Vec<usize>,
}

/// Inverse leading-node scan over one window of the neighbor table: the
/// first outranking neighbor in ascending (distance, index) order supplies
/// (mu, delta); a point with none becomes a mini center and keeps the
/// sentinel.
pub fn scan_leading(
    knn: &KnnTable,
    rho: &DensityVector,
    row_offset: usize,
    m: usize,
) -> ScanOutcome {
    let mut mu = vec![ROOT; m];
    let mut delta = vec![0.0; m];
    let mut mini_centers = Vec::new();
    for r in 0..m {
        let g = row_offset + r;
        let ids = knn.row_ids(g);
        let ds = knn.row_dists(g);
        let mut found = false;
        for (&q, &d) in ids.iter().zip(ds) {
            let q = q as usize;
            if outranks(q, rho.rho[q], g, rho.rho[g]) {
                mu[r] = q as i64;
                delta[r] = d;
                found = true;
                break;
            }
        }
        if !found {
            mini_centers.push(g);
        }
    }
    ScanOutcome {
        row_offset,
        mu,
        delta,
        mini_centers,
    }
}

/// Resolves mini centers with full wide-distance rows, processed centrally
/// in chunks of at most `chunk_rows` rows (the batch budget). For each mini
/// center the nearest outranking point over the whole dataset supplies
/// (mu, delta), ties at equal distance broken by the lower index — the same
/// key the neighbor rows are sorted by, so both paths agree. The density
/// maximum keeps the [`ROOT`] sentinel and takes the maximum of its distance
/// row as delta.
pub fn resolve_minicenters(
    minis: &MiniCenterSet,
    source: &DistanceSource,
    rho: &DensityVector,
    mu: &mut [i64],
    delta: &mut [f64],
    chunk_rows: usize,
    meter: Option<&Arc<MemoryMeter>>,
) -> Result<()> {
    if minis.is_empty() {
        return Err(Error::Internal(
            "mini-center set cannot be empty: it always contains the density maximum".into(),
        ));
    }
    let n = source.n();
    let global_max = rho.argmax();
    let chunk_rows = chunk_rows.max(1);
    for chunk in minis.indices.chunks(chunk_rows) {
        let _lease = meter.map(|m| m.lease((chunk.len() * n) as u64));
        let rows = source.rows_for(chunk)?;
        for (r, &l) in chunk.iter().enumerate() {
            let row = &rows[r * n..(r + 1) * n];
            if l == global_max {
                mu[l] = ROOT;
                delta[l] = row.iter().copied().fold(0.0, f64::max);
                continue;
            }
            let mut best: Option<(f64, usize)> = None;
            for (q, &d) in row.iter().enumerate() {
                if outranks(q, rho.rho[q], l, rho.rho[l]) && best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, q));
                }
            }
            let (d, q) = best.ok_or_else(|| {
                Error::Internal(format!(
                    "mini center {l} has no outranking point but is not the density maximum"
                ))
            })?;
            mu[l] = q as i64;
            delta[l] = d;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::density_segment;
    use crate::model::{DataMatrix, Kernel};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn block_from_rows(rows: Vec<Vec<f64>>) -> DistanceBlock {
        let n = rows[0].len();
        let m = rows.len();
        DistanceBlock::new(0, m, n, rows.concat())
    }

    #[test]
    fn knn_selects_smallest_excluding_self() {
        let block = block_from_rows(vec![vec![0.0, 5.0, 2.0, 9.0]]);
        let rows = knn_from_block(&block, 2).unwrap();
        assert_eq!(rows.ids, vec![2, 1]);
        assert_eq!(rows.dists, vec![2.0, 5.0]);
    }

    #[test]
    fn knn_breaks_distance_ties_by_index() {
        let block = block_from_rows(vec![vec![0.0, 3.0, 3.0]]);
        let rows = knn_from_block(&block, 2).unwrap();
        assert_eq!(rows.ids, vec![1, 2]);
        assert_eq!(rows.dists, vec![3.0, 3.0]);
    }

    #[test]
    fn knn_rejects_k_not_below_n() {
        let block = block_from_rows(vec![vec![0.0, 1.0]]);
        assert!(knn_from_block(&block, 2).is_err());
        assert!(knn_from_block(&block, 0).is_err());
    }

    #[test]
    fn knn_matches_full_sort_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200;
        let data = DataMatrix::new(
            n,
            3,
            (0..n * 3).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let source = DistanceSource::euclidean(data);
        let block = source.block(0, n).unwrap();
        let k = 10;
        let rows = knn_from_block(&block, k).unwrap();
        for i in 0..n {
            let mut all: Vec<(f64, u32)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (block.row(i)[j], j as u32))
                .collect();
            all.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let want_ids: Vec<u32> = all[..k].iter().map(|&(_, j)| j).collect();
            let want_ds: Vec<f64> = all[..k].iter().map(|&(d, _)| d).collect();
            assert_eq!(&rows.ids[i * k..(i + 1) * k], want_ids.as_slice());
            assert_eq!(&rows.dists[i * k..(i + 1) * k], want_ds.as_slice());
        }
    }

    /// Hand-enumerable instance: points 0, 1, 2 on a line with gaussian
    /// densities at d_c = 1; the middle point is densest by symmetry.
    fn line3_scan(k: usize) -> (DensityVector, KnnTable, DistanceSource) {
        let data = DataMatrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let source = DistanceSource::euclidean(data);
        let block = source.block(0, 3).unwrap();
        let rho = DensityVector {
            rho: density_segment(&block, 1.0, Kernel::Gaussian).unwrap(),
            kernel: Kernel::Gaussian,
            dc: 1.0,
        };
        let mut knn = KnnTable::new_empty(3, k);
        let rows = knn_from_block(&block, k).unwrap();
        knn.write_rows(0, &rows.ids, &rows.dists);
        (rho, knn, source)
    }

    #[test]
    fn scan_resolves_line_endpoints_and_flags_middle() {
        let (rho, knn, _) = line3_scan(2);
        let out = scan_leading(&knn, &rho, 0, 3);
        assert_eq!(out.mu, vec![1, ROOT, 1]);
        assert_eq!(out.delta[0], 1.0);
        assert_eq!(out.delta[2], 1.0);
        assert_eq!(out.mini_centers, vec![1]);
    }

    #[test]
    fn equal_densities_fall_back_to_index_order() {
        // Four corners of a square: cutoff kernel with d_c below the side
        // length gives everyone density 0; index 0 outranks all.
        let data = DataMatrix::from_rows(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
        ])
        .unwrap();
        let source = DistanceSource::euclidean(data);
        let block = source.block(0, 4).unwrap();
        let rho = DensityVector {
            rho: density_segment(&block, 0.5, Kernel::Cutoff).unwrap(),
            kernel: Kernel::Cutoff,
            dc: 0.5,
        };
        let mut knn = KnnTable::new_empty(4, 3);
        let rows = knn_from_block(&block, 3).unwrap();
        knn.write_rows(0, &rows.ids, &rows.dists);
        let out = scan_leading(&knn, &rho, 0, 4);
        assert_eq!(out.mini_centers, vec![0]);
        // Every other point takes its nearest lower-index neighbor.
        assert_eq!(out.mu[1], 0);
        assert_eq!(out.mu[2], 0);
        assert_eq!(out.mu[3], 1); // distance ties (1 and 2) broken by index
    }

    #[test]
    fn resolve_line_root_takes_row_maximum() {
        let (rho, knn, source) = line3_scan(2);
        let out = scan_leading(&knn, &rho, 0, 3);
        let mut mu = out.mu.clone();
        let mut delta = out.delta.clone();
        let minis = MiniCenterSet::from_mu(&mu);
        assert_eq!(minis.indices, vec![1]);
        resolve_minicenters(&minis, &source, &rho, &mut mu, &mut delta, 16, None).unwrap();
        assert_eq!(mu, vec![1, ROOT, 1]);
        assert_eq!(delta, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn resolve_single_point_dataset() {
        let data = DataMatrix::from_rows(&[vec![3.0, 4.0]]).unwrap();
        let source = DistanceSource::euclidean(data);
        let rho = DensityVector {
            rho: vec![0.0],
            kernel: Kernel::Gaussian,
            dc: 1.0,
        };
        let mut mu = vec![ROOT];
        let mut delta = vec![0.0];
        let minis = MiniCenterSet { indices: vec![0] };
        resolve_minicenters(&minis, &source, &rho, &mut mu, &mut delta, 4, None).unwrap();
        assert_eq!(mu, vec![ROOT]);
        assert_eq!(delta, vec![0.0]);
    }

    /// Brute-force (mu, delta) over the full distance matrix.
    fn oracle_mu_delta(source: &DistanceSource, rho: &DensityVector) -> (Vec<i64>, Vec<f64>) {
        let n = source.n();
        let full = source.block(0, n).unwrap();
        let mut mu = vec![ROOT; n];
        let mut delta = vec![0.0; n];
        for i in 0..n {
            let row = full.row(i);
            let mut best: Option<(f64, usize)> = None;
            for (j, &d) in row.iter().enumerate() {
                if outranks(j, rho.rho[j], i, rho.rho[i]) && best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, j));
                }
            }
            match best {
                Some((d, j)) => {
                    mu[i] = j as i64;
                    delta[i] = d;
                }
                None => delta[i] = row.iter().copied().fold(0.0, f64::max),
            }
        }
        (mu, delta)
    }

    #[test]
    fn scan_plus_resolve_match_brute_force_even_with_tiny_k() {
        // K = 1 forces many mini centers, exercising the centralized path.
        for seed in 0..8u64 {
            let (data, _) = crate::datagen::gaussian_blobs(120, 3, 2, 6.0, 1.2, seed).unwrap();
            let source = DistanceSource::euclidean(data);
            let n = source.n();
            let block = source.block(0, n).unwrap();
            for kernel in [Kernel::Gaussian, Kernel::Cutoff] {
                let rho = DensityVector {
                    rho: density_segment(&block, 1.0, kernel).unwrap(),
                    kernel,
                    dc: 1.0,
                };
                let (want_mu, want_delta) = oracle_mu_delta(&source, &rho);
                for k in [1usize, 4, 16] {
                    let rows = knn_from_block(&block, k).unwrap();
                    let mut knn = KnnTable::new_empty(n, k);
                    knn.write_rows(0, &rows.ids, &rows.dists);
                    let out = scan_leading(&knn, &rho, 0, n);
                    let mut mu = out.mu.clone();
                    let mut delta = out.delta.clone();
                    let minis = MiniCenterSet::from_mu(&mu);
                    resolve_minicenters(&minis, &source, &rho, &mut mu, &mut delta, 33, None)
                        .unwrap();
                    assert_eq!(mu, want_mu, "seed {seed} k {k} kernel {kernel:?}");
                    assert_eq!(delta, want_delta, "seed {seed} k {k} kernel {kernel:?}");
                }
            }
        }
    }
}
