//! Stage 3: center potential, center selection, and chain-rule label
//! propagation.

use crate::distance::DistanceSource;
use crate::error::{Error, Result};
use crate::model::{ClusterCount, ClusterResult, DensityVector, LeadingStructure};

/// Elementwise product gamma = rho * delta; large values flag centers.
pub fn center_potential(rho: &DensityVector, delta: &[f64]) -> Result<Vec<f64>> {
    if rho.n() != delta.len() {
        return Err(Error::Internal(format!(
            "rho has {} entries but delta has {}",
            rho.n(),
            delta.len()
        )));
    }
    Ok(rho.rho.iter().zip(delta).map(|(r, d)| r * d).collect())
}

/// Upper bound on how deep into the sorted potentials the automatic cluster
/// count looks for a ratio gap.
pub const AUTO_C_SEARCH_DEPTH: usize = 50;

/// Picks cluster centers from the potential vector, ordered by descending
/// gamma with ties broken by lower index.
///
/// Explicit mode takes the top C. Auto mode sorts gamma descending and puts
/// the cut at the largest consecutive ratio gamma_(k) / gamma_(k+1) within
/// the first [`AUTO_C_SEARCH_DEPTH`] positions, never choosing fewer than 2
/// clusters. The ratio rule is scale-free: scaling gamma by any positive
/// constant leaves the selection unchanged.
pub fn select_centers(gamma: &[f64], count: ClusterCount) -> Result<Vec<usize>> {
    let n = gamma.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty potential vector".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| gamma[b].total_cmp(&gamma[a]).then(a.cmp(&b)));
    let c = match count {
        ClusterCount::Explicit(c) => {
            if c == 0 || c > n {
                return Err(Error::InvalidConfig(format!(
                    "cluster count must satisfy 1 <= C <= n (C={c}, n={n})"
                )));
            }
            c
        }
        ClusterCount::Auto => {
            if n == 1 {
                1
            } else {
                let mut best_k = 1;
                let mut best_ratio = f64::NEG_INFINITY;
                for k in 1..=(n - 1).min(AUTO_C_SEARCH_DEPTH) {
                    let hi = gamma[order[k - 1]];
                    let lo = gamma[order[k]];
                    let ratio = if lo > 0.0 {
                        hi / lo
                    } else if hi > 0.0 {
                        f64::INFINITY
                    } else {
                        1.0
                    };
                    if ratio > best_ratio {
                        best_ratio = ratio;
                        best_k = k;
                    }
                }
                best_k.max(2).min(n)
            }
        }
    };
    order.truncate(c);
    Ok(order)
}

/// Chain-rule label assignment: centers get their list position as label;
/// every other point, processed in descending density order, copies the
/// label of its leading node, which is always labeled already because it
/// outranks the point. A root that is not itself a center takes the label of
/// its nearest center (ties by lower center position) before propagation.
pub fn assign_labels(
    leading: &LeadingStructure,
    rho: &DensityVector,
    centers: &[usize],
    source: &DistanceSource,
) -> Result<ClusterResult> {
    let n = rho.n();
    if leading.n() != n {
        return Err(Error::Internal("leading structure length mismatch".into()));
    }
    if centers.is_empty() {
        return Err(Error::InvalidConfig("need at least one center".into()));
    }
    let root = leading.root().ok_or_else(|| {
        Error::Internal("mu is incomplete: expected exactly one root sentinel".into())
    })?;

    const UNSET: u32 = u32::MAX;
    let mut labels = vec![UNSET; n];
    for (j, &c) in centers.iter().enumerate() {
        if c >= n {
            return Err(Error::InvalidConfig(format!("center {c} out of range")));
        }
        if labels[c] != UNSET {
            return Err(Error::InvalidConfig(format!("duplicate center {c}")));
        }
        labels[c] = j as u32;
    }

    // Descending density total order; the root comes first.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| rho.rho[b].total_cmp(&rho.rho[a]).then(a.cmp(&b)));

    for &i in &order {
        if labels[i] != UNSET {
            continue;
        }
        if i == root {
            let mut best = centers[0];
            let mut best_d = source.distance(i, centers[0]);
            for &c in &centers[1..] {
                let d = source.distance(i, c);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            labels[i] = labels[best];
            continue;
        }
        let m = leading.mu[i];
        if m < 0 || m as usize >= n {
            return Err(Error::Internal(format!("mu[{i}] = {m} is not resolved")));
        }
        let lead = labels[m as usize];
        if lead == UNSET {
            // Unreachable when mu respects the density order; kept as a hard
            // check because the chain rule silently corrupts labels otherwise.
            return Err(Error::Internal(format!(
                "label propagation read unlabeled leading node {m} for point {i}"
            )));
        }
        labels[i] = lead;
    }

    Ok(ClusterResult {
        centers: centers.to_vec(),
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DataMatrix, Kernel, ROOT};

    fn dv(rho: Vec<f64>) -> DensityVector {
        DensityVector {
            rho,
            kernel: Kernel::Gaussian,
            dc: 1.0,
        }
    }

    #[test]
    fn potential_is_elementwise_product() {
        let gamma = center_potential(&dv(vec![1.0, 2.0]), &[3.0, 0.5]).unwrap();
        assert_eq!(gamma, vec![3.0, 1.0]);
    }

    #[test]
    fn zero_delta_zeroes_potential() {
        let gamma = center_potential(&dv(vec![7.0, 7.0]), &[0.0, 2.0]).unwrap();
        assert_eq!(gamma[0], 0.0);
    }

    #[test]
    fn potential_rejects_length_mismatch() {
        assert!(center_potential(&dv(vec![1.0]), &[1.0, 2.0]).is_err());
    }

    #[test]
    fn top_two_centers_by_potential() {
        assert_eq!(
            select_centers(&[3.0, 1.0, 9.0], ClusterCount::Explicit(2)).unwrap(),
            vec![2, 0]
        );
    }

    #[test]
    fn center_ties_broken_by_index() {
        assert_eq!(
            select_centers(&[5.0, 5.0, 1.0], ClusterCount::Explicit(1)).unwrap(),
            vec![0]
        );
    }

    #[test]
    fn auto_count_picks_largest_ratio_gap() {
        // Consecutive ratios: 100/99, 99/98, 98/1, 1/0.9 — the cut is after
        // the third value.
        let centers = select_centers(&[100.0, 99.0, 98.0, 1.0, 0.9], ClusterCount::Auto).unwrap();
        assert_eq!(centers.len(), 3);
        assert_eq!(centers, vec![0, 1, 2]);
    }

    #[test]
    fn auto_count_never_below_two() {
        let centers = select_centers(&[100.0, 1.0, 0.99, 0.98], ClusterCount::Auto).unwrap();
        assert_eq!(centers.len(), 2);
    }

    #[test]
    fn explicit_count_bounds() {
        assert!(select_centers(&[1.0], ClusterCount::Explicit(2)).is_err());
        assert!(select_centers(&[1.0], ClusterCount::Explicit(0)).is_err());
    }

    #[test]
    fn selection_is_scale_equivariant() {
        let gamma = [0.3, 7.0, 0.1, 6.9, 2.0];
        let scaled: Vec<f64> = gamma.iter().map(|g| g * 1e6).collect();
        for count in [ClusterCount::Explicit(3), ClusterCount::Auto] {
            assert_eq!(
                select_centers(&gamma, count).unwrap(),
                select_centers(&scaled, count).unwrap()
            );
        }
    }

    fn line3() -> (LeadingStructure, DensityVector, DistanceSource) {
        let data = DataMatrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let source = DistanceSource::euclidean(data);
        let leading = LeadingStructure {
            mu: vec![1, ROOT, 1],
            delta: vec![1.0, 1.0, 1.0],
        };
        let e1 = (-1.0f64).exp();
        let e4 = (-4.0f64).exp();
        (leading, dv(vec![e1 + e4, 2.0 * e1, e1 + e4]), source)
    }

    #[test]
    fn single_center_labels_whole_line() {
        let (leading, rho, source) = line3();
        let result = assign_labels(&leading, &rho, &[1], &source).unwrap();
        assert_eq!(result.labels, vec![0, 0, 0]);
    }

    #[test]
    fn two_separated_pairs_take_their_centers_label() {
        let data = DataMatrix::from_rows(&[
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![10.0, 0.0],
            vec![10.0, 1.0],
        ])
        .unwrap();
        let source = DistanceSource::euclidean(data);
        // Equal densities: index order makes 0 the root, 2 leads 3.
        let rho = dv(vec![1.0, 1.0, 1.0, 1.0]);
        let leading = LeadingStructure {
            mu: vec![ROOT, 0, 0, 2],
            delta: vec![10.0, 1.0, 10.0, 1.0],
        };
        let result = assign_labels(&leading, &rho, &[0, 2], &source).unwrap();
        assert_eq!(result.labels, vec![0, 0, 1, 1]);
    }

    #[test]
    fn every_point_a_center_yields_identity_of_positions() {
        let (leading, rho, source) = line3();
        let result = assign_labels(&leading, &rho, &[2, 0, 1], &source).unwrap();
        assert_eq!(result.labels, vec![1, 2, 0]);
        for (j, &c) in result.centers.iter().enumerate() {
            assert_eq!(result.labels[c] as usize, j);
        }
    }

    #[test]
    fn non_center_root_falls_back_to_nearest_center() {
        let (leading, rho, source) = line3();
        // Root is point 1; centers at 0 and 2 are equidistant, so the tie
        // goes to the earlier center position (label 0 at point 0).
        let result = assign_labels(&leading, &rho, &[0, 2], &source).unwrap();
        assert_eq!(result.labels[1], 0);
        assert_eq!(result.labels, vec![0, 0, 1]);
    }

    #[test]
    fn incomplete_mu_is_an_internal_error() {
        let (mut leading, rho, source) = line3();
        leading.mu[0] = ROOT; // two sentinels
        assert!(matches!(
            assign_labels(&leading, &rho, &[1], &source),
            Err(Error::Internal(_))
        ));
    }

    #[test]
    fn duplicate_centers_rejected() {
        let (leading, rho, source) = line3();
        assert!(assign_labels(&leading, &rho, &[1, 1], &source).is_err());
    }
}
