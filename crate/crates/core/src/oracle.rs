//! Reference density-peaks implementation over the full n x n distance
//! matrix, computed definitionally: per-pair distances, direct density
//! summation, and a full scan for every leading node. No batching, no
//! neighbor tables, no mini centers. This is the ground truth the blocked
//! parallel pipeline is checked against.
//!
//! The shared conventions — the density total order, the root's delta being
//! its maximum row distance, the non-center root fallback — are imported
//! from the model and assignment modules rather than duplicated, so a
//! convention change cannot desynchronize the two paths.

use crate::assign::{assign_labels, center_potential, select_centers};
use crate::distance::DistanceSource;
use crate::error::{Error, Result};
use crate::model::{
    outranks, ClusterCount, ClusterResult, DensityVector, Kernel, LeadingStructure, ROOT,
};

/// Refuse to materialize the full matrix beyond this many points.
pub const ORACLE_MAX_POINTS: usize = 20_000;

#[derive(Clone, Debug)]
pub struct OracleOutput {
    /// Full n x n distance matrix, row-major.
    pub distances: Vec<f64>,
    pub rho: DensityVector,
    pub leading: LeadingStructure,
    pub gamma: Vec<f64>,
    pub result: ClusterResult,
}

/// Runs vanilla density peaks end to end on a small input.
pub fn oracle_dp(
    source: &DistanceSource,
    dc: f64,
    kernel: Kernel,
    clusters: ClusterCount,
) -> Result<OracleOutput> {
    let n = source.n();
    if n == 0 {
        return Err(Error::InvalidInput("dataset is empty".into()));
    }
    if n > ORACLE_MAX_POINTS {
        return Err(Error::Refused(format!(
            "the reference implementation materializes an n x n matrix and is \
             limited to n <= {ORACLE_MAX_POINTS}; got n = {n}"
        )));
    }
    if !(dc.is_finite() && dc > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "cutoff distance must be finite and > 0 (got {dc})"
        )));
    }

    let distances = full_matrix(source);

    // Step 1: local density by direct summation, fixed left-to-right order.
    let mut rho = Vec::with_capacity(n);
    for i in 0..n {
        let row = &distances[i * n..(i + 1) * n];
        let value = match kernel {
            Kernel::Gaussian => {
                let mut sum = 0.0;
                for (j, &d) in row.iter().enumerate() {
                    if j != i {
                        let t = d / dc;
                        sum += (-(t * t)).exp();
                    }
                }
                sum
            }
            Kernel::Cutoff => row
                .iter()
                .enumerate()
                .filter(|&(j, &d)| j != i && d < dc)
                .count() as f64,
        };
        rho.push(value);
    }
    let rho = DensityVector { rho, kernel, dc };

    // Step 2: full scan for the nearest outranking point.
    let mut mu = vec![ROOT; n];
    let mut delta = vec![0.0; n];
    for i in 0..n {
        let row = &distances[i * n..(i + 1) * n];
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
            // The density-order maximum: delta is its largest row distance.
            None => delta[i] = row.iter().copied().fold(0.0, f64::max),
        }
    }
    let leading = LeadingStructure { mu, delta };

    // Step 3: shared center selection and chain rule.
    let gamma = center_potential(&rho, &leading.delta)?;
    let centers = select_centers(&gamma, clusters)?;
    let result = assign_labels(&leading, &rho, &centers, source)?;

    Ok(OracleOutput {
        distances,
        rho,
        leading,
        gamma,
        result,
    })
}

/// Per-pair definitional distances; the diagonal is exactly zero.
fn full_matrix(source: &DistanceSource) -> Vec<f64> {
    let n = source.n();
    let mut out = vec![0.0; n * n];
    match source {
        DistanceSource::Euclidean { data, .. } => {
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        let d2: f64 = data
                            .row(i)
                            .iter()
                            .zip(data.row(j))
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum();
                        out[i * n + j] = d2.sqrt();
                    }
                }
            }
        }
        DistanceSource::Cosine { data, .. } => {
            for i in 0..n {
                let norm_i = data.row(i).iter().map(|a| a * a).sum::<f64>().sqrt();
                for j in 0..n {
                    if i != j {
                        let dot: f64 = data
                            .row(i)
                            .iter()
                            .zip(data.row(j))
                            .map(|(a, b)| a * b)
                            .sum();
                        let norm_j = data.row(j).iter().map(|a| a * a).sum::<f64>().sqrt();
                        out[i * n + j] = (1.0 - dot / (norm_i * norm_j)).clamp(0.0, 2.0);
                    }
                }
            }
        }
        DistanceSource::Precomputed(store) => {
            for i in 0..n {
                out[i * n..(i + 1) * n].copy_from_slice(store.row(i));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DataMatrix;

    #[test]
    fn line_instance_end_to_end() {
        let data = DataMatrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let source = DistanceSource::euclidean(data);
        let out = oracle_dp(&source, 1.0, Kernel::Gaussian, ClusterCount::Explicit(1)).unwrap();
        assert_eq!(out.leading.mu, vec![1, ROOT, 1]);
        assert_eq!(out.leading.delta, vec![1.0, 1.0, 1.0]);
        assert_eq!(out.result.labels, vec![0, 0, 0]);
        assert_eq!(out.result.centers, vec![1]);
    }

    #[test]
    fn single_point_dataset() {
        let data = DataMatrix::from_rows(&[vec![7.0, 7.0]]).unwrap();
        let source = DistanceSource::euclidean(data);
        let out = oracle_dp(&source, 0.5, Kernel::Gaussian, ClusterCount::Explicit(1)).unwrap();
        assert_eq!(out.rho.rho, vec![0.0]);
        assert_eq!(out.leading.mu, vec![ROOT]);
        assert_eq!(out.leading.delta, vec![0.0]);
        assert_eq!(out.result.labels, vec![0]);
    }

    #[test]
    fn refuses_oversized_input() {
        let n = ORACLE_MAX_POINTS + 1;
        let data = DataMatrix::new(n, 1, vec![0.5; n]).unwrap();
        let source = DistanceSource::euclidean(data);
        assert!(matches!(
            oracle_dp(&source, 1.0, Kernel::Gaussian, ClusterCount::Auto),
            Err(Error::Refused(_))
        ));
    }

    #[test]
    fn delta_is_distance_to_mu_and_no_outranking_point_is_closer() {
        let (data, _) = crate::datagen::gaussian_blobs(150, 3, 2, 5.0, 1.0, 21).unwrap();
        let source = DistanceSource::euclidean(data);
        let out = oracle_dp(&source, 0.8, Kernel::Gaussian, ClusterCount::Explicit(3)).unwrap();
        let n = source.n();
        for i in 0..n {
            let m = out.leading.mu[i];
            if m == ROOT {
                continue;
            }
            let row = &out.distances[i * n..(i + 1) * n];
            assert_eq!(row[m as usize], out.leading.delta[i]);
            for (j, &d) in row.iter().enumerate() {
                if outranks(j, out.rho.rho[j], i, out.rho.rho[i]) {
                    assert!(d >= out.leading.delta[i]);
                }
            }
        }
    }
}
