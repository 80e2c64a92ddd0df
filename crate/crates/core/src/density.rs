//! Local-density segments from distance blocks (pipeline stage 1) and the
//! percentile estimator for the cutoff distance d_c.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::distance::DistanceSource;
use crate::error::{Error, Result};
use crate::model::{DistanceBlock, Kernel};

/// Computes the density segment for one distance block.
///
/// Gaussian: rho = sum_j exp(-(d_j / d_c)^2) - 1, the subtraction removing
/// the self term whose distance is an exact zero. Cutoff: the count of
/// other points with d < d_c, excluding the self column by index (so exact
/// duplicates at distance zero still count each other). Per-row summation is
/// fixed left to right, which makes the result independent of how rows are
/// grouped into blocks, bit for bit.
pub fn density_segment(block: &DistanceBlock, dc: f64, kernel: Kernel) -> Result<Vec<f64>> {
    if !(dc.is_finite() && dc > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "cutoff distance must be finite and > 0 (got {dc})"
        )));
    }
    let mut rho = Vec::with_capacity(block.m());
    match kernel {
        Kernel::Gaussian => {
            for r in 0..block.m() {
                let mut sum = 0.0;
                for &d in block.row(r) {
                    let t = d / dc;
                    sum += (-(t * t)).exp();
                }
                rho.push(sum - 1.0);
            }
        }
        Kernel::Cutoff => {
            for r in 0..block.m() {
                let self_col = block.row_offset() + r;
                let mut count = 0u64;
                for (j, &d) in block.row(r).iter().enumerate() {
                    if j != self_col && d < dc {
                        count += 1;
                    }
                }
                rho.push(count as f64);
            }
        }
    }
    Ok(rho)
}

/// Estimates d_c as a percentile of pairwise distances over a seeded sample
/// of at most `sample_size` points drawn without replacement. Linear
/// interpolation between order statistics; deterministic for a fixed seed.
pub fn estimate_dc(
    source: &DistanceSource,
    percentile: f64,
    sample_size: usize,
    seed: u64,
) -> Result<f64> {
    if !(percentile.is_finite() && percentile > 0.0 && percentile < 100.0) {
        return Err(Error::InvalidConfig(format!(
            "percentile must lie in (0, 100) (got {percentile})"
        )));
    }
    if sample_size < 2 {
        return Err(Error::InvalidConfig(
            "d_c estimation needs a sample of at least 2 points".into(),
        ));
    }
    let n = source.n();
    if n < 2 {
        return Err(Error::DegenerateData(
            "d_c estimation needs at least 2 points".into(),
        ));
    }
    let m = sample_size.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, n, m).into_vec();
    picked.sort_unstable();

    let mut dists = Vec::with_capacity(m * (m - 1) / 2);
    for a in 0..m {
        for b in (a + 1)..m {
            dists.push(source.distance(picked[a], picked[b]));
        }
    }
    dists.sort_unstable_by(f64::total_cmp);

    if *dists.last().unwrap() == 0.0 {
        return Err(Error::DegenerateData(
            "all sampled pairwise distances are zero".into(),
        ));
    }
    let dc = percentile_linear(&dists, percentile);
    if dc <= 0.0 {
        return Err(Error::DegenerateData(format!(
            "percentile {percentile} of sampled pairwise distances is zero; \
             the sample is dominated by duplicate points, raise the percentile"
        )));
    }
    Ok(dc)
}

/// Percentile with linear interpolation over a sorted slice.
fn percentile_linear(sorted: &[f64], percentile: f64) -> f64 {
    let rank = percentile / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = rank - lo as f64;
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}
