//! External clustering agreement metrics: normalized mutual information and
//! the adjusted Rand index.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

fn check_lengths(a: &[u32], b: &[u32], min: usize) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "label vectors differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < min {
        return Err(Error::InvalidInput(format!(
            "need at least {min} labels, got {}",
            a.len()
        )));
    }
    Ok(a.len())
}

struct Contingency {
    cells: BTreeMap<(u32, u32), u64>,
    a_counts: BTreeMap<u32, u64>,
    b_counts: BTreeMap<u32, u64>,
}

fn contingency(a: &[u32], b: &[u32]) -> Contingency {
    let mut cells = BTreeMap::new();
    let mut a_counts = BTreeMap::new();
    let mut b_counts = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *cells.entry((x, y)).or_insert(0u64) += 1;
        *a_counts.entry(x).or_insert(0u64) += 1;
        *b_counts.entry(y).or_insert(0u64) += 1;
    }
    Contingency {
        cells,
        a_counts,
        b_counts,
    }
}

fn entropy(counts: &BTreeMap<u32, u64>, n: f64) -> f64 {
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information, I(A;B) / sqrt(H(A) H(B)) with natural
/// logarithms. Defined as 1 when both partitions are single-cluster and 0
/// when exactly one side has zero entropy.
pub fn nmi(a: &[u32], b: &[u32]) -> Result<f64> {
    let n = check_lengths(a, b, 1)? as f64;
    let table = contingency(a, b);
    let h_a = entropy(&table.a_counts, n);
    let h_b = entropy(&table.b_counts, n);
    if h_a == 0.0 && h_b == 0.0 {
        return Ok(1.0);
    }
    if h_a == 0.0 || h_b == 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for (&(x, y), &c) in &table.cells {
        let joint = c as f64 / n;
        let pa = table.a_counts[&x] as f64 / n;
        let pb = table.b_counts[&y] as f64 / n;
        mi += joint * (joint / (pa * pb)).ln();
    }
    Ok(mi / (h_a * h_b).sqrt())
}

fn comb2(c: u64) -> f64 {
    let c = c as f64;
    c * (c - 1.0) / 2.0
}

/// Adjusted Rand index: pair-counting agreement corrected for chance,
/// (sum_ij C(n_ij, 2) - E) / (M - E) where E is the chance expectation and M
/// the mean of the two marginal pair sums. Defined as 1 in the degenerate
/// case where M equals E (identical trivial partitions).
pub fn ari(a: &[u32], b: &[u32]) -> Result<f64> {
    let n = check_lengths(a, b, 2)?;
    let table = contingency(a, b);
    let sum_cells: f64 = table.cells.values().map(|&c| comb2(c)).sum();
    let sum_a: f64 = table.a_counts.values().map(|&c| comb2(c)).sum();
    let sum_b: f64 = table.b_counts.values().map(|&c| comb2(c)).sum();
    let total = comb2(n as u64);
    let expected = sum_a * sum_b / total;
    let mean = 0.5 * (sum_a + sum_b);
    if mean == expected {
        return Ok(1.0);
    }
    Ok((sum_cells - expected) / (mean - expected))
}
