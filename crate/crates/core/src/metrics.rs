//! External clustering agreement: Adjusted Rand Index and Normalized
//! Mutual Information.
//!
//! NMI is normalized by the *arithmetic mean* of the two label entropies,
//! `MI / ((H_a + H_b) / 2)`. Other conventions (max, min, geometric mean)
//! give different numbers on the same partitions.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Cross-tabulation of two labelings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    /// `counts[i][j]`: items with the i-th label of `a` and the j-th label of `b`.
    pub counts: Vec<Vec<u64>>,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub n: u64,
}

impl ContingencyTable {
    pub fn new(a: &[usize], b: &[usize]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::invalid(format!(
                "label lengths differ: {} vs {}",
                a.len(),
                b.len()
            )));
        }
        if a.len() < 2 {
            return Err(Error::invalid("need at least 2 labels to compare partitions"));
        }
        let ia = dense_ids(a);
        let ib = dense_ids(b);
        let ka = ia.iter().max().map_or(0, |m| m + 1);
        let kb = ib.iter().max().map_or(0, |m| m + 1);
        let mut counts = vec![vec![0u64; kb]; ka];
        for (&x, &y) in ia.iter().zip(&ib) {
            counts[x][y] += 1;
        }
        let row_sums = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums = (0..kb).map(|j| counts.iter().map(|r| r[j]).sum()).collect();
        Ok(ContingencyTable {
            counts,
            row_sums,
            col_sums,
            n: a.len() as u64,
        })
    }
}

fn dense_ids(labels: &[usize]) -> Vec<usize> {
    let mut ids = HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = ids.len();
            *ids.entry(*l).or_insert(next)
        })
        .collect()
}

fn pairs(n: u64) -> i128 {
    let n = i128::from(n);
    n * (n - 1) / 2
}

/// Adjusted Rand Index (Hubert and Arabie).
///
/// Evaluated in exact integer arithmetic up to the final division. When the
/// chance-adjusted denominator vanishes, both partitions are all-in-one or
/// all-singletons (and hence identical), and the result is 1.
pub fn ari(a: &[usize], b: &[usize]) -> Result<f64> {
    let t = ContingencyTable::new(a, b)?;
    let index: i128 = t.counts.iter().flatten().map(|&c| pairs(c)).sum();
    let sum_a: i128 = t.row_sums.iter().map(|&c| pairs(c)).sum();
    let sum_b: i128 = t.col_sums.iter().map(|&c| pairs(c)).sum();
    let total = pairs(t.n);
    // (index - E) / (max - E) with E = sum_a sum_b / total and max = (sum_a + sum_b) / 2,
    // multiplied through by 2 * total.
    let num = 2 * (index * total - sum_a * sum_b);
    let den = total * (sum_a + sum_b) - 2 * sum_a * sum_b;
    if den == 0 {
        return Ok(1.0);
    }
    Ok(num as f64 / den as f64)
}

/// Sum of values in a fixed order so the result does not depend on which
/// labeling came first.
fn ordered_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

fn entropy(counts: &[u64], n: f64) -> f64 {
    ordered_sum(
        counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            })
            .collect(),
    )
}

/// Normalized Mutual Information with arithmetic-mean normalization, in `[0, 1]`.
///
/// Two single-cluster labelings are identical and score 1.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64> {
    let t = ContingencyTable::new(a, b)?;
    let n = t.n as f64;
    let mut terms = Vec::new();
    for (i, row) in t.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let outer = (t.row_sums[i] * t.col_sums[j]) as f64;
                terms.push(c as f64 / n * (n * c as f64 / outer).ln());
            }
        }
    }
    let mi = ordered_sum(terms).max(0.0);
    let ha = entropy(&t.row_sums, n);
    let hb = entropy(&t.col_sums, n);
    let mean = (ha + hb) / 2.0;
    if mean == 0.0 {
        return Ok(1.0);
    }
    Ok((mi / mean).clamp(0.0, 1.0))
}
