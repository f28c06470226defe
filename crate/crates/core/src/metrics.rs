//! Clustering quality: assignment accuracy, normalized mutual information
//! and pairwise F-score.
//!
//! All functions accept arbitrary label values; labels are compacted to
//! dense indices before the contingency table is built.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub acc: f64,
    pub nmi: f64,
    pub f_score: f64,
    /// Rows index truth classes, columns predicted clusters.
    pub confusion: Vec<Vec<usize>>,
}

fn compact(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut ids = BTreeMap::new();
    for &l in labels {
        let next = ids.len();
        ids.entry(l).or_insert(next);
    }
    // re-number in sorted order so the table layout is independent of sample order
    for (rank, v) in ids.values_mut().enumerate() {
        *v = rank;
    }
    (labels.iter().map(|l| ids[l]).collect(), ids.len())
}

/// Contingency table of truth (rows) against prediction (columns).
pub fn contingency(truth: &[usize], pred: &[usize]) -> Result<Vec<Vec<usize>>> {
    if truth.len() != pred.len() {
        return Err(Error::LengthMismatch(truth.len(), pred.len()));
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (t, kt) = compact(truth);
    let (p, kp) = compact(pred);
    let mut table = vec![vec![0usize; kp]; kt];
    for (&a, &b) in t.iter().zip(&p) {
        table[a][b] += 1;
    }
    Ok(table)
}

/// Minimum-cost perfect matching on a square cost matrix (Kuhn-Munkres with
/// potentials, O(n^3)). Returns `assignment[row] = column`.
pub fn hungarian_min(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    const INF: i64 = i64::MAX / 4;
    // 1-based arrays; column 0 is a sentinel
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut col_owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        col_owner[0] = row;
        let mut j0 = 0;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_owner[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_owner[j0] = col_owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        if col_owner[j] > 0 {
            assignment[col_owner[j] - 1] = j - 1;
        }
    }
    assignment
}

fn matched_count(table: &[Vec<usize>]) -> usize {
    let rows = table.len();
    let cols = table.first().map_or(0, Vec::len);
    let size = rows.max(cols);
    let count = |i: usize, j: usize| if i < rows && j < cols { table[i][j] } else { 0 };
    let cost: Vec<Vec<i64>> = (0..size)
        .map(|i| (0..size).map(|j| -(count(i, j) as i64)).collect())
        .collect();
    hungarian_min(&cost).iter().enumerate().map(|(i, &j)| count(i, j)).sum()
}

/// Fraction of samples correctly labelled under the best one-to-one
/// matching of predicted clusters to classes.
pub fn accuracy(truth: &[usize], pred: &[usize]) -> Result<f64> {
    let table = contingency(truth, pred)?;
    Ok(matched_count(&table) as f64 / truth.len() as f64)
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// `I(U; V) / sqrt(H(U) H(V))` with natural logarithms.
///
/// Two single-cluster partitions score 1; if only one side is a single
/// cluster the score is 0.
pub fn nmi(truth: &[usize], pred: &[usize]) -> Result<f64> {
    let table = contingency(truth, pred)?;
    Ok(nmi_from_table(&table, truth.len()))
}

fn nmi_from_table(table: &[Vec<usize>], n: usize) -> f64 {
    let n = n as f64;
    let row_sums: Vec<usize> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<usize> = (0..table[0].len()).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let hu = entropy(row_sums.iter().copied(), n);
    let hv = entropy(col_sums.iter().copied(), n);
    if hu == 0.0 && hv == 0.0 {
        return 1.0;
    }
    if hu == 0.0 || hv == 0.0 {
        return 0.0;
    }
    let mut mi = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / n * (n * c / (row_sums[i] as f64 * col_sums[j] as f64)).ln();
            }
        }
    }
    (mi / (hu * hv).sqrt()).clamp(0.0, 1.0)
}

fn pairs(c: usize) -> u64 {
    let c = c as u64;
    c * c.saturating_sub(1) / 2
}

/// Pairwise F-score over all sample pairs co-clustered in truth and/or prediction.
pub fn f_score(truth: &[usize], pred: &[usize]) -> Result<f64> {
    let table = contingency(truth, pred)?;
    if truth.len() < 2 {
        return Err(Error::InvalidArgument("F-score needs at least two samples".into()));
    }
    Ok(f_score_from_table(&table))
}

fn f_score_from_table(table: &[Vec<usize>]) -> f64 {
    let tp: u64 = table.iter().flatten().map(|&c| pairs(c)).sum();
    let truth_pairs: u64 = table.iter().map(|r| pairs(r.iter().sum())).sum();
    let pred_pairs: u64 = (0..table[0].len())
        .map(|j| pairs(table.iter().map(|r| r[j]).sum()))
        .sum();
    let precision = if pred_pairs == 0 {
        0.0
    } else {
        tp as f64 / pred_pairs as f64
    };
    let recall = if truth_pairs == 0 {
        0.0
    } else {
        tp as f64 / truth_pairs as f64
    };
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// All three scores and the confusion table.
pub fn evaluate(truth: &[usize], pred: &[usize]) -> Result<MetricReport> {
    let table = contingency(truth, pred)?;
    if truth.len() < 2 {
        return Err(Error::InvalidArgument("evaluation needs at least two samples".into()));
    }
    Ok(MetricReport {
        acc: matched_count(&table) as f64 / truth.len() as f64,
        nmi: nmi_from_table(&table, truth.len()),
        f_score: f_score_from_table(&table),
        confusion: table,
    })
}
