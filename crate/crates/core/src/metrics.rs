//! External clustering quality measures: NMI, ACC (best one-to-one matching)
//! and purity, all computed from a contingency table.

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;

use crate::error::{Error, Result};

/// Largest number of predicted clusters or true classes [`acc`] will match.
pub const MATCHING_BUDGET: usize = 512;

/// `counts[p][t]` = samples with predicted cluster `p` and true class `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<usize>>,
    pub total: usize,
}

impl ContingencyTable {
    pub fn new(pred: &[usize], truth: &[usize]) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::LengthMismatch(pred.len(), truth.len()));
        }
        // compact ids so unused labels do not create empty rows or columns
        let pred = compact(pred);
        let truth = compact(truth);
        let rows = pred.iter().max().map_or(0, |m| m + 1);
        let cols = truth.iter().max().map_or(0, |m| m + 1);
        let mut counts = vec![vec![0; cols]; rows];
        for (&p, &t) in pred.iter().zip(&truth) {
            counts[p][t] += 1;
        }
        Ok(ContingencyTable {
            counts,
            total: pred.len(),
        })
    }

    pub fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<usize> {
        let cols = self.counts.first().map_or(0, Vec::len);
        (0..cols)
            .map(|c| self.counts.iter().map(|r| r[c]).sum())
            .collect()
    }
}

fn compact(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

fn entropy(sums: &[usize], total: f64) -> f64 {
    sums.iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information `I(P;T) / √(H(P)·H(T))`, natural logs.
///
/// When either partition is trivial the ratio is undefined; it is taken as
/// 1 if both are the same single cluster and 0 otherwise.
pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(pred, truth)?;
    if table.total == 0 {
        return Ok(1.0);
    }
    let n = table.total as f64;
    let rows = table.row_sums();
    let cols = table.col_sums();
    let h_pred = entropy(&rows, n);
    let h_truth = entropy(&cols, n);
    if h_pred == 0.0 || h_truth == 0.0 {
        return Ok(if rows.len() == 1 && cols.len() == 1 { 1.0 } else { 0.0 });
    }
    let mut mutual = 0.0;
    for (p, row) in table.counts.iter().enumerate() {
        for (t, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mutual += c / n * (c * n / (rows[p] as f64 * cols[t] as f64)).ln();
            }
        }
    }
    Ok((mutual / (h_pred * h_truth).sqrt()).clamp(0.0, 1.0))
}

/// Fraction of samples correctly labeled under the best one-to-one
/// cluster-to-class matching.
pub fn acc(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(pred, truth)?;
    if table.total == 0 {
        return Ok(1.0);
    }
    let rows = table.counts.len();
    let cols = table.counts[0].len();
    if rows.max(cols) > MATCHING_BUDGET {
        return Err(Error::InvalidConfig(format!(
            "{rows} clusters × {cols} classes exceeds the matching budget of {MATCHING_BUDGET}"
        )));
    }
    let size = rows.max(cols);
    let weights = Matrix::from_fn(size, size, |(r, c)| {
        if r < rows && c < cols {
            table.counts[r][c] as i64
        } else {
            0
        }
    });
    let (matched, _) = kuhn_munkres(&weights);
    Ok(matched as f64 / table.total as f64)
}

/// `(1/N) Σ_clusters max_class overlap`.
pub fn purity(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(pred, truth)?;
    if table.total == 0 {
        return Ok(1.0);
    }
    let majority: usize = table
        .counts
        .iter()
        .map(|r| r.iter().copied().max().unwrap_or(0))
        .sum();
    Ok(majority as f64 / table.total as f64)
}

/// NMI, ACC and purity of one clustering.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Scores {
    pub nmi: f64,
    pub acc: f64,
    pub purity: f64,
}

impl Scores {
    pub fn compute(pred: &[usize], truth: &[usize]) -> Result<Self> {
        Ok(Scores {
            nmi: nmi(pred, truth)?,
            acc: acc(pred, truth)?,
            purity: purity(pred, truth)?,
        })
    }
}
