//! Multiple-testing corrections.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One test's outcome after correction, in the caller's original order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectedTest {
    pub index: usize,
    pub p: f64,
    /// The per-test threshold applied at this test's rank.
    pub threshold: f64,
    pub rejected: bool,
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("level must lie in (0, 1), got {level}")))
    }
}

fn check_pvalues(pvalues: &[f64]) -> Result<()> {
    if pvalues.is_empty() {
        return Err(Error::domain("no p-values to correct"));
    }
    match pvalues.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        Some(p) => Err(Error::domain(format!("p-value {p} outside [0, 1]"))),
        None => Ok(()),
    }
}

/// Per-test level `level / m`.
pub fn bonferroni(level: f64, m: usize) -> Result<f64> {
    check_level(level)?;
    if m == 0 {
        return Err(Error::domain("family size must be at least 1"));
    }
    Ok(level / m as f64)
}

pub fn bonferroni_adjust(pvalues: &[f64], level: f64) -> Result<Vec<CorrectedTest>> {
    check_pvalues(pvalues)?;
    let threshold = bonferroni(level, pvalues.len())?;
    Ok(pvalues
        .iter()
        .enumerate()
        .map(|(index, &p)| CorrectedTest {
            index,
            p,
            threshold,
            rejected: p <= threshold,
        })
        .collect())
}

/// Ascending order of p, ties kept in input order.
fn ranked(pvalues: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pvalues.len()).collect();
    order.sort_by(|&i, &j| pvalues[i].total_cmp(&pvalues[j]));
    order
}

/// Holm step-down: compare the i-th smallest p (1-based) with
/// `level / (m - i + 1)` and stop at the first failure.
pub fn holm_adjust(pvalues: &[f64], level: f64) -> Result<Vec<CorrectedTest>> {
    check_pvalues(pvalues)?;
    check_level(level)?;
    let m = pvalues.len();
    let mut out = vec![None; m];
    let mut still_rejecting = true;
    for (rank, &index) in ranked(pvalues).iter().enumerate() {
        let threshold = level / (m - rank) as f64;
        let p = pvalues[index];
        still_rejecting &= p <= threshold;
        out[index] = Some(CorrectedTest {
            index,
            p,
            threshold,
            rejected: still_rejecting,
        });
    }
    Ok(out.into_iter().flatten().collect())
}

/// Benjamini-Hochberg step-up at false discovery rate `q`.
pub fn benjamini_hochberg(pvalues: &[f64], q: f64) -> Result<Vec<CorrectedTest>> {
    check_pvalues(pvalues)?;
    check_level(q)?;
    let m = pvalues.len();
    let order = ranked(pvalues);
    let threshold = |rank: usize| (rank + 1) as f64 / m as f64 * q;
    let cutoff = order
        .iter()
        .enumerate()
        .filter(|&(rank, &index)| pvalues[index] <= threshold(rank))
        .map(|(rank, _)| rank + 1)
        .max()
        .unwrap_or(0);
    let mut out = vec![None; m];
    for (rank, &index) in order.iter().enumerate() {
        out[index] = Some(CorrectedTest {
            index,
            p: pvalues[index],
            threshold: threshold(rank),
            rejected: rank < cutoff,
        });
    }
    Ok(out.into_iter().flatten().collect())
}
