//! Permutation p-values for a difference of means.
//!
//! The mean difference is increasing in the sum of group A, so counting
//! relabelings at least as extreme as the observed one reduces to counting
//! size-`n_a` subsets whose sum clears a threshold. The exact mode counts
//! them by branch and bound over the sorted pooled sample.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{TailDirection, Tails};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PermutationMode {
    /// Full enumeration, refused when the pooled sample exceeds `cap`.
    Exact { cap: usize },
    /// Random relabelings; p = (hits + 1) / (reps + 1).
    MonteCarlo { reps: u64, seed: u64 },
}

impl PermutationMode {
    pub const DEFAULT_CAP: usize = 20;

    pub fn exact() -> Self {
        PermutationMode::Exact {
            cap: Self::DEFAULT_CAP,
        }
    }
}

struct Thresholds {
    /// Count sums at or above this (None: no upper region).
    upper: Option<f64>,
    /// Count sums at or below this.
    lower: Option<f64>,
    tol: f64,
}

fn thresholds(
    group_a: &[f64],
    group_b: &[f64],
    tails: Tails,
    direction: TailDirection,
) -> Option<Thresholds> {
    let total: f64 = group_a.iter().chain(group_b).sum();
    let scale: f64 = group_a.iter().chain(group_b).map(|x| x.abs()).sum();
    let tol = 1e-10 * scale.max(1.0);
    let observed: f64 = group_a.iter().sum();
    let n = (group_a.len() + group_b.len()) as f64;
    let centre = total * group_a.len() as f64 / n;
    match (tails, direction) {
        (Tails::One, TailDirection::Upper) => Some(Thresholds {
            upper: Some(observed),
            lower: None,
            tol,
        }),
        (Tails::One, TailDirection::Lower) => Some(Thresholds {
            upper: None,
            lower: Some(observed),
            tol,
        }),
        (Tails::Two, _) => {
            let mirror = 2.0 * centre - observed;
            if (observed - mirror).abs() <= 2.0 * tol {
                // every relabeling is at least as extreme as a null contrast
                return None;
            }
            Some(Thresholds {
                upper: Some(observed.max(mirror)),
                lower: Some(observed.min(mirror)),
                tol,
            })
        }
    }
}

fn choose(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of size-`k` subsets of `desc` (sorted descending) with sum ≥ `at_least`.
struct SubsetCounter {
    desc: Vec<f64>,
    prefix: Vec<f64>,
}

impl SubsetCounter {
    fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        let mut prefix = Vec::with_capacity(values.len() + 1);
        prefix.push(0.0);
        for v in &values {
            prefix.push(prefix.last().unwrap() + v);
        }
        SubsetCounter {
            desc: values,
            prefix,
        }
    }

    fn count(&self, k: usize, at_least: f64) -> u128 {
        self.walk(0, k, at_least)
    }

    fn walk(&self, i: usize, k: usize, need: f64) -> u128 {
        let n = self.desc.len();
        let rest = n - i;
        if k > rest {
            return 0;
        }
        if k == 0 {
            return u128::from(need <= 0.0);
        }
        let best = self.prefix[i + k] - self.prefix[i];
        if best < need {
            return 0;
        }
        let worst = self.prefix[n] - self.prefix[n - k];
        if worst >= need {
            return choose(rest, k);
        }
        self.walk(i + 1, k - 1, need - self.desc[i]) + self.walk(i + 1, k, need)
    }
}

fn check_groups(group_a: &[f64], group_b: &[f64]) -> Result<()> {
    if group_a.is_empty() || group_b.is_empty() {
        return Err(Error::degenerate("both groups need at least one observation"));
    }
    if group_a.iter().chain(group_b).any(|x| !x.is_finite()) {
        return Err(Error::degenerate("observations must be finite"));
    }
    Ok(())
}

/// p-value of the observed mean difference over relabelings of the pooled
/// sample.
pub fn permutation_p_value(
    group_a: &[f64],
    group_b: &[f64],
    tails: Tails,
    direction: TailDirection,
    mode: PermutationMode,
) -> Result<f64> {
    check_groups(group_a, group_b)?;
    let pooled: Vec<f64> = group_a.iter().chain(group_b).copied().collect();
    if let PermutationMode::Exact { cap } = mode {
        if pooled.len() > cap {
            return Err(Error::contract(format!(
                "exact enumeration of {} observations exceeds the cap of {cap}; \
                 use Monte Carlo mode",
                pooled.len()
            )));
        }
    }
    let Some(th) = thresholds(group_a, group_b, tails, direction) else {
        return Ok(1.0);
    };
    let k = group_a.len();
    match mode {
        PermutationMode::Exact { .. } => {
            let mut hits = 0u128;
            if let Some(upper) = th.upper {
                hits += SubsetCounter::new(pooled.clone()).count(k, upper - th.tol);
            }
            if let Some(lower) = th.lower {
                let negated = pooled.iter().map(|x| -x).collect();
                hits += SubsetCounter::new(negated).count(k, -lower - th.tol);
            }
            Ok(hits as f64 / choose(pooled.len(), k) as f64)
        }
        PermutationMode::MonteCarlo { reps, seed } => {
            if reps == 0 {
                return Err(Error::domain("Monte Carlo mode needs at least one replication"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut shuffled = pooled;
            let mut hits = 0u64;
            for _ in 0..reps {
                shuffled.shuffle(&mut rng);
                let s: f64 = shuffled[..k].iter().sum();
                let extreme = th.upper.is_some_and(|u| s >= u - th.tol)
                    || th.lower.is_some_and(|l| s <= l + th.tol);
                hits += u64::from(extreme);
            }
            Ok((hits + 1) as f64 / (reps + 1) as f64)
        }
    }
}
