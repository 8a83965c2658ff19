//! Monte Carlo checks of the long-run meaning of alpha, power, the spread
//! of p-values, and familywise error.
//!
//! Each replication owns a counter-based sub-stream of the seed, and
//! results are gathered in replication order, so a report does not depend
//! on scheduling or on the number of workers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::{two_sample_t, VarianceRule};
use crate::np::{power, AlphaLevel};
use crate::statdist::Distribution;
use crate::types::Tails;

/// Pass band in Monte Carlo standard errors.
pub const PASS_SE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyCorrection {
    None,
    Bonferroni,
    Holm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "snake_case")]
pub enum Scenario {
    Type1Rate,
    PowerRate,
    PDance,
    FamilywiseInflation { m: usize, correction: FamilyCorrection },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    #[serde(flatten)]
    pub scenario: Scenario,
    pub n_per_group: usize,
    /// Rejection level: alpha, or the familywise significance level.
    pub level: f64,
    pub tails: Tails,
    pub true_effect: f64,
    pub replications: u64,
    pub seed: u64,
}

impl SimulationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::domain("replications must be at least 1"));
        }
        if self.n_per_group < 2 {
            return Err(Error::domain("each group needs at least two observations"));
        }
        AlphaLevel::new(self.level)?;
        if !self.true_effect.is_finite() {
            return Err(Error::domain("true effect must be finite"));
        }
        match self.scenario {
            Scenario::Type1Rate | Scenario::FamilywiseInflation { .. } if self.true_effect != 0.0 => {
                Err(Error::domain("this scenario samples under H0 and needs a true effect of 0"))
            }
            Scenario::PowerRate | Scenario::PDance if self.true_effect == 0.0 => {
                Err(Error::domain("this scenario needs a non-zero true effect"))
            }
            Scenario::FamilywiseInflation { m: 0, .. } => {
                Err(Error::domain("a family needs at least one test"))
            }
            _ => Ok(()),
        }
    }

    /// Closed-form long-run rate the observed rate should match.
    pub fn expected_rate(&self) -> Result<f64> {
        let a = self.level;
        Ok(match self.scenario {
            Scenario::Type1Rate => a,
            Scenario::PowerRate | Scenario::PDance => power(
                self.true_effect,
                self.n_per_group,
                self.n_per_group,
                AlphaLevel::new(a)?,
                self.tails,
            )?,
            Scenario::FamilywiseInflation { m, correction } => {
                let per_test = match correction {
                    FamilyCorrection::None => a,
                    // Holm rejects anything exactly when the smallest p
                    // clears level/m, so its familywise rate equals
                    // Bonferroni's under the global null
                    FamilyCorrection::Bonferroni | FamilyCorrection::Holm => a / m as f64,
                };
                1.0 - (1.0 - per_test).powi(m as i32)
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PQuantiles {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

impl PQuantiles {
    /// `q75 / q25`; at least 10 means the middle half spans an order of
    /// magnitude.
    pub fn iqr_ratio(&self) -> f64 {
        self.q75 / self.q25
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub spec: SimulationSpec,
    pub observed_rate: f64,
    pub expected_rate: f64,
    pub mc_standard_error: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_quantiles: Option<PQuantiles>,
    pub pass: bool,
}

/// Independent, reproducible generator for one replication.
pub fn derive_stream(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

fn draw_group<R: Rng>(rng: &mut R, n: usize, mean: f64) -> Vec<f64> {
    (0..n)
        .map(|_| mean + rng.sample::<f64, _>(StandardNormal))
        .collect()
}

fn one_study<R: Rng>(rng: &mut R, spec: &SimulationSpec) -> Result<f64> {
    let a = draw_group(rng, spec.n_per_group, spec.true_effect);
    let b = draw_group(rng, spec.n_per_group, 0.0);
    let stat = two_sample_t(&a, &b, VarianceRule::Pooled, 0.0)?;
    let (lower, upper) = Distribution::student_t(stat.df)?.tails(stat.value);
    Ok(match spec.tails {
        Tails::Two => (2.0 * lower.min(upper)).min(1.0),
        Tails::One if spec.true_effect < 0.0 => lower,
        Tails::One => upper,
    })
}

enum Outcome {
    Study { p: f64 },
    Family { any_rejected: bool },
}

fn replicate(spec: &SimulationSpec, index: u64) -> Result<Outcome> {
    let mut rng = derive_stream(spec.seed, index);
    match spec.scenario {
        Scenario::FamilywiseInflation { m, correction } => {
            let ps = (0..m)
                .map(|_| one_study(&mut rng, spec))
                .collect::<Result<Vec<_>>>()?;
            let smallest = ps.iter().copied().fold(f64::INFINITY, f64::min);
            let threshold = match correction {
                FamilyCorrection::None => spec.level,
                FamilyCorrection::Bonferroni | FamilyCorrection::Holm => spec.level / m as f64,
            };
            Ok(Outcome::Family {
                any_rejected: smallest <= threshold,
            })
        }
        _ => Ok(Outcome::Study {
            p: one_study(&mut rng, spec)?,
        }),
    }
}

fn outcomes(spec: &SimulationSpec, workers: Option<usize>) -> Result<Vec<Outcome>> {
    spec.validate()?;
    let work = || {
        (0..spec.replications)
            .into_par_iter()
            .map(|i| replicate(spec, i))
            .collect::<Result<Vec<_>>>()
    };
    match workers {
        None => work(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))?
            .install(work),
    }
}

/// Per-replication p-values of a single-study scenario, in replication order.
pub fn p_values(spec: &SimulationSpec) -> Result<Vec<f64>> {
    if matches!(spec.scenario, Scenario::FamilywiseInflation { .. }) {
        return Err(Error::domain("familywise scenarios have no single p per replication"));
    }
    Ok(outcomes(spec, None)?
        .into_iter()
        .map(|o| match o {
            Outcome::Study { p } => p,
            Outcome::Family { .. } => unreachable!(),
        })
        .collect())
}

pub fn run(spec: &SimulationSpec) -> Result<SimulationReport> {
    report(spec, outcomes(spec, None)?)
}

/// As [`run`], on a dedicated pool of `workers` threads.
pub fn run_with_workers(spec: &SimulationSpec, workers: usize) -> Result<SimulationReport> {
    report(spec, outcomes(spec, Some(workers))?)
}

fn report(spec: &SimulationSpec, results: Vec<Outcome>) -> Result<SimulationReport> {
    let reps = results.len() as f64;
    let mut ps = Vec::new();
    let mut hits = 0u64;
    for o in results {
        match o {
            Outcome::Study { p } => {
                hits += u64::from(p <= spec.level);
                ps.push(p);
            }
            Outcome::Family { any_rejected } => hits += u64::from(any_rejected),
        }
    }
    let observed = hits as f64 / reps;
    let expected = spec.expected_rate()?;
    let se = (expected * (1.0 - expected) / reps).sqrt();
    let p_quantiles = match spec.scenario {
        Scenario::PDance => {
            ps.sort_by(f64::total_cmp);
            Some(PQuantiles {
                min: ps[0],
                q25: quantile_sorted(&ps, 0.25),
                median: quantile_sorted(&ps, 0.5),
                q75: quantile_sorted(&ps, 0.75),
                max: ps[ps.len() - 1],
            })
        }
        _ => None,
    };
    Ok(SimulationReport {
        spec: *spec,
        observed_rate: observed,
        expected_rate: expected,
        mc_standard_error: se,
        p_quantiles,
        pass: (observed - expected).abs() <= PASS_SE * se,
    })
}

/// Linear interpolation between order statistics.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Kolmogorov-Smirnov distance between a sample and Uniform(0, 1).
pub fn ks_distance_uniform(sample: &[f64]) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max)
}
