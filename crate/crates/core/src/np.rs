//! Tests of acceptance: an a priori design fixes the error rates, the
//! effect size and the sample size, and the data then select one of two
//! courses of action.
//!
//! A design is frozen on construction. Its fields are private and the only
//! way in is through [`build_design`] or its variants; deserialization
//! recomputes and checks everything.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::{two_sample_t, VarianceRule};
use crate::statdist::Distribution;
use crate::types::{Sign, Tails, TestKind};

/// Power below this leaves a non-significant result without a conclusion.
pub const MIN_POWER: f64 = 0.80;

const MAX_N: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    Small,
    Medium,
    Large,
}

/// Standardized mean difference expected under H_A.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectSize {
    d: f64,
    convention: Option<Convention>,
}

impl EffectSize {
    pub fn new(d: f64) -> Result<Self> {
        if !d.is_finite() || d == 0.0 {
            return Err(Error::domain(format!("effect size must be finite and non-zero, got {d}")));
        }
        let convention = match d.abs() {
            0.2 => Some(Convention::Small),
            0.5 => Some(Convention::Medium),
            0.8 => Some(Convention::Large),
            _ => None,
        };
        Ok(EffectSize { d, convention })
    }

    pub fn small() -> Self {
        Self::new(0.2).unwrap()
    }

    pub fn medium() -> Self {
        Self::new(0.5).unwrap()
    }

    pub fn large() -> Self {
        Self::new(0.8).unwrap()
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn convention(&self) -> Option<Convention> {
        self.convention
    }
}

/// Type I error rate fixed before data collection.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct AlphaLevel(f64);

impl AlphaLevel {
    pub fn new(level: f64) -> Result<Self> {
        if level > 0.0 && level < 1.0 {
            Ok(AlphaLevel(level))
        } else {
            Err(Error::domain(format!("alpha must lie in (0, 1), got {level}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for AlphaLevel {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        AlphaLevel::new(v)
    }
}

impl From<AlphaLevel> for f64 {
    fn from(a: AlphaLevel) -> f64 {
        a.0
    }
}

/// The main hypothesis H_M. A separate type from the significance
/// workflow's H0 so the two cannot be mixed up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MainHypothesis {
    pub null_value: f64,
}

/// H_A: the effect the design is powered to detect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlternativeHypothesis {
    pub effect: EffectSize,
}

/// What the researcher fixes before the data exist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignRequest {
    pub test_kind: TestKind,
    pub tails: Tails,
    pub effect: EffectSize,
    pub alpha: AlphaLevel,
    pub beta: f64,
}

impl DesignRequest {
    pub fn new(
        test_kind: TestKind,
        tails: Tails,
        d: f64,
        alpha: f64,
        beta: f64,
    ) -> Result<Self> {
        Ok(DesignRequest {
            test_kind,
            tails,
            effect: EffectSize::new(d)?,
            alpha: AlphaLevel::new(alpha)?,
            beta,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.test_kind != TestKind::TwoSampleT {
            return Err(Error::Unsupported(format!(
                "power analysis is implemented for the two-sample t test only, not {}",
                self.test_kind
            )));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::domain(format!("beta must lie in (0, 1), got {}", self.beta)));
        }
        if self.alpha.value() > self.beta {
            return Err(Error::domain(format!(
                "alpha ({}) above beta ({}): the Type II error rate may not be set below \
                 the Type I rate",
                self.alpha.value(),
                self.beta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "flag", rename_all = "snake_case")]
pub enum DesignFlag {
    LowPower,
    ProtocolDeviation { detail: String },
}

/// Upper critical value of the central t for the design's tails.
pub fn critical_value(df: f64, alpha: AlphaLevel, tails: Tails) -> Result<f64> {
    let upper = match tails {
        Tails::One => 1.0 - alpha.value(),
        Tails::Two => 1.0 - alpha.value() / 2.0,
    };
    Distribution::student_t(df)?.quantile(upper)
}

fn check_sizes(n_a: usize, n_b: usize) -> Result<()> {
    if n_a < 2 || n_b < 2 {
        return Err(Error::domain("each group needs at least two participants"));
    }
    Ok(())
}

/// Power of the two-sample t test: the probability that the statistic lands
/// in the critical region when the true standardized difference is `d`.
pub fn power(d: f64, n_a: usize, n_b: usize, alpha: AlphaLevel, tails: Tails) -> Result<f64> {
    check_sizes(n_a, n_b)?;
    if !d.is_finite() {
        return Err(Error::domain("effect size must be finite"));
    }
    let df = (n_a + n_b - 2) as f64;
    let (na, nb) = (n_a as f64, n_b as f64);
    let ncp = d * (na * nb / (na + nb)).sqrt();
    let cv = critical_value(df, alpha, tails)?;
    let shifted = Distribution::noncentral_t(df, ncp)?;
    Ok(match tails {
        Tails::One if d >= 0.0 => shifted.sf(cv),
        Tails::One => shifted.cdf(-cv),
        Tails::Two => shifted.sf(cv) + shifted.cdf(-cv),
    })
}

/// Smallest equal group size whose power reaches `1 - beta`.
pub fn required_n(d: f64, alpha: AlphaLevel, beta: f64, tails: Tails) -> Result<usize> {
    let target = 1.0 - beta;
    let z = Distribution::standard_normal();
    let za = z.quantile(match tails {
        Tails::One => 1.0 - alpha.value(),
        Tails::Two => 1.0 - alpha.value() / 2.0,
    })?;
    let zb = z.quantile(target)?;
    let guess = (2.0 * ((za + zb) / d).powi(2)).ceil();
    let mut n = if guess.is_finite() {
        (guess as usize).clamp(2, MAX_N)
    } else {
        MAX_N
    };
    let reaches = |n: usize| power(d, n, n, alpha, tails).map(|p| p >= target);
    while n > 2 && reaches(n - 1)? {
        n -= 1;
    }
    while !reaches(n)? {
        n += 1;
        if n > MAX_N {
            return Err(Error::domain("required sample size exceeds ten million per group"));
        }
    }
    Ok(n)
}

/// Minimum effect size the design can detect, from the one- or two-tailed
/// normal approximation `z·√(1/n_a + 1/n_b)`.
pub fn minimum_effect_size(n_a: usize, n_b: usize, alpha: AlphaLevel, tails: Tails) -> Result<f64> {
    check_sizes(n_a, n_b)?;
    let z = Distribution::standard_normal().quantile(match tails {
        Tails::One => 1.0 - alpha.value(),
        Tails::Two => 1.0 - alpha.value() / 2.0,
    })?;
    Ok(z * (1.0 / n_a as f64 + 1.0 / n_b as f64).sqrt())
}

/// A frozen a priori design.
#[derive(Debug, Clone, PartialEq)]
pub struct AcceptanceDesign {
    test_kind: TestKind,
    tails: Tails,
    effect: EffectSize,
    alpha: AlphaLevel,
    target_beta: f64,
    n_a: usize,
    n_b: usize,
    df: f64,
    critical_value: f64,
    power: f64,
    mes: f64,
    flags: Vec<DesignFlag>,
}

/// Solve for the per-group sample size and freeze the design.
pub fn build_design(request: &DesignRequest) -> Result<AcceptanceDesign> {
    request.validate()?;
    let n = required_n(request.effect.d(), request.alpha, request.beta, request.tails)?;
    freeze(request, n, n)
}

/// Freeze a design around a sample size fixed by the researcher.
pub fn build_design_with_n(request: &DesignRequest, n_per_group: usize) -> Result<AcceptanceDesign> {
    request.validate()?;
    freeze(request, n_per_group, n_per_group)
}

/// Unequal groups: the harmonic mean enters the noncentrality and the
/// imbalance is recorded as a protocol deviation.
pub fn build_design_unequal(request: &DesignRequest, n_a: usize, n_b: usize) -> Result<AcceptanceDesign> {
    request.validate()?;
    freeze(request, n_a, n_b)
}

fn freeze(request: &DesignRequest, n_a: usize, n_b: usize) -> Result<AcceptanceDesign> {
    check_sizes(n_a, n_b)?;
    let df = (n_a + n_b - 2) as f64;
    let achieved = power(request.effect.d(), n_a, n_b, request.alpha, request.tails)?;
    let mut flags = Vec::new();
    if achieved < MIN_POWER {
        flags.push(DesignFlag::LowPower);
    }
    if n_a != n_b {
        flags.push(DesignFlag::ProtocolDeviation {
            detail: format!("unequal groups ({n_a} vs {n_b}); power uses the harmonic mean"),
        });
    }
    Ok(AcceptanceDesign {
        test_kind: request.test_kind,
        tails: request.tails,
        effect: request.effect,
        alpha: request.alpha,
        target_beta: request.beta,
        n_a,
        n_b,
        df,
        critical_value: critical_value(df, request.alpha, request.tails)?,
        power: achieved,
        mes: minimum_effect_size(n_a, n_b, request.alpha, request.tails)?,
        flags,
    })
}

impl AcceptanceDesign {
    pub fn test_kind(&self) -> TestKind {
        self.test_kind
    }

    pub fn tails(&self) -> Tails {
        self.tails
    }

    pub fn effect(&self) -> EffectSize {
        self.effect
    }

    pub fn alpha(&self) -> AlphaLevel {
        self.alpha
    }

    /// The β the researcher asked for.
    pub fn target_beta(&self) -> f64 {
        self.target_beta
    }

    /// The β actually achieved: `1 - power`.
    pub fn beta(&self) -> f64 {
        1.0 - self.power
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    /// Per-group size for equal designs, the larger group otherwise.
    pub fn n_per_group(&self) -> usize {
        self.n_a.max(self.n_b)
    }

    pub fn group_sizes(&self) -> (usize, usize) {
        (self.n_a, self.n_b)
    }

    pub fn df(&self) -> f64 {
        self.df
    }

    /// Positive magnitude; the region sits on the side of the effect for
    /// one-tailed designs and on both sides otherwise.
    pub fn critical_value(&self) -> f64 {
        self.critical_value
    }

    pub fn mes(&self) -> f64 {
        self.mes
    }

    pub fn flags(&self) -> &[DesignFlag] {
        &self.flags
    }

    pub fn is_low_power(&self) -> bool {
        self.flags.contains(&DesignFlag::LowPower)
    }

    /// The request this design was frozen from.
    pub fn request(&self) -> DesignRequest {
        DesignRequest {
            test_kind: self.test_kind,
            tails: self.tails,
            effect: self.effect,
            alpha: self.alpha,
            beta: self.target_beta,
        }
    }

    /// Inclusive critical region on the design's side(s).
    pub fn in_critical_region(&self, statistic: f64) -> bool {
        let cv = self.critical_value;
        match self.tails {
            Tails::Two => statistic.abs() >= cv,
            Tails::One if self.effect.d() > 0.0 => statistic >= cv,
            Tails::One => statistic <= -cv,
        }
    }

    /// p-value proxy on the design's side(s).
    pub fn p_value(&self, statistic: f64, df: f64) -> Result<f64> {
        let (lower, upper) = Distribution::student_t(df)?.tails(statistic);
        Ok(match self.tails {
            Tails::Two => (2.0 * lower.min(upper)).min(1.0),
            Tails::One if self.effect.d() > 0.0 => upper,
            Tails::One => lower,
        })
    }
}

/// On-disk form of a design. `frozen` is always true.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignRecord {
    pub frozen: bool,
    pub test_kind: TestKind,
    pub tails: Tails,
    pub effect_size: f64,
    pub alpha: f64,
    pub target_beta: f64,
    pub beta: f64,
    pub power: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub df: f64,
    pub critical_value: f64,
    pub mes: f64,
    pub flags: Vec<DesignFlag>,
}

impl From<&AcceptanceDesign> for DesignRecord {
    fn from(d: &AcceptanceDesign) -> Self {
        DesignRecord {
            frozen: true,
            test_kind: d.test_kind,
            tails: d.tails,
            effect_size: d.effect.d(),
            alpha: d.alpha.value(),
            target_beta: d.target_beta,
            beta: d.beta(),
            power: d.power,
            n_a: d.n_a,
            n_b: d.n_b,
            df: d.df,
            critical_value: d.critical_value,
            mes: d.mes,
            flags: d.flags.clone(),
        }
    }
}

impl TryFrom<DesignRecord> for AcceptanceDesign {
    type Error = Error;

    fn try_from(r: DesignRecord) -> Result<Self> {
        if !r.frozen {
            return Err(Error::contract("design record is not marked frozen"));
        }
        let request = DesignRequest::new(r.test_kind, r.tails, r.effect_size, r.alpha, r.target_beta)?;
        request.validate()?;
        let design = freeze(&request, r.n_a, r.n_b)?;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(1.0);
        let consistent = close(design.power, r.power)
            && close(design.beta(), r.beta)
            && close(design.critical_value, r.critical_value)
            && close(design.mes, r.mes)
            && design.df == r.df
            && design.flags == r.flags;
        if !consistent {
            return Err(Error::contract(
                "design record does not match its own parameters; it was edited after freezing",
            ));
        }
        Ok(design)
    }
}

impl Serialize for AcceptanceDesign {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DesignRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for AcceptanceDesign {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let record = DesignRecord::deserialize(d)?;
        AcceptanceDesign::try_from(record).map_err(serde::de::Error::custom)
    }
}

/// Which course of action the data select.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "snake_case")]
pub enum Decision {
    AcceptHA,
    AcceptHM { power: f64 },
    ConcludeNothing { power: f64 },
}

/// Decide from the statistic and the frozen critical value.
pub fn decide(design: &AcceptanceDesign, statistic: f64) -> Decision {
    outside_or_inside(design, design.in_critical_region(statistic))
}

/// Decide from a p-value proxy; `p <= alpha` stands for landing in the
/// critical region.
pub fn decide_by_p(design: &AcceptanceDesign, p: f64) -> Decision {
    outside_or_inside(design, p <= design.alpha.value())
}

fn outside_or_inside(design: &AcceptanceDesign, inside: bool) -> Decision {
    if inside {
        Decision::AcceptHA
    } else if design.power >= MIN_POWER {
        Decision::AcceptHM {
            power: design.power,
        }
    } else {
        Decision::ConcludeNothing {
            power: design.power,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Proxy {
    #[default]
    CriticalValue,
    PValue,
}

/// Outcome of applying a frozen design to data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceResult {
    pub statistic: f64,
    pub df: f64,
    pub critical_value: f64,
    pub proxy: Proxy,
    /// Present only under the p-value proxy.
    pub p_value: Option<f64>,
    pub alpha: f64,
    pub tails: Tails,
    pub direction_observed: Sign,
    pub decision: Decision,
    pub deviations: Vec<String>,
}

impl AcceptanceResult {
    /// `t(64) = 3.31, 1-tailed > CV_t = 2.386, thus accept H_A`
    pub fn report_line(&self) -> String {
        let head = format!("t({}) = {:.2}, {}", crate::fisher::fmt_df(self.df), self.statistic, self.tails);
        let inside = matches!(self.decision, Decision::AcceptHA);
        let comparison = match (self.proxy, self.p_value) {
            (Proxy::PValue, Some(p)) => format!(
                ", p = {} {} alpha = {}",
                crate::fisher::fmt_p(p).trim_start_matches("< "),
                if inside { "<=" } else { ">" },
                crate::fisher::fmt_level(self.alpha)
            ),
            _ => format!(
                " {} CV_t = {:.3}",
                if inside { ">" } else { "<" },
                self.critical_value
            ),
        };
        let tail = match self.decision {
            Decision::AcceptHA => "thus accept H_A".to_string(),
            Decision::AcceptHM { power } => format!("thus accept H_M (power = {power:.2})"),
            Decision::ConcludeNothing { power } => {
                format!("thus no conclusion (power = {power:.2} < {MIN_POWER:.2})")
            }
        };
        format!("{head}{comparison}, {tail}")
    }
}

/// Apply a frozen two-sample design to the observed groups.
pub fn run_acceptance_test(
    design: &AcceptanceDesign,
    group_a: &[f64],
    group_b: &[f64],
    hypothesis: &MainHypothesis,
    rule: VarianceRule,
    proxy: Proxy,
) -> Result<AcceptanceResult> {
    let stat = two_sample_t(group_a, group_b, rule, hypothesis.null_value)?;
    let mut deviations = Vec::new();
    if (group_a.len(), group_b.len()) != design.group_sizes() {
        deviations.push(format!(
            "observed group sizes {}/{} differ from the design's {}/{}",
            group_a.len(),
            group_b.len(),
            design.n_a,
            design.n_b
        ));
    }
    if stat.df != design.df {
        deviations.push(format!(
            "test df {} differs from the design df {}",
            crate::fisher::fmt_df(stat.df),
            crate::fisher::fmt_df(design.df)
        ));
    }
    let (decision, p) = match proxy {
        Proxy::CriticalValue => (decide(design, stat.value), None),
        Proxy::PValue => {
            let p = design.p_value(stat.value, design.df)?;
            (decide_by_p(design, p), Some(p))
        }
    };
    Ok(AcceptanceResult {
        statistic: stat.value,
        df: stat.df,
        critical_value: design.critical_value,
        proxy,
        p_value: p,
        alpha: design.alpha.value(),
        tails: design.tails,
        direction_observed: Sign::of(stat.value),
        decision,
        deviations,
    })
}
