//! Tests of significance: an a posteriori procedure that computes the
//! cumulative probability of the observed (and more extreme) data under H0
//! and grades it against a ladder of significance levels.
//!
//! Nothing here speaks of error rates, power, or acceptance. Those belong
//! to [`crate::np`].

pub mod correction;
pub mod permutation;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statdist::Distribution;
use crate::types::{Sign, TailDirection, Tails, TestKind};

pub use correction::{benjamini_hochberg, bonferroni, bonferroni_adjust, holm_adjust, CorrectedTest};
pub use permutation::{permutation_p_value, PermutationMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Goal {
    CompareCounts,
    CompareScores,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measurement {
    Nominal,
    IntervalOrRatio,
}

/// Pick the test that fits the research goal and measurement level.
pub fn select_test(goal: Goal, measurement: Measurement) -> Result<TestKind> {
    match (goal, measurement) {
        (Goal::CompareCounts, Measurement::Nominal) => Ok(TestKind::ChiSquareIndependence),
        (Goal::CompareScores, Measurement::IntervalOrRatio) => Ok(TestKind::TwoSampleT),
        (goal, measurement) => Err(Error::Selection {
            goal: format!("{goal:?}"),
            measurement: format!("{measurement:?}"),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Contrast {
    MeanDifference,
    Independence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Directionality {
    NonDirectional,
    /// H0: M1 - M2 ≤ value, tested on the upper tail.
    DirectionalPositive,
    /// H0: M1 - M2 ≥ value, tested on the lower tail.
    DirectionalNegative,
}

/// Fisher's H0. Distinct from the acceptance workflow's main hypothesis so
/// the two cannot be swapped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullHypothesis {
    contrast: Contrast,
    null_value: f64,
    directionality: Directionality,
}

impl NullHypothesis {
    /// H0 on a difference of means; `null_value` need not be zero.
    pub fn mean_difference(null_value: f64, directionality: Directionality) -> Result<Self> {
        if !null_value.is_finite() {
            return Err(Error::domain(format!("null value must be finite, got {null_value}")));
        }
        Ok(NullHypothesis {
            contrast: Contrast::MeanDifference,
            null_value,
            directionality,
        })
    }

    /// Nil, non-directional H0 of no association in a contingency table.
    pub fn independence() -> Self {
        NullHypothesis {
            contrast: Contrast::Independence,
            null_value: 0.0,
            directionality: Directionality::NonDirectional,
        }
    }

    pub fn contrast(&self) -> Contrast {
        self.contrast
    }

    pub fn null_value(&self) -> f64 {
        self.null_value
    }

    pub fn directionality(&self) -> Directionality {
        self.directionality
    }

    /// Directional hypotheses are tested one-tailed at their boundary value.
    pub fn tails(&self) -> Tails {
        match (self.contrast, self.directionality) {
            (Contrast::Independence, _) => Tails::One,
            (_, Directionality::NonDirectional) => Tails::Two,
            _ => Tails::One,
        }
    }

    pub fn tail_direction(&self) -> TailDirection {
        match self.directionality {
            Directionality::DirectionalNegative => TailDirection::Lower,
            _ => TailDirection::Upper,
        }
    }
}

impl fmt::Display for NullHypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.contrast {
            Contrast::Independence => f.write_str("H0: rows and columns are independent"),
            Contrast::MeanDifference => {
                let op = match self.directionality {
                    Directionality::NonDirectional => "=",
                    Directionality::DirectionalPositive => "<=",
                    Directionality::DirectionalNegative => ">=",
                };
                write!(f, "H0: M1 - M2 {op} {}", fmt_number(self.null_value))
            }
        }
    }
}

/// Gradable, a posteriori evidence thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceLadder {
    levels: Vec<f64>,
    labels: Vec<String>,
}

impl Default for SignificanceLadder {
    fn default() -> Self {
        SignificanceLadder {
            levels: vec![0.05, 0.01, 0.001],
            labels: vec![
                "significant".into(),
                "highly significant".into(),
                "extremely significant".into(),
            ],
        }
    }
}

impl SignificanceLadder {
    pub fn new(levels: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if levels.is_empty() || levels.len() != labels.len() {
            return Err(Error::domain(
                "ladder needs one label per level and at least one level",
            ));
        }
        if levels.iter().any(|&l| !(l > 0.0 && l < 1.0)) {
            return Err(Error::domain("ladder levels must lie in (0, 1)"));
        }
        if levels.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::domain("ladder levels must be strictly decreasing"));
        }
        Ok(SignificanceLadder { levels, labels })
    }

    /// A ladder over `levels` with generated labels: the first is
    /// "significant", each further rung adds "highly"/"extremely"/"level k".
    pub fn from_levels(levels: Vec<f64>) -> Result<Self> {
        let labels = (0..levels.len())
            .map(|i| match i {
                0 => "significant".to_string(),
                1 => "highly significant".to_string(),
                2 => "extremely significant".to_string(),
                k => format!("significant at rung {}", k + 1),
            })
            .collect();
        Self::new(levels, labels)
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceRule {
    Pooled,
    #[default]
    Welch,
}

/// A test statistic with its degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    pub value: f64,
    pub df: f64,
}

fn mean_and_ss(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, ss)
}

/// Two-sample t statistic for `mean(A) - mean(B) - null_value`.
pub fn two_sample_t(
    group_a: &[f64],
    group_b: &[f64],
    rule: VarianceRule,
    null_value: f64,
) -> Result<Statistic> {
    if group_a.len() < 2 || group_b.len() < 2 {
        return Err(Error::degenerate("each group needs at least two observations"));
    }
    if group_a.iter().chain(group_b).any(|x| !x.is_finite()) {
        return Err(Error::degenerate("observations must be finite"));
    }
    if !null_value.is_finite() {
        return Err(Error::domain("null value must be finite"));
    }
    let (na, nb) = (group_a.len() as f64, group_b.len() as f64);
    let (mean_a, ss_a) = mean_and_ss(group_a);
    let (mean_b, ss_b) = mean_and_ss(group_b);
    if ss_a == 0.0 && ss_b == 0.0 {
        return Err(Error::degenerate("both groups have zero variance"));
    }
    let (var_a, var_b) = (ss_a / (na - 1.0), ss_b / (nb - 1.0));
    let (se, df) = match rule {
        VarianceRule::Pooled => {
            let df = na + nb - 2.0;
            let pooled = (ss_a + ss_b) / df;
            ((pooled * (1.0 / na + 1.0 / nb)).sqrt(), df)
        }
        VarianceRule::Welch => {
            let (ua, ub) = (var_a / na, var_b / nb);
            let df = (ua + ub).powi(2) / (ua * ua / (na - 1.0) + ub * ub / (nb - 1.0));
            ((ua + ub).sqrt(), df)
        }
    };
    let value = ((mean_a - mean_b) - null_value) / se;
    if !value.is_finite() {
        return Err(Error::degenerate("t statistic is not finite"));
    }
    Ok(Statistic { value, df })
}

/// Pearson chi-square statistic for an r×c table of counts.
pub fn chi_square_independence(table: &[Vec<f64>]) -> Result<Statistic> {
    let rows = table.len();
    let cols = table.first().map_or(0, Vec::len);
    if rows < 2 || cols < 2 {
        return Err(Error::degenerate(format!(
            "contingency table must be at least 2x2, got {rows}x{cols}"
        )));
    }
    if table.iter().any(|r| r.len() != cols) {
        return Err(Error::degenerate("contingency table rows differ in length"));
    }
    if table.iter().flatten().any(|&c| !(c >= 0.0 && c.is_finite())) {
        return Err(Error::degenerate("counts must be non-negative and finite"));
    }
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<f64> = (0..cols).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    if row_sums.iter().chain(&col_sums).any(|&s| s == 0.0) {
        return Err(Error::degenerate("a row or column total is zero"));
    }
    let total: f64 = row_sums.iter().sum();
    let mut value = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &observed) in row.iter().enumerate() {
            let expected = row_sums[i] * col_sums[j] / total;
            value += (observed - expected).powi(2) / expected;
        }
    }
    Ok(Statistic {
        value,
        df: ((rows - 1) * (cols - 1)) as f64,
    })
}

/// Cumulative p-value: the probability of the observed statistic and of
/// every more extreme one.
pub fn p_value(
    statistic: f64,
    dist: &Distribution,
    tails: Tails,
    direction: TailDirection,
) -> Result<f64> {
    if statistic.is_nan() {
        return Err(Error::domain("statistic is NaN"));
    }
    let is_chi2 = matches!(dist.kind(), crate::statdist::Kind::ChiSquare { .. });
    if is_chi2 && (tails == Tails::Two || direction == TailDirection::Lower) {
        return Err(Error::contract(
            "chi-square p-values are one-tailed on the upper tail",
        ));
    }
    if tails == Tails::Two && !dist.is_symmetric() {
        return Err(Error::contract(
            "two-tailed p-values need a distribution symmetric about zero",
        ));
    }
    let (lower, upper) = dist.tails(statistic);
    Ok(match (tails, direction) {
        (Tails::One, TailDirection::Upper) => upper,
        (Tails::One, TailDirection::Lower) => lower,
        (Tails::Two, _) => (2.0 * lower.min(upper)).min(1.0),
    })
}

/// The report line of a test of significance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub test_kind: TestKind,
    pub statistic: f64,
    pub df: f64,
    pub p_value: f64,
    pub tails: Tails,
    pub direction_observed: Sign,
    pub n_effective: usize,
}

impl TestResult {
    /// `t(30) = 2.25, p = .0160, 1-tailed`
    pub fn report_line(&self) -> String {
        let symbol = match self.test_kind {
            TestKind::TwoSampleT => "t",
            TestKind::ChiSquareIndependence => "chi2",
        };
        format!(
            "{symbol}({}) = {:.2}, {}, {}",
            fmt_df(self.df),
            self.statistic,
            fmt_p_clause(self.p_value),
            self.tails
        )
    }
}

fn clamp_p(p: f64) -> f64 {
    p.clamp(f64::MIN_POSITIVE, 1.0)
}

/// Run the two-sample t test of `hypothesis` on the data.
pub fn run_two_sample(
    group_a: &[f64],
    group_b: &[f64],
    hypothesis: &NullHypothesis,
    rule: VarianceRule,
) -> Result<TestResult> {
    if hypothesis.contrast() != Contrast::MeanDifference {
        return Err(Error::contract("a t test needs a mean-difference H0"));
    }
    let stat = two_sample_t(group_a, group_b, rule, hypothesis.null_value())?;
    let dist = Distribution::student_t(stat.df)?;
    let p = p_value(stat.value, &dist, hypothesis.tails(), hypothesis.tail_direction())?;
    Ok(TestResult {
        test_kind: TestKind::TwoSampleT,
        statistic: stat.value,
        df: stat.df,
        p_value: clamp_p(p),
        tails: hypothesis.tails(),
        direction_observed: Sign::of(stat.value),
        n_effective: group_a.len() + group_b.len(),
    })
}

/// Run the chi-square test of independence on a contingency table.
pub fn run_chi_square(table: &[Vec<f64>]) -> Result<TestResult> {
    let stat = chi_square_independence(table)?;
    let dist = Distribution::chi_square(stat.df)?;
    let p = p_value(stat.value, &dist, Tails::One, TailDirection::Upper)?;
    Ok(TestResult {
        test_kind: TestKind::ChiSquareIndependence,
        statistic: stat.value,
        df: stat.df,
        p_value: clamp_p(p),
        tails: Tails::One,
        direction_observed: Sign::of(stat.value),
        n_effective: table.iter().flatten().sum::<f64>().round() as usize,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    /// Exact p, always reported.
    pub p: f64,
    /// Label of the strictest rung reached; `None` when not significant.
    pub label: Option<String>,
    pub level: Option<f64>,
}

impl Assessment {
    pub fn is_significant(&self) -> bool {
        self.label.is_some()
    }

    pub fn describe(&self) -> String {
        match (&self.label, self.level) {
            (Some(label), Some(level)) => format!("{label} (p <= {})", fmt_level(level)),
            _ => "not significant".to_string(),
        }
    }
}

/// Grade `p` against the ladder: the label of the smallest level with
/// `p <= level`.
pub fn assess_significance(p: f64, ladder: &SignificanceLadder) -> Assessment {
    let hit = ladder
        .levels
        .iter()
        .zip(&ladder.labels)
        .rev()
        .find(|(&level, _)| p <= level);
    Assessment {
        p,
        label: hit.map(|(_, label)| label.clone()),
        level: hit.map(|(&level, _)| level),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Interpretation {
    /// Both readings of a significant result, neither privileged.
    DualStatement {
        p: f64,
        rare_event: String,
        inadequate_null: String,
    },
    NonSignificant {
        p: f64,
        direction: Sign,
        statistic: f64,
        note: String,
    },
}

impl Interpretation {
    pub fn text(&self) -> String {
        match self {
            Interpretation::DualStatement {
                rare_event,
                inadequate_null,
                ..
            } => format!("Either {rare_event}, or {inadequate_null}."),
            Interpretation::NonSignificant { note, .. } => note.clone(),
        }
    }
}

pub fn interpret(result: &TestResult, ladder: &SignificanceLadder) -> Interpretation {
    let assessment = assess_significance(result.p_value, ladder);
    if assessment.is_significant() {
        Interpretation::DualStatement {
            p: result.p_value,
            rare_event: format!(
                "a rare result with probability {} (or lower) under H0 has occurred",
                fmt_p(result.p_value)
            ),
            inadequate_null: "H0 does not account well for the research data".to_string(),
        }
    } else {
        let direction = match result.direction_observed {
            Sign::Positive => "positive",
            Sign::Negative => "negative",
            Sign::Zero => "null",
        };
        Interpretation::NonSignificant {
            p: result.p_value,
            direction: result.direction_observed,
            statistic: result.statistic,
            note: format!(
                "Not significant at any ladder level. The observed contrast was {direction} \
                 (statistic {:.2}); direction and magnitude may still inform later research.",
                result.statistic
            ),
        }
    }
}

/// `.0160`, `.4600`; values under .0001 print as `< .0001`.
pub fn fmt_p(p: f64) -> String {
    if p < 0.0001 {
        "< .0001".to_string()
    } else if p >= 1.0 {
        "1.0000".to_string()
    } else {
        format!("{p:.4}").trim_start_matches('0').to_string()
    }
}

/// `p = .0160` or `p < .0001`.
pub fn fmt_p_clause(p: f64) -> String {
    let s = fmt_p(p);
    if s.starts_with('<') {
        format!("p {s}")
    } else {
        format!("p = {s}")
    }
}

/// `.05`, `.025`, `.001`, `.20`: at least two decimals, no leading zero.
pub fn fmt_level(level: f64) -> String {
    let s = format!("{level:.6}");
    let s = s.trim_end_matches('0');
    let decimals = s.len() - s.find('.').map_or(s.len(), |i| i + 1);
    let s = format!("{s}{}", "0".repeat(2usize.saturating_sub(decimals)));
    s.strip_prefix('0').map(str::to_string).unwrap_or(s)
}

/// Integral degrees of freedom print without decimals.
pub fn fmt_df(df: f64) -> String {
    if (df - df.round()).abs() < 1e-9 {
        format!("{}", df.round() as i64)
    } else {
        format!("{df:.2}")
    }
}

fn fmt_number(x: f64) -> String {
    if x == x.round() {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}
