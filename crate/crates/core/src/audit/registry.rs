//! The construct comparison the audit rules are built on: one row per
//! concept on which the two approaches differ, each either covered by a
//! rule or marked out of scope with a reason.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::FindingCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Row {
    TestObject,
    Approach,
    ResearchGoal,
    HypothesesUnderTest,
    AlternativeHypothesis,
    TestDistribution,
    CutOffPoint,
    SampleSizeCalculator,
    StatisticOfInterest,
    ErrorProbability,
    ResultOutsideCriticalRegion,
    ResultInCriticalRegion,
    Interpretation,
    NextSteps,
}

/// Argument passages cited by rules that rest on more than one row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Passage {
    /// Lowering alpha after the fact to sit just above an observed p.
    RovingAlpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "cites", content = "ref", rename_all = "snake_case")]
pub enum Citation {
    Row(Row),
    Passage(Passage),
}

impl fmt::Display for Citation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Citation::Row(r) => write!(f, "construct row \"{}\"", construct_row(*r).concept),
            Citation::Passage(p) => write!(f, "passage \"{}\"", passage(*p).title),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coverage {
    Rules(&'static [FindingCode]),
    NonGoal(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstructRow {
    pub row: Row,
    pub concept: &'static str,
    pub fisher: &'static str,
    pub neyman_pearson: &'static str,
    pub coverage: Coverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PassageEntry {
    pub passage: Passage,
    pub title: &'static str,
    pub summary: &'static str,
}

pub const ROWS: [ConstructRow; 14] = [
    ConstructRow {
        row: Row::TestObject,
        concept: "Test object",
        fisher: "probability of the data given H0",
        neyman_pearson: "probability of the data given H_M",
        coverage: Coverage::NonGoal(
            "misreading p as the probability of H0 is an epistemic claim; traces carry no event for it",
        ),
    },
    ConstructRow {
        row: Row::Approach,
        concept: "Approach",
        fisher: "a posteriori",
        neyman_pearson: "a priori",
        coverage: Coverage::Rules(&[FindingCode::PosthocAlpha]),
    },
    ConstructRow {
        row: Row::ResearchGoal,
        concept: "Research goal",
        fisher: "evidence against H0",
        neyman_pearson: "a decision between H_M and H_A",
        coverage: Coverage::Rules(&[FindingCode::ParadigmMix]),
    },
    ConstructRow {
        row: Row::HypothesesUnderTest,
        concept: "Hypotheses under test",
        fisher: "H0 only",
        neyman_pearson: "H_M, with H_A as its competitor",
        coverage: Coverage::NonGoal(
            "traces do not record hypothesis content; the engines keep H0 and H_M as distinct types",
        ),
    },
    ConstructRow {
        row: Row::AlternativeHypothesis,
        concept: "Alternative hypothesis",
        fisher: "none",
        neyman_pearson: "needed, with a declared effect size",
        coverage: Coverage::Rules(&[FindingCode::NoEffectSize]),
    },
    ConstructRow {
        row: Row::TestDistribution,
        concept: "Probability distribution of the test",
        fisher: "the distribution under H0",
        neyman_pearson: "the distributions under H_M and H_A",
        coverage: Coverage::NonGoal(
            "a computational matter settled inside the engines, not visible in a trace",
        ),
    },
    ConstructRow {
        row: Row::CutOffPoint,
        concept: "Cut-off point",
        fisher: "a gradable level of significance",
        neyman_pearson: "a fixed critical value; alpha is not graded",
        coverage: Coverage::Rules(&[FindingCode::GradatedAlpha]),
    },
    ConstructRow {
        row: Row::SampleSizeCalculator,
        concept: "Sample size calculator",
        fisher: "none",
        neyman_pearson: "from effect size, alpha and beta",
        coverage: Coverage::Rules(&[FindingCode::NoPowerDesign]),
    },
    ConstructRow {
        row: Row::StatisticOfInterest,
        concept: "Statistic of interest",
        fisher: "the exact p-value",
        neyman_pearson: "the critical value, or p as a proxy for it",
        coverage: Coverage::NonGoal(
            "both statistics are legitimate outputs; the report renderer keeps their vocabularies apart",
        ),
    },
    ConstructRow {
        row: Row::ErrorProbability,
        concept: "Error probability",
        fisher: "p is not an error rate",
        neyman_pearson: "alpha and beta are long-run error rates",
        coverage: Coverage::Rules(&[FindingCode::PAsType1]),
    },
    ConstructRow {
        row: Row::ResultOutsideCriticalRegion,
        concept: "Result outside the critical region",
        fisher: "H0 is not rejected and nothing is accepted",
        neyman_pearson: "accept H_M with good power, otherwise no conclusion",
        coverage: Coverage::Rules(&[FindingCode::AcceptH0WithoutPower]),
    },
    ConstructRow {
        row: Row::ResultInCriticalRegion,
        concept: "Result in the critical region",
        fisher: "H0 is rejected at the level reached",
        neyman_pearson: "accept H_A",
        coverage: Coverage::Rules(&[FindingCode::ProofClaim]),
    },
    ConstructRow {
        row: Row::Interpretation,
        concept: "Interpretation",
        fisher: "a rare event, or an inadequate H0",
        neyman_pearson: "a course of action, not a truth claim",
        coverage: Coverage::Rules(&[FindingCode::ProofClaim]),
    },
    ConstructRow {
        row: Row::NextSteps,
        concept: "Next steps",
        fisher: "replicate and refine the hypothesis",
        neyman_pearson: "act on the decision",
        coverage: Coverage::NonGoal("follow-up research happens outside the analysis a trace records"),
    },
];

pub const PASSAGES: [PassageEntry; 1] = [PassageEntry {
    passage: Passage::RovingAlpha,
    title: "roving alphas",
    summary: "matching alpha to an observed p after the fact; compensate by reporting the roved beta",
}];

pub fn construct_row(row: Row) -> &'static ConstructRow {
    ROWS.iter()
        .find(|r| r.row == row)
        .expect("every row is registered")
}

pub fn passage(p: Passage) -> &'static PassageEntry {
    PASSAGES
        .iter()
        .find(|e| e.passage == p)
        .expect("every passage is registered")
}

/// True when the citation resolves to a registry entry.
pub fn resolves(c: Citation) -> bool {
    match c {
        Citation::Row(r) => ROWS.iter().any(|e| e.row == r),
        Citation::Passage(p) => PASSAGES.iter().any(|e| e.passage == p),
    }
}
