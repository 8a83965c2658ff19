//! Audits analysis traces for mixing of the two testing approaches.
//!
//! [`classify`] places a trace on the spectrum between the pure forms.
//! [`audit`] emits one finding per violated rule, each citing the construct
//! row (or argument passage) it enforces. [`repair`] proposes fixes.

pub mod registry;
pub mod repair;
pub mod trace;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use registry::{Citation, Passage, Row};
pub use repair::{fisher_repair, review, roving_beta, AuditReport, Repair, RepairBundle, RepairItem, ReviewOptions, RovingBeta};
pub use trace::{AnalysisTrace, ClaimKind, Event, Phase, SampleSizeMethod, TraceEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FindingCode {
    RovingAlpha,
    PAsType1,
    GradatedAlpha,
    PosthocAlpha,
    ProofClaim,
    AcceptH0WithoutPower,
    NoEffectSize,
    NoPowerDesign,
    ParadigmMix,
}

impl FindingCode {
    /// Emission order of [`audit`].
    pub const ALL: [FindingCode; 9] = [
        FindingCode::RovingAlpha,
        FindingCode::PAsType1,
        FindingCode::GradatedAlpha,
        FindingCode::PosthocAlpha,
        FindingCode::ProofClaim,
        FindingCode::AcceptH0WithoutPower,
        FindingCode::NoEffectSize,
        FindingCode::NoPowerDesign,
        FindingCode::ParadigmMix,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FindingCode::RovingAlpha => "ROVING_ALPHA",
            FindingCode::PAsType1 => "P_AS_TYPE1",
            FindingCode::GradatedAlpha => "GRADATED_ALPHA",
            FindingCode::PosthocAlpha => "POSTHOC_ALPHA",
            FindingCode::ProofClaim => "PROOF_CLAIM",
            FindingCode::AcceptH0WithoutPower => "ACCEPT_H0_WITHOUT_POWER",
            FindingCode::NoEffectSize => "NO_EFFECT_SIZE",
            FindingCode::NoPowerDesign => "NO_POWER_DESIGN",
            FindingCode::ParadigmMix => "PARADIGM_MIX",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            FindingCode::RovingAlpha
            | FindingCode::PAsType1
            | FindingCode::GradatedAlpha
            | FindingCode::PosthocAlpha
            | FindingCode::ProofClaim => Severity::Incoherent,
            FindingCode::AcceptH0WithoutPower
            | FindingCode::NoEffectSize
            | FindingCode::NoPowerDesign => Severity::Damaging,
            FindingCode::ParadigmMix => Severity::Advisory,
        }
    }

    pub fn citation(self) -> Citation {
        match self {
            FindingCode::RovingAlpha => Citation::Passage(Passage::RovingAlpha),
            FindingCode::PAsType1 => Citation::Row(Row::ErrorProbability),
            FindingCode::GradatedAlpha => Citation::Row(Row::CutOffPoint),
            FindingCode::PosthocAlpha => Citation::Row(Row::Approach),
            FindingCode::ProofClaim => Citation::Row(Row::Interpretation),
            FindingCode::AcceptH0WithoutPower => Citation::Row(Row::ResultOutsideCriticalRegion),
            FindingCode::NoEffectSize => Citation::Row(Row::AlternativeHypothesis),
            FindingCode::NoPowerDesign => Citation::Row(Row::SampleSizeCalculator),
            FindingCode::ParadigmMix => Citation::Row(Row::ResearchGoal),
        }
    }

    fn explanation(self) -> &'static str {
        match self {
            FindingCode::RovingAlpha => {
                "alpha was changed after the data were seen; a long-run error rate cannot be \
                 chosen to fit one result"
            }
            FindingCode::PAsType1 => {
                "an observed p was reported as the Type I error of this study; p describes the \
                 data under H0, alpha describes the procedure over many studies"
            }
            FindingCode::GradatedAlpha => {
                "alpha was split into grades; a fixed error rate has a single critical value"
            }
            FindingCode::PosthocAlpha => {
                "alpha was set after the data were seen; error rates belong to the design stage"
            }
            FindingCode::ProofClaim => {
                "the conclusion claims proof of H_A or disproof of H0; neither approach licenses that"
            }
            FindingCode::AcceptH0WithoutPower => {
                "H0 was accepted without an a priori power design; without adequate power a \
                 null result supports no conclusion"
            }
            FindingCode::NoEffectSize => {
                "alpha is used but no effect size was declared before the data"
            }
            FindingCode::NoPowerDesign => {
                "alpha is used but beta and a power-based sample size were not fixed before the data"
            }
            FindingCode::ParadigmMix => {
                "significance-grading vocabulary and error-rate vocabulary appear in the same analysis"
            }
        }
    }
}

impl fmt::Display for FindingCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Incoherent,
    Damaging,
    Advisory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditFinding {
    pub code: FindingCode,
    pub severity: Severity,
    pub citation: Citation,
    pub explanation: String,
    /// Indices of the events that triggered the rule; empty for rules that
    /// fire on an absence.
    pub events: Vec<usize>,
}

impl AuditFinding {
    fn new(code: FindingCode, events: Vec<usize>) -> Self {
        AuditFinding {
            code,
            severity: code.severity(),
            citation: code.citation(),
            explanation: code.explanation().to_string(),
            events,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    PureFisher,
    PureNeymanPearson,
    #[serde(rename = "fisher_leaning_nhst")]
    FisherLeaningNHST,
    #[serde(rename = "np_leaning_nhst")]
    NPLeaningNHST,
    Incoherent,
}

impl Classification {
    pub fn is_pure(self) -> bool {
        matches!(self, Classification::PureFisher | Classification::PureNeymanPearson)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::PureFisher => "PureFisher",
            Classification::PureNeymanPearson => "PureNeymanPearson",
            Classification::FisherLeaningNHST => "FisherLeaningNHST",
            Classification::NPLeaningNHST => "NPLeaningNHST",
            Classification::Incoherent => "Incoherent",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Events a pure significance analysis cannot contain.
pub fn fisher_forbidden(e: &TraceEvent) -> bool {
    match &e.event {
        Event::SetAlpha { .. }
        | Event::SetBeta { .. }
        | Event::AdjustAlpha { .. }
        | Event::GradateAlpha { .. }
        | Event::DeclareEffectSize { .. }
        | Event::JustifySampleSize { .. } => true,
        Event::ClaimConclusion { kind, type1_error } => {
            *kind != ClaimKind::RejectH0 || type1_error.is_some()
        }
        _ => false,
    }
}

/// Events a pure acceptance analysis cannot contain.
pub fn np_forbidden(e: &TraceEvent) -> bool {
    let posteriori = e.phase == Phase::Aposteriori;
    match &e.event {
        Event::SetSignificanceLadder { .. } | Event::GradateAlpha { .. } | Event::AdjustAlpha { .. } => true,
        Event::ClaimConclusion { kind, .. } => matches!(
            kind,
            ClaimKind::RejectH0 | ClaimKind::ProveHA | ClaimKind::DisproveH0
        ),
        Event::SetAlpha { .. }
        | Event::SetBeta { .. }
        | Event::DeclareEffectSize { .. }
        | Event::JustifySampleSize { .. }
        | Event::CorrectionApplied { .. } => posteriori,
        _ => false,
    }
}

fn apriori_has(trace: &AnalysisTrace, pred: impl Fn(&Event) -> bool) -> bool {
    trace
        .events()
        .iter()
        .any(|e| e.phase == Phase::Apriori && pred(&e.event))
}

/// A priori alpha, beta, effect size and a power-based sample size.
pub fn np_complete(trace: &AnalysisTrace) -> bool {
    apriori_has(trace, |e| matches!(e, Event::SetAlpha { .. }))
        && has_power_design(trace)
}

/// A priori beta, effect size and power-based sample size.
fn has_power_design(trace: &AnalysisTrace) -> bool {
    apriori_has(trace, |e| matches!(e, Event::SetBeta { .. }))
        && apriori_has(trace, |e| matches!(e, Event::DeclareEffectSize { .. }))
        && apriori_has(trace, |e| {
            matches!(
                e,
                Event::JustifySampleSize {
                    method: SampleSizeMethod::Power,
                    ..
                }
            )
        })
}

/// Deletions needed to reach each pure form: (to Fisher, to Neyman-Pearson).
pub fn distances(trace: &AnalysisTrace) -> (usize, usize) {
    let events = trace.events();
    (
        events.iter().filter(|e| fisher_forbidden(e)).count(),
        events.iter().filter(|e| np_forbidden(e)).count(),
    )
}

pub fn classify(trace: &AnalysisTrace) -> Result<Classification> {
    if trace.is_empty() {
        return Err(Error::Precondition("cannot classify an empty trace".into()));
    }
    let (to_fisher, to_np) = distances(trace);
    Ok(if to_fisher == 0 {
        Classification::PureFisher
    } else if to_np == 0 && np_complete(trace) {
        Classification::PureNeymanPearson
    } else if to_fisher < to_np {
        Classification::FisherLeaningNHST
    } else if to_np < to_fisher {
        Classification::NPLeaningNHST
    } else {
        Classification::Incoherent
    })
}

fn indices(trace: &AnalysisTrace, pred: impl Fn(&TraceEvent) -> bool) -> Vec<usize> {
    trace
        .events()
        .iter()
        .enumerate()
        .filter(|(_, e)| pred(e))
        .map(|(i, _)| i)
        .collect()
}

fn same_probability(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

/// Findings in rule order, at most one per rule.
pub fn audit(trace: &AnalysisTrace) -> Vec<AuditFinding> {
    let events = trace.events();
    let mut out = Vec::new();
    let mut emit = |code, hits: Vec<usize>| out.push(AuditFinding::new(code, hits));

    let roving = indices(trace, |e| {
        e.phase == Phase::Aposteriori && matches!(e.event, Event::AdjustAlpha { .. })
    });
    if !roving.is_empty() {
        emit(FindingCode::RovingAlpha, roving);
    }

    let observed: Vec<f64> = events
        .iter()
        .filter_map(|e| match e.event {
            Event::ObserveP { p } => Some(p),
            _ => None,
        })
        .collect();
    let p_as_alpha = indices(trace, |e| match e.event {
        Event::ClaimConclusion {
            type1_error: Some(x),
            ..
        } => observed.iter().any(|&p| same_probability(p, x)),
        _ => false,
    });
    if !p_as_alpha.is_empty() {
        emit(FindingCode::PAsType1, p_as_alpha);
    }

    let graded = indices(trace, |e| matches!(e.event, Event::GradateAlpha { .. }));
    if !graded.is_empty() {
        emit(FindingCode::GradatedAlpha, graded);
    }

    let posthoc = indices(trace, |e| {
        e.phase == Phase::Aposteriori && matches!(e.event, Event::SetAlpha { .. })
    });
    if !posthoc.is_empty() {
        emit(FindingCode::PosthocAlpha, posthoc);
    }

    let proof = indices(trace, |e| {
        matches!(
            e.event,
            Event::ClaimConclusion {
                kind: ClaimKind::ProveHA | ClaimKind::DisproveH0,
                ..
            }
        )
    });
    if !proof.is_empty() {
        emit(FindingCode::ProofClaim, proof);
    }

    // Absence rules wait for the a posteriori phase; once it has begun no
    // a priori event can arrive, so findings never disappear as a trace grows.
    let in_posteriori = events.iter().any(|e| e.phase == Phase::Aposteriori);
    let power_design = has_power_design(trace);

    let accept_h0 = indices(trace, |e| {
        matches!(
            e.event,
            Event::ClaimConclusion {
                kind: ClaimKind::AcceptH0,
                ..
            }
        )
    });
    if !accept_h0.is_empty() && !power_design {
        emit(FindingCode::AcceptH0WithoutPower, accept_h0);
    }

    let uses_alpha = events.iter().any(|e| {
        matches!(
            e.event,
            Event::SetAlpha { .. } | Event::AdjustAlpha { .. } | Event::GradateAlpha { .. }
        )
    });
    if in_posteriori && uses_alpha {
        if !apriori_has(trace, |e| matches!(e, Event::DeclareEffectSize { .. })) {
            emit(FindingCode::NoEffectSize, vec![]);
        }
        if !power_design {
            emit(FindingCode::NoPowerDesign, vec![]);
        }
    }

    let fisher_vocab = indices(trace, |e| {
        matches!(
            e.event,
            Event::SetSignificanceLadder { .. }
                | Event::ClaimConclusion {
                    kind: ClaimKind::RejectH0,
                    ..
                }
        )
    });
    let np_vocab = indices(trace, |e| {
        matches!(
            e.event,
            Event::SetAlpha { .. }
                | Event::SetBeta { .. }
                | Event::AdjustAlpha { .. }
                | Event::GradateAlpha { .. }
                | Event::ClaimConclusion {
                    kind: ClaimKind::AcceptHA | ClaimKind::ConcludeNothing,
                    ..
                }
        )
    });
    if !fisher_vocab.is_empty() && !np_vocab.is_empty() {
        let mut hits = fisher_vocab;
        hits.extend(np_vocab);
        hits.sort_unstable();
        emit(FindingCode::ParadigmMix, hits);
    }

    out
}
