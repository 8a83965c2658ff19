//! Repairs for audited traces: the effect-size and power bundle for
//! significance-leaning analyses, and roved betas to go with roved alphas.

use serde::{Deserialize, Serialize};

use super::trace::{AnalysisTrace, Event, Phase};
use super::{audit, classify, AuditFinding, Classification};
use crate::error::{Error, Result};
use crate::np::{power, required_n, AlphaLevel, EffectSize};
use crate::types::Tails;

pub const DEFAULT_D: f64 = 0.5;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_BETA: f64 = 0.20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "item", rename_all = "snake_case")]
pub enum RepairItem {
    /// Report the expected effect size before the data and the observed one
    /// after.
    ReportEffectSizes { expected_d: Option<f64> },
    /// Plan the sample size for adequate power.
    PlanSampleSize {
        d: f64,
        alpha: f64,
        beta: f64,
        tails: Tails,
        n_per_group: usize,
        /// Parameters that were not in the trace and took their defaults.
        defaults: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RepairBundle {
    pub items: Vec<RepairItem>,
}

impl RepairBundle {
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

fn last<T>(trace: &AnalysisTrace, pick: impl Fn(&Event) -> Option<T>) -> Option<T> {
    trace.events().iter().rev().find_map(|e| pick(&e.event))
}

fn declared_d(trace: &AnalysisTrace) -> Option<f64> {
    last(trace, |e| match e {
        Event::DeclareEffectSize { d } => Some(*d),
        _ => None,
    })
}

fn declared_n(trace: &AnalysisTrace) -> Option<u64> {
    last(trace, |e| match e {
        Event::JustifySampleSize { n, .. } => Some(*n),
        _ => None,
    })
}

fn declared_tails(trace: &AnalysisTrace) -> Option<Tails> {
    last(trace, |e| match e {
        Event::RunTest { tails, .. } => Some(*tails),
        _ => None,
    })
}

/// Effect-size reporting and an a priori sample size, for traces on the
/// significance side. Declared parameters are used where present and the
/// rest default to d = .5, alpha = .05, beta = .20.
pub fn fisher_repair(trace: &AnalysisTrace) -> Result<RepairBundle> {
    // a trace that already carries both constructs has nothing to add,
    // whichever side its other events lean to
    if declared_d(trace).is_some() && declared_n(trace).is_some() {
        return Ok(RepairBundle::default());
    }
    let class = classify(trace)?;
    if !matches!(
        class,
        Classification::PureFisher | Classification::FisherLeaningNHST
    ) {
        return Err(Error::Precondition(format!(
            "the effect-size and power bundle applies to significance-side traces, not {class}"
        )));
    }

    let mut defaults = Vec::new();
    let mut or_default = |v: Option<f64>, fallback: f64, name: &str| {
        v.unwrap_or_else(|| {
            defaults.push(name.to_string());
            fallback
        })
    };
    let d = or_default(declared_d(trace), DEFAULT_D, "d");
    let alpha = or_default(
        last(trace, |e| match e {
            Event::SetAlpha { level } => Some(*level),
            _ => None,
        }),
        DEFAULT_ALPHA,
        "alpha",
    );
    let beta = or_default(
        last(trace, |e| match e {
            Event::SetBeta { level } => Some(*level),
            _ => None,
        }),
        DEFAULT_BETA,
        "beta",
    );
    let tails = declared_tails(trace).unwrap_or_else(|| {
        defaults.push("tails".to_string());
        Tails::One
    });

    let effect = EffectSize::new(d)?;
    let n = required_n(effect.d(), AlphaLevel::new(alpha)?, beta, tails)?;
    Ok(RepairBundle {
        items: vec![
            RepairItem::ReportEffectSizes {
                expected_d: declared_d(trace),
            },
            RepairItem::PlanSampleSize {
                d,
                alpha,
                beta,
                tails,
                n_per_group: n,
                defaults,
            },
        ],
    })
}

/// A roved alpha together with the beta it implies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RovingBeta {
    pub original_alpha: f64,
    pub roved_alpha: f64,
    pub effect_size: f64,
    pub n_per_group: usize,
    pub tails: Tails,
    pub original_beta: f64,
    pub roved_beta: f64,
    pub roving_power: f64,
    pub instruction: String,
}

pub fn roving_beta(
    original_alpha: f64,
    roved_alpha: f64,
    d: f64,
    n_per_group: usize,
    tails: Tails,
) -> Result<RovingBeta> {
    let original = AlphaLevel::new(original_alpha)?;
    let roved = AlphaLevel::new(roved_alpha)?;
    if roved_alpha > original_alpha {
        return Err(Error::domain(format!(
            "alpha roved upward ({original_alpha} to {roved_alpha}); only downward roving is compensated"
        )));
    }
    let effect = EffectSize::new(d).map_err(|_| {
        Error::domain("a non-zero expected effect size is needed; supply the design parameters")
    })?;
    if n_per_group < 2 {
        return Err(Error::domain(
            "the per-group sample size is needed; supply the design parameters",
        ));
    }
    let original_beta = 1.0 - power(effect.d(), n_per_group, n_per_group, original, tails)?;
    let roving_power = power(effect.d(), n_per_group, n_per_group, roved, tails)?;
    Ok(RovingBeta {
        original_alpha,
        roved_alpha,
        effect_size: d,
        n_per_group,
        tails,
        original_beta,
        roved_beta: 1.0 - roving_power,
        roving_power,
        instruction: "report the roved alpha and its roved beta together for every test".to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "repair", rename_all = "snake_case")]
pub enum Repair {
    EffectSizeAndPower(RepairBundle),
    RovingBeta(RovingBeta),
    RovingNotCompensated { old: f64, new: f64, reason: String },
}

/// Values that override or fill in what the trace declares.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReviewOptions {
    pub d: Option<f64>,
    pub n_per_group: Option<usize>,
    pub tails: Option<Tails>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub classification: Classification,
    pub findings: Vec<AuditFinding>,
    pub repairs: Vec<Repair>,
}

/// Classify, audit and propose repairs in one pass.
pub fn review(trace: &AnalysisTrace, options: ReviewOptions) -> Result<AuditReport> {
    let classification = classify(trace)?;
    let findings = audit(trace);
    let mut repairs = Vec::new();

    if matches!(
        classification,
        Classification::PureFisher | Classification::FisherLeaningNHST
    ) {
        let bundle = fisher_repair(trace)?;
        if !bundle.is_empty() {
            repairs.push(Repair::EffectSizeAndPower(bundle));
        }
    }

    let d = options.d.or_else(|| declared_d(trace));
    let n = options
        .n_per_group
        .or_else(|| declared_n(trace).map(|n| n as usize));
    let tails = options
        .tails
        .or_else(|| declared_tails(trace))
        .unwrap_or(Tails::One);
    for e in trace.events() {
        let (old, new) = match (e.phase, &e.event) {
            (Phase::Aposteriori, Event::AdjustAlpha { old, new }) => (*old, *new),
            _ => continue,
        };
        if new > old {
            repairs.push(Repair::RovingNotCompensated {
                old,
                new,
                reason: "upward roving is flagged but has no compensating beta".into(),
            });
            continue;
        }
        match (d, n) {
            (Some(d), Some(n)) => match roving_beta(old, new, d, n, tails) {
                Ok(r) => repairs.push(Repair::RovingBeta(r)),
                Err(err) => repairs.push(Repair::RovingNotCompensated {
                    old,
                    new,
                    reason: err.to_string(),
                }),
            },
            _ => repairs.push(Repair::RovingNotCompensated {
                old,
                new,
                reason: "effect size and per-group n are unknown; supply --d and --n".into(),
            }),
        }
    }

    Ok(AuditReport {
        classification,
        findings,
        repairs,
    })
}
