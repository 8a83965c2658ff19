//! Reports: a structured record of one command, with a JSON rendering for
//! machines and a text rendering for people.
//!
//! The two testing approaches keep separate vocabularies. Both renderers
//! refuse to emit a significance report that talks about alpha or power,
//! or an acceptance report that grades results.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::audit::{AuditReport, Repair, RepairItem};
use crate::error::{Error, Result};
use crate::fisher::{fmt_df, fmt_level, fmt_p, fmt_p_clause, Assessment, CorrectedTest, Interpretation, TestResult, VarianceRule};
use crate::longrun::{Scenario, SimulationReport};
use crate::np::{AcceptanceDesign, AcceptanceResult, Convention};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Paradigm {
    Fisher,
    NeymanPearson,
    Audit,
    LongRun,
}

impl Paradigm {
    /// Tokens a rendering of this paradigm may not contain (matched
    /// case-insensitively).
    pub fn forbidden_tokens(self) -> &'static [&'static str] {
        match self {
            Paradigm::Fisher => &["alpha", "α", "accept h0", "power"],
            Paradigm::NeymanPearson => &["significant", "reject h0 strongly"],
            Paradigm::Audit | Paradigm::LongRun => &[],
        }
    }
}

/// Fail if `rendered` uses a token outside the paradigm's vocabulary.
pub fn check_vocabulary(paradigm: Paradigm, rendered: &str) -> Result<()> {
    let lower = rendered.to_lowercase();
    match paradigm
        .forbidden_tokens()
        .iter()
        .find(|t| lower.contains(*t))
    {
        Some(t) => Err(Error::contract(format!(
            "{paradigm:?} report would contain the token `{t}`"
        ))),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub name: String,
    pub n: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceBody {
    pub hypothesis: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance: Option<VarianceRule>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub groups: Vec<GroupSummary>,
    pub result: TestResult,
    pub ladder: Vec<f64>,
    pub assessment: Assessment,
    pub interpretation: Interpretation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceBody {
    pub design: AcceptanceDesign,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub groups: Vec<GroupSummary>,
    pub result: AcceptanceResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionBody {
    pub method: String,
    pub level: f64,
    pub tests: Vec<CorrectedTest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Body {
    Design { design: AcceptanceDesign },
    Significance(SignificanceBody),
    Acceptance(AcceptanceBody),
    Correction(CorrectionBody),
    Audit(AuditReport),
    Simulation(SimulationReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub paradigm: Paradigm,
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub body: Body,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(paradigm: Paradigm, command: &str, body: Body) -> Self {
        Report {
            paradigm,
            command: command.to_string(),
            inputs: BTreeMap::new(),
            body,
            warnings: Vec::new(),
        }
    }

    pub fn with_input(mut self, key: &str, value: impl ToString) -> Self {
        self.inputs.insert(key.to_string(), value.to_string());
        self
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::contract(format!("cannot serialize report: {e}")))?;
        s.push('\n');
        check_vocabulary(self.paradigm, &s)?;
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::parse(e.line(), e.to_string()))
    }

    pub fn to_text(&self) -> Result<String> {
        let mut out = String::new();
        match &self.body {
            Body::Design { design } => design_text(&mut out, design),
            Body::Significance(b) => significance_text(&mut out, b),
            Body::Acceptance(b) => acceptance_text(&mut out, b),
            Body::Correction(b) => correction_text(&mut out, b),
            Body::Audit(b) => audit_text(&mut out, b),
            Body::Simulation(b) => simulation_text(&mut out, b),
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        check_vocabulary(self.paradigm, &out)?;
        Ok(out)
    }
}

fn convention(c: Option<Convention>) -> &'static str {
    match c {
        Some(Convention::Small) => " (small)",
        Some(Convention::Medium) => " (medium)",
        Some(Convention::Large) => " (large)",
        None => "",
    }
}

fn design_text(out: &mut String, d: &AcceptanceDesign) {
    let (na, nb) = d.group_sizes();
    let sizes = if na == nb {
        format!("{na} per group")
    } else {
        format!("{na} and {nb}")
    };
    let _ = writeln!(out, "Neyman-Pearson design (frozen)");
    let _ = writeln!(out, "test: {}, {}", d.test_kind(), d.tails());
    let _ = writeln!(out, "effect size: d = {:.2}{}", d.effect().d(), convention(d.effect().convention()));
    let _ = writeln!(
        out,
        "alpha = {}, planned beta = {}",
        fmt_level(d.alpha().value()),
        fmt_level(d.target_beta())
    );
    let _ = writeln!(out, "sample size: {sizes} (df = {})", fmt_df(d.df()));
    let _ = writeln!(out, "critical value: CV_t = {:.3}", d.critical_value());
    let _ = writeln!(out, "power: {:.4} (achieved beta = {:.4})", d.power(), d.beta());
    let _ = writeln!(
        out,
        "MES: d = {:.3} (normal approximation, {}: z * sqrt(1/n1 + 1/n2))",
        d.mes(),
        d.tails()
    );
    if (d.beta() - d.target_beta()).abs() > 0.01 {
        let _ = writeln!(
            out,
            "note: achieved beta {:.4} differs from the planned beta {}; \
             report the achieved value",
            d.beta(),
            fmt_level(d.target_beta())
        );
    }
}

fn groups_line(out: &mut String, groups: &[GroupSummary]) {
    if groups.is_empty() {
        return;
    }
    let parts: Vec<String> = groups
        .iter()
        .map(|g| format!("{} (n = {}, mean = {:.2})", g.name, g.n, g.mean))
        .collect();
    let _ = writeln!(out, "groups: {}", parts.join(", "));
}

fn significance_text(out: &mut String, b: &SignificanceBody) {
    let _ = writeln!(out, "Fisher test of significance");
    let _ = writeln!(out, "{}", b.hypothesis);
    groups_line(out, &b.groups);
    if let Some(v) = b.variance {
        let _ = writeln!(
            out,
            "variance: {}",
            match v {
                VarianceRule::Pooled => "pooled",
                VarianceRule::Welch => "Welch",
            }
        );
    }
    let _ = writeln!(out, "{}", b.result.report_line());
    let ladder: Vec<String> = b.ladder.iter().map(|l| fmt_level(*l)).collect();
    let _ = writeln!(out, "ladder: {}", ladder.join(" / "));
    let _ = writeln!(out, "grade: {}", b.assessment.describe());
    let _ = writeln!(out, "interpretation: {}", b.interpretation.text());
}

fn acceptance_text(out: &mut String, b: &AcceptanceBody) {
    let d = &b.design;
    let _ = writeln!(out, "Neyman-Pearson test of acceptance");
    let _ = writeln!(
        out,
        "design: d = {:.2}, alpha = {}, beta = {}, n = {} per group, power = {:.4}",
        d.effect().d(),
        fmt_level(d.alpha().value()),
        fmt_level(d.target_beta()),
        d.n_per_group(),
        d.power()
    );
    groups_line(out, &b.groups);
    let _ = writeln!(out, "{}", b.result.report_line());
    for dev in &b.result.deviations {
        let _ = writeln!(out, "protocol deviation: {dev}");
    }
}

fn correction_text(out: &mut String, b: &CorrectionBody) {
    let _ = writeln!(
        out,
        "Multiple-test correction: {}, family level {}, m = {}",
        b.method,
        fmt_level(b.level),
        b.tests.len()
    );
    let _ = writeln!(out, "{:<6}{:<10}{:<12}decision", "test", "p", "threshold");
    for t in &b.tests {
        let _ = writeln!(
            out,
            "{:<6}{:<10}{:<12}{}",
            t.index + 1,
            fmt_p(t.p),
            fmt_level(t.threshold),
            if t.rejected { "reject H0" } else { "retain H0" }
        );
    }
}

fn audit_text(out: &mut String, r: &AuditReport) {
    let _ = writeln!(out, "Audit of analysis trace");
    let _ = writeln!(out, "classification: {}", r.classification);
    if r.findings.is_empty() {
        let _ = writeln!(out, "findings: none");
    } else {
        let _ = writeln!(out, "findings ({}):", r.findings.len());
        for f in &r.findings {
            let sev = format!("{:?}", f.severity).to_lowercase();
            let _ = writeln!(out, "  {} [{sev}] cites {}", f.code, f.citation);
            let _ = writeln!(out, "    {}", f.explanation);
        }
    }
    if r.repairs.is_empty() {
        return;
    }
    let _ = writeln!(out, "repairs:");
    for repair in &r.repairs {
        match repair {
            Repair::EffectSizeAndPower(bundle) => {
                for item in &bundle.items {
                    match item {
                        RepairItem::ReportEffectSizes { expected_d } => {
                            let expected = match expected_d {
                                Some(d) => format!("the declared d = {d}"),
                                None => "an expected d declared before the data".to_string(),
                            };
                            let _ = writeln!(
                                out,
                                "  report effect sizes: {expected}, and the observed d"
                            );
                        }
                        RepairItem::PlanSampleSize {
                            d,
                            alpha,
                            beta,
                            tails,
                            n_per_group,
                            defaults,
                        } => {
                            let _ = writeln!(
                                out,
                                "  plan the sample size: n = {n_per_group} per group for d = {d}, \
                                 alpha = {}, beta = {}, {tails}",
                                fmt_level(*alpha),
                                fmt_level(*beta)
                            );
                            if !defaults.is_empty() {
                                let _ = writeln!(out, "    defaults used for: {}", defaults.join(", "));
                            }
                        }
                    }
                }
            }
            Repair::RovingBeta(rb) => {
                let _ = writeln!(
                    out,
                    "  roved pair: (alpha, beta) = ({}, {:.4}); roving power = {:.4}",
                    fmt_level(rb.roved_alpha),
                    rb.roved_beta,
                    rb.roving_power
                );
                let _ = writeln!(
                    out,
                    "    design pair: ({}, {:.4}) at d = {}, n = {} per group, {}",
                    fmt_level(rb.original_alpha),
                    rb.original_beta,
                    rb.effect_size,
                    rb.n_per_group,
                    rb.tails
                );
                let _ = writeln!(out, "    {}", rb.instruction);
            }
            Repair::RovingNotCompensated { old, new, reason } => {
                let _ = writeln!(
                    out,
                    "  alpha {} -> {}: not compensated ({reason})",
                    fmt_level(*old),
                    fmt_level(*new)
                );
            }
        }
    }
}

fn scenario_name(s: &Scenario) -> String {
    match s {
        Scenario::Type1Rate => "type1".into(),
        Scenario::PowerRate => "power".into(),
        Scenario::PDance => "pdance".into(),
        Scenario::FamilywiseInflation { m, correction } => {
            format!("familywise (m = {m}, correction = {})", format!("{correction:?}").to_lowercase())
        }
    }
}

fn simulation_text(out: &mut String, r: &SimulationReport) {
    let s = &r.spec;
    let _ = writeln!(out, "Long-run simulation: {}", scenario_name(&s.scenario));
    let _ = writeln!(
        out,
        "n per group = {}, level = {}, {}, true d = {}, replications = {}, seed = {}",
        s.n_per_group,
        fmt_level(s.level),
        s.tails,
        s.true_effect,
        s.replications,
        s.seed
    );
    let _ = writeln!(
        out,
        "observed rate = {:.4}, expected = {:.4}, MC s.e. = {:.5}, {}",
        r.observed_rate,
        r.expected_rate,
        r.mc_standard_error,
        if r.pass { "pass" } else { "FAIL" }
    );
    if let Some(q) = &r.p_quantiles {
        let _ = writeln!(out, "p quantiles:");
        for (name, v) in [
            ("min", q.min),
            ("25%", q.q25),
            ("median", q.median),
            ("75%", q.q75),
            ("max", q.max),
        ] {
            let _ = writeln!(out, "  {name:<7}{v:.3e}");
        }
        let _ = writeln!(out, "  75%/25% ratio = {:.1}", q.iqr_ratio());
    }
}

/// One-line significance summary, used where a full report is not wanted.
pub fn significance_line(result: &TestResult) -> String {
    format!(
        "{} ({})",
        result.report_line(),
        fmt_p_clause(result.p_value)
    )
}
