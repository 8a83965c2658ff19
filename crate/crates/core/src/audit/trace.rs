//! Analysis traces: what a researcher did, in order, tagged a priori or a
//! posteriori.
//!
//! Text form is one event per line, `phase event key=value ...`:
//!
//! ```text
//! # comments and blank lines are ignored
//! apriori set_alpha level=0.05
//! apriori justify_sample_size n=64 method=power
//! aposteriori observe_p p=0.016
//! aposteriori claim_conclusion kind=reject_h0
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Tails, TestKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Apriori,
    Aposteriori,
}

impl Phase {
    fn keyword(self) -> &'static str {
        match self {
            Phase::Apriori => "apriori",
            Phase::Aposteriori => "aposteriori",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSizeMethod {
    Power,
    Convenience,
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimKind {
    RejectH0,
    AcceptH0,
    AcceptHA,
    ProveHA,
    DisproveH0,
    ConcludeNothing,
}

impl ClaimKind {
    const ALL: [ClaimKind; 6] = [
        ClaimKind::RejectH0,
        ClaimKind::AcceptH0,
        ClaimKind::AcceptHA,
        ClaimKind::ProveHA,
        ClaimKind::DisproveH0,
        ClaimKind::ConcludeNothing,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            ClaimKind::RejectH0 => "reject_h0",
            ClaimKind::AcceptH0 => "accept_h0",
            ClaimKind::AcceptHA => "accept_ha",
            ClaimKind::ProveHA => "prove_ha",
            ClaimKind::DisproveH0 => "disprove_h0",
            ClaimKind::ConcludeNothing => "conclude_nothing",
        }
    }
}

impl SampleSizeMethod {
    const ALL: [SampleSizeMethod; 3] = [
        SampleSizeMethod::Power,
        SampleSizeMethod::Convenience,
        SampleSizeMethod::Heuristic,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            SampleSizeMethod::Power => "power",
            SampleSizeMethod::Convenience => "convenience",
            SampleSizeMethod::Heuristic => "heuristic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    SetAlpha { level: f64 },
    SetSignificanceLadder { levels: Vec<f64> },
    SetBeta { level: f64 },
    DeclareEffectSize { d: f64 },
    JustifySampleSize { n: u64, method: SampleSizeMethod },
    ObserveP { p: f64 },
    AdjustAlpha { old: f64, new: f64 },
    GradateAlpha { levels: Vec<f64> },
    ClaimConclusion {
        kind: ClaimKind,
        /// Set when the claim states its Type I error probability.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        type1_error: Option<f64>,
    },
    RunTest { kind: TestKind, tails: Tails },
    CorrectionApplied { method: String, m: u64 },
}

impl Event {
    pub fn keyword(&self) -> &'static str {
        match self {
            Event::SetAlpha { .. } => "set_alpha",
            Event::SetSignificanceLadder { .. } => "set_significance_ladder",
            Event::SetBeta { .. } => "set_beta",
            Event::DeclareEffectSize { .. } => "declare_effect_size",
            Event::JustifySampleSize { .. } => "justify_sample_size",
            Event::ObserveP { .. } => "observe_p",
            Event::AdjustAlpha { .. } => "adjust_alpha",
            Event::GradateAlpha { .. } => "gradate_alpha",
            Event::ClaimConclusion { .. } => "claim_conclusion",
            Event::RunTest { .. } => "run_test",
            Event::CorrectionApplied { .. } => "correction_applied",
        }
    }
}

fn join(levels: &[f64]) -> String {
    levels.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())?;
        match self {
            Event::SetAlpha { level } | Event::SetBeta { level } => write!(f, " level={level}"),
            Event::SetSignificanceLadder { levels } | Event::GradateAlpha { levels } => {
                write!(f, " levels={}", join(levels))
            }
            Event::DeclareEffectSize { d } => write!(f, " d={d}"),
            Event::JustifySampleSize { n, method } => {
                write!(f, " n={n} method={}", method.keyword())
            }
            Event::ObserveP { p } => write!(f, " p={p}"),
            Event::AdjustAlpha { old, new } => write!(f, " old={old} new={new}"),
            Event::ClaimConclusion { kind, type1_error } => {
                write!(f, " kind={}", kind.keyword())?;
                match type1_error {
                    Some(e) => write!(f, " type1_error={e}"),
                    None => Ok(()),
                }
            }
            Event::RunTest { kind, tails } => write!(f, " kind={kind} tails={}", tails.count()),
            Event::CorrectionApplied { method, m } => write!(f, " method={method} m={m}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub phase: Phase,
    #[serde(flatten)]
    pub event: Event,
}

impl TraceEvent {
    pub fn new(phase: Phase, event: Event) -> Self {
        TraceEvent { phase, event }
    }

    pub fn apriori(event: Event) -> Self {
        Self::new(Phase::Apriori, event)
    }

    pub fn aposteriori(event: Event) -> Self {
        Self::new(Phase::Aposteriori, event)
    }
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.phase.keyword(), self.event)
    }
}

/// An ordered list of events in which no a priori event follows an a
/// posteriori one.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<TraceEvent>", into = "Vec<TraceEvent>")]
pub struct AnalysisTrace {
    events: Vec<TraceEvent>,
}

impl AnalysisTrace {
    pub fn new(events: Vec<TraceEvent>) -> Result<Self> {
        if let Some(i) = events
            .windows(2)
            .position(|w| w[0].phase == Phase::Aposteriori && w[1].phase == Phase::Apriori)
        {
            return Err(Error::parse(
                i + 2,
                "a priori event after an a posteriori event",
            ));
        }
        for (i, e) in events.iter().enumerate() {
            validate(&e.event).map_err(|m| Error::parse(i + 1, m))?;
        }
        Ok(AnalysisTrace { events })
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    /// Append an event, keeping the phase order.
    pub fn push(&mut self, event: TraceEvent) -> Result<()> {
        if event.phase == Phase::Apriori
            && self.events.last().is_some_and(|e| e.phase == Phase::Aposteriori)
        {
            return Err(Error::parse(
                self.events.len() + 1,
                "a priori event after an a posteriori event",
            ));
        }
        validate(&event.event).map_err(|m| Error::parse(self.events.len() + 1, m))?;
        self.events.push(event);
        Ok(())
    }

    /// The trace with the events at `indices` removed.
    pub fn without(&self, indices: &[usize]) -> AnalysisTrace {
        AnalysisTrace {
            events: self
                .events
                .iter()
                .enumerate()
                .filter(|(i, _)| !indices.contains(i))
                .map(|(_, e)| e.clone())
                .collect(),
        }
    }

    /// Parse the line-oriented text form. Line numbers in errors are 1-based.
    pub fn parse(text: &str) -> Result<Self> {
        let mut events = Vec::new();
        let mut seen_posteriori = false;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let event = parse_line(line).map_err(|m| Error::parse(line_no, m))?;
            match event.phase {
                Phase::Aposteriori => seen_posteriori = true,
                Phase::Apriori if seen_posteriori => {
                    return Err(Error::parse(
                        line_no,
                        "a priori event after an a posteriori event",
                    ))
                }
                Phase::Apriori => {}
            }
            validate(&event.event).map_err(|m| Error::parse(line_no, m))?;
            events.push(event);
        }
        Ok(AnalysisTrace { events })
    }
}

impl FromStr for AnalysisTrace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AnalysisTrace::parse(s)
    }
}

impl fmt::Display for AnalysisTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.events {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}

impl TryFrom<Vec<TraceEvent>> for AnalysisTrace {
    type Error = Error;

    fn try_from(events: Vec<TraceEvent>) -> Result<Self> {
        AnalysisTrace::new(events)
    }
}

impl From<AnalysisTrace> for Vec<TraceEvent> {
    fn from(t: AnalysisTrace) -> Self {
        t.events
    }
}

fn probability(x: f64, what: &str) -> std::result::Result<(), String> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(format!("{what} must lie in [0, 1], got {x}"))
    }
}

fn validate(event: &Event) -> std::result::Result<(), String> {
    match event {
        Event::SetAlpha { level } => probability(*level, "alpha"),
        Event::SetBeta { level } => probability(*level, "beta"),
        Event::ObserveP { p } => probability(*p, "p"),
        Event::AdjustAlpha { old, new } => {
            probability(*old, "old alpha")?;
            probability(*new, "new alpha")
        }
        Event::SetSignificanceLadder { levels } | Event::GradateAlpha { levels } => {
            if levels.is_empty() {
                return Err("levels list is empty".into());
            }
            levels.iter().try_for_each(|l| probability(*l, "level"))
        }
        Event::DeclareEffectSize { d } if !d.is_finite() => Err(format!("d must be finite, got {d}")),
        Event::ClaimConclusion {
            type1_error: Some(e),
            ..
        } => probability(*e, "type1_error"),
        _ => Ok(()),
    }
}

struct Fields<'a> {
    map: BTreeMap<&'a str, &'a str>,
}

impl<'a> Fields<'a> {
    fn take(&mut self, key: &str) -> std::result::Result<&'a str, String> {
        self.map
            .remove(key)
            .ok_or_else(|| format!("missing field `{key}`"))
    }

    fn take_opt(&mut self, key: &str) -> Option<&'a str> {
        self.map.remove(key)
    }

    fn number(&mut self, key: &str) -> std::result::Result<f64, String> {
        let v = self.take(key)?;
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("field `{key}` is not a finite number: `{v}`"))
    }

    fn count(&mut self, key: &str) -> std::result::Result<u64, String> {
        let v = self.take(key)?;
        v.parse::<u64>()
            .map_err(|_| format!("field `{key}` is not a non-negative integer: `{v}`"))
    }

    fn list(&mut self, key: &str) -> std::result::Result<Vec<f64>, String> {
        let v = self.take(key)?;
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| format!("field `{key}` has a bad entry `{s}`"))
            })
            .collect()
    }

    fn finish(self) -> std::result::Result<(), String> {
        match self.map.keys().next() {
            Some(k) => Err(format!("unexpected field `{k}`")),
            None => Ok(()),
        }
    }
}

fn parse_keyword<T: Copy>(all: &[T], name: fn(T) -> &'static str, v: &str, what: &str) -> std::result::Result<T, String> {
    all.iter()
        .copied()
        .find(|x| name(*x) == v)
        .ok_or_else(|| format!("unknown {what} `{v}`"))
}

fn parse_line(line: &str) -> std::result::Result<TraceEvent, String> {
    let mut tokens = line.split_whitespace();
    let phase = match tokens.next() {
        Some("apriori") => Phase::Apriori,
        Some("aposteriori") => Phase::Aposteriori,
        Some(other) => return Err(format!("unknown phase `{other}`; use apriori or aposteriori")),
        None => return Err("empty line".into()),
    };
    let name = tokens.next().ok_or("missing event name")?;
    let mut map = BTreeMap::new();
    for tok in tokens {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got `{tok}`"))?;
        if map.insert(k, v).is_some() {
            return Err(format!("duplicate field `{k}`"));
        }
    }
    let mut f = Fields { map };
    let event = match name {
        "set_alpha" => Event::SetAlpha {
            level: f.number("level")?,
        },
        "set_significance_ladder" => Event::SetSignificanceLadder {
            levels: f.list("levels")?,
        },
        "set_beta" => Event::SetBeta {
            level: f.number("level")?,
        },
        "declare_effect_size" => Event::DeclareEffectSize { d: f.number("d")? },
        "justify_sample_size" => Event::JustifySampleSize {
            n: f.count("n")?,
            method: parse_keyword(&SampleSizeMethod::ALL, SampleSizeMethod::keyword, f.take("method")?, "method")?,
        },
        "observe_p" => Event::ObserveP { p: f.number("p")? },
        "adjust_alpha" => Event::AdjustAlpha {
            old: f.number("old")?,
            new: f.number("new")?,
        },
        "gradate_alpha" => Event::GradateAlpha {
            levels: f.list("levels")?,
        },
        "claim_conclusion" => {
            let kind = parse_keyword(&ClaimKind::ALL, ClaimKind::keyword, f.take("kind")?, "claim kind")?;
            let type1_error = match f.take_opt("type1_error") {
                Some(v) => Some(
                    v.parse::<f64>()
                        .map_err(|_| format!("field `type1_error` is not a number: `{v}`"))?,
                ),
                None => None,
            };
            Event::ClaimConclusion { kind, type1_error }
        }
        "run_test" => Event::RunTest {
            kind: f.take("kind")?.parse().map_err(|e: Error| e.to_string())?,
            tails: f.take("tails")?.parse().map_err(|e: Error| e.to_string())?,
        },
        "correction_applied" => Event::CorrectionApplied {
            method: f.take("method")?.to_string(),
            m: f.count("m")?,
        },
        other => return Err(format!("unknown event `{other}`")),
    };
    f.finish()?;
    Ok(TraceEvent { phase, event })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_prints() {
        let text = "\
# roving example
apriori set_alpha level=0.05
aposteriori observe_p p=0.01   # trailing comment
aposteriori adjust_alpha old=0.05 new=0.01
aposteriori claim_conclusion kind=accept_ha
";
        let t = AnalysisTrace::parse(text).unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(
            t.events()[2].event,
            Event::AdjustAlpha { old: 0.05, new: 0.01 }
        );
        let printed = t.to_string();
        assert!(printed.starts_with("apriori set_alpha level=0.05\n"));
        assert_eq!(AnalysisTrace::parse(&printed).unwrap(), t);
    }

    #[test]
    fn rejects_phase_inversion() {
        let err = AnalysisTrace::parse("aposteriori observe_p p=0.2\napriori set_alpha level=0.05")
            .unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 2,
                message: "a priori event after an a posteriori event".into()
            }
        );
    }

    #[test]
    fn rejects_malformed_lines() {
        for bad in [
            "during set_alpha level=0.05",
            "apriori set_alpha",
            "apriori set_alpha level=abc",
            "apriori set_alpha level=0.05 level=0.01",
            "apriori set_alpha level=0.05 extra=1",
            "apriori set_alpha level=1.5",
            "apriori levitate height=3",
            "aposteriori claim_conclusion kind=maybe",
            "apriori justify_sample_size n=-3 method=power",
            "aposteriori run_test kind=anova tails=1",
            "apriori set_alpha 0.05",
        ] {
            assert!(matches!(AnalysisTrace::parse(bad), Err(Error::Parse { line: 1, .. })), "{bad}");
        }
    }

    #[test]
    fn push_keeps_order() {
        let mut t = AnalysisTrace::default();
        t.push(TraceEvent::apriori(Event::SetAlpha { level: 0.05 })).unwrap();
        t.push(TraceEvent::aposteriori(Event::ObserveP { p: 0.2 })).unwrap();
        assert!(t.push(TraceEvent::apriori(Event::SetBeta { level: 0.2 })).is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = AnalysisTrace::parse(
            "apriori justify_sample_size n=64 method=power\naposteriori run_test kind=t2 tails=1\n\
             aposteriori claim_conclusion kind=reject_h0 type1_error=0.016",
        )
        .unwrap();
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(serde_json::from_str::<AnalysisTrace>(&json).unwrap(), t);
    }
}
