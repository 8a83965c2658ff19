//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::PathBuf;
use std::time::Instant;

use datatest::audit::registry::{Coverage, ROWS};
use datatest::audit::{Classification, Repair};
use datatest::fisher::{bonferroni, permutation_p_value, PermutationMode};
use datatest::longrun::{
    ks_distance_uniform, p_values, run, FamilyCorrection, Scenario, SimulationSpec,
};
use datatest::np::{minimum_effect_size, power, required_n, AlphaLevel, Decision};
use datatest::report::{check_vocabulary, Body, Paradigm, Report};
use datatest::statdist::Distribution;
use datatest::{TailDirection, Tails};
use datatest_cli::{run as cli, Outcome};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn fixture(name: &str) -> String {
    let local = manifest().join("tests/fixtures").join(name);
    if local.exists() {
        local.display().to_string()
    } else {
        manifest().join("../core/tests/fixtures").join(name).display().to_string()
    }
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(manifest().join("tests/golden").join(name)).unwrap_or_default()
}

fn datatest(args: &[&str]) -> Outcome {
    cli(std::iter::once("datatest").chain(args.iter().copied()), None)
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn criterion_1() -> Verdict {
    let p = Distribution::student_t(30.0).unwrap().sf(2.25);
    let out = datatest(&["test", "--mode", "fisher", "--data", &fixture("scores_df30.csv"), "--variance", "pooled"]);
    let line = out.stdout.contains("t(30) = 2.25, p = .0160, 1-tailed");
    verdict(
        (p - 0.016).abs() <= 0.0005 && line,
        format!("p(t >= 2.25 | df = 30) = {p:.6}, target .016 +/- .0005; report line present: {line}"),
    )
}

fn criterion_2() -> Verdict {
    let level = bonferroni(0.05, 2).unwrap();
    let out = datatest(&["correct", "--pvalues", &fixture("pvalues_two.txt"), "--method", "bonferroni", "--format", "json"]);
    let thresholds: Vec<f64> = match Report::from_json(&out.stdout).map(|r| r.body) {
        Ok(Body::Correction(c)) => c.tests.iter().map(|t| t.threshold).collect(),
        _ => vec![],
    };
    verdict(
        level == 0.025 && thresholds == [0.025, 0.025],
        format!("per-test level = {level}, CLI thresholds = {thresholds:?}"),
    )
}

fn criterion_3() -> Verdict {
    let alpha = AlphaLevel::new(0.05).unwrap();
    let mes = minimum_effect_size(50, 50, alpha, Tails::One).unwrap();
    let text = datatest(&["design", "--d", "0.8", "--alpha", ".05", "--beta", ".20", "--n", "50"]).stdout;
    let assumption = text.contains("MES: d = 0.329 (normal approximation, 1-tailed");
    let beta_note = text.contains("achieved beta 0.0100 differs from the planned beta .20");
    verdict(
        (mes - 0.32).abs() <= 0.01 && (mes - 0.329).abs() < 0.0005 && assumption && beta_note,
        format!(
            "MES(n = 50, alpha = .05, 1-tailed) = {mes:.4}, target 0.32 +/- .01; \
             assumption printed: {assumption}; beta inconsistency printed: {beta_note}"
        ),
    )
}

fn criterion_4() -> Verdict {
    let args = ["test", "--mode", "np", "--data", &fixture("scores_df64.csv"), "--design", &fixture("design_df64.json")];
    let text = datatest(&args).stdout;
    let json = datatest(&[&args[..], &["--format", "json"]].concat()).stdout;
    let Ok(Body::Acceptance(body)) = Report::from_json(&json).map(|r| r.body) else {
        return verdict(false, "np report did not parse");
    };
    let r = body.result;
    let line = text
        .lines()
        .find(|l| l.starts_with("t(64) = 3.31, 1-tailed > CV_t = 2.38") && l.ends_with("thus accept H_A"));
    verdict(
        r.decision == Decision::AcceptHA
            && (r.statistic - 3.31).abs() < 0.005
            && (r.critical_value - 2.38).abs() <= 0.01
            && (r.critical_value - 2.386).abs() < 0.0005
            && line.is_some(),
        format!(
            "rv = {:.4}, CV = {:.4}, decision = {:?}; line: {}",
            r.statistic,
            r.critical_value,
            r.decision,
            line.unwrap_or("missing")
        ),
    )
}

/// Independent Monte Carlo power of the pooled one-tailed t test.
fn mc_power(n: usize, d: f64, alpha: f64, reps: u64, seed: u64) -> f64 {
    const CHUNKS: u64 = 200;
    let df = (2 * n - 2) as f64;
    let cv = StudentsT::new(0.0, 1.0, df).unwrap().inverse_cdf(1.0 - alpha);
    let per_chunk = reps / CHUNKS;
    let hits: u64 = (0..CHUNKS)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(((n as u64) << 32) | (chunk + 1));
            let mut hits = 0;
            for _ in 0..per_chunk {
                let mut stats = [(0.0f64, 0.0f64); 2];
                for (g, shift) in [d, 0.0].into_iter().enumerate() {
                    for _ in 0..n {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        let x = shift + z;
                        stats[g].0 += x;
                        stats[g].1 += x * x;
                    }
                }
                let nf = n as f64;
                let mean = |g: usize| stats[g].0 / nf;
                let ss = |g: usize| stats[g].1 - stats[g].0 * stats[g].0 / nf;
                let sp2 = (ss(0) + ss(1)) / df;
                let t = (mean(0) - mean(1)) / (sp2 * 2.0 / nf).sqrt();
                if t >= cv {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    hits as f64 / (per_chunk * CHUNKS) as f64
}

fn criterion_5() -> Verdict {
    let alpha = AlphaLevel::new(0.05).unwrap();
    let engine = required_n(0.8, alpha, 0.20, Tails::One).unwrap();
    let start = Instant::now();
    let powers: Vec<(usize, f64)> = (19..=23).map(|n| (n, mc_power(n, 0.8, 0.05, 1_000_000, 0))).collect();
    let elapsed = start.elapsed().as_secs_f64();
    let oracle = powers.iter().find(|(_, p)| *p >= 0.80).map(|(n, _)| *n);
    let bracketed = powers[0].1 < 0.80;
    let table: Vec<String> = powers.iter().map(|(n, p)| format!("{n}:{p:.4}")).collect();
    verdict(
        bracketed && oracle == Some(engine),
        format!(
            "engine n = {engine}, oracle n = {}; MC power (10^6 reps, seed 0) {}; {elapsed:.1} s",
            oracle.map_or("none".into(), |n| n.to_string()),
            table.join(" ")
        ),
    )
}

fn spec(scenario: Scenario, n: usize, level: f64, d: f64) -> SimulationSpec {
    SimulationSpec {
        scenario,
        n_per_group: n,
        level,
        tails: Tails::One,
        true_effect: d,
        replications: 100_000,
        seed: 0,
    }
}

fn criterion_6() -> Verdict {
    let start = Instant::now();
    let mut failures = Vec::new();
    for alpha in [0.05, 0.01] {
        let r = run(&spec(Scenario::Type1Rate, 10, alpha, 0.0)).unwrap();
        if !r.pass {
            failures.push(format!("type I at {alpha}: {:.5}", r.observed_rate));
        }
    }
    let grid = [
        (0.2, 100, 0.05),
        (0.2, 200, 0.01),
        (0.2, 50, 0.10),
        (0.5, 20, 0.05),
        (0.5, 51, 0.05),
        (0.5, 40, 0.01),
        (0.8, 10, 0.05),
        (0.8, 21, 0.05),
        (0.8, 33, 0.01),
    ];
    for (d, n, alpha) in grid {
        let r = run(&spec(Scenario::PowerRate, n, alpha, d)).unwrap();
        let achieved = power(d, n, n, AlphaLevel::new(alpha).unwrap(), Tails::One).unwrap();
        let band = 3.0 * (achieved * (1.0 - achieved) / 1e5).sqrt();
        if (r.observed_rate - achieved).abs() > band {
            failures.push(format!("power at d={d} n={n} alpha={alpha}: {:.4} vs {achieved:.4}", r.observed_rate));
        }
    }
    let ks = ks_distance_uniform(&p_values(&spec(Scenario::Type1Rate, 10, 0.05, 0.0)).unwrap());
    if ks >= 0.01 {
        failures.push(format!("KS = {ks:.4}"));
    }
    let family = |correction| {
        run(&spec(Scenario::FamilywiseInflation { m: 10, correction }, 5, 0.05, 0.0)).unwrap()
    };
    let none = family(FamilyCorrection::None);
    let fwer = 1.0 - 0.95f64.powi(10);
    let none_se = (fwer * (1.0 - fwer) / 1e5).sqrt();
    if (none.observed_rate - fwer).abs() > 3.0 * none_se {
        failures.push(format!("uncorrected FWER {:.4}", none.observed_rate));
    }
    let bonf = family(FamilyCorrection::Bonferroni);
    let bonf_se = (0.05 * 0.95 / 1e5f64).sqrt();
    if bonf.observed_rate > 0.05 + 3.0 * bonf_se {
        failures.push(format!("Bonferroni FWER {:.4}", bonf.observed_rate));
    }
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "type I x2, power grid x9, KS = {ks:.4}, FWER {:.4} (target {fwer:.4}), Bonferroni FWER {:.4}; {elapsed:.1} s",
                none.observed_rate, bonf.observed_rate
            )
        } else {
            failures.join("; ")
        },
    )
}

/// Full enumeration of relabelings, counting mean differences at least as
/// extreme as the observed one.
fn enumerate(a: &[f64], b: &[f64], tails: Tails, direction: TailDirection) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let k = a.len();
    let diff = |mask: u32| {
        let (mut sa, mut sb) = (0.0, 0.0);
        for (i, x) in pooled.iter().enumerate() {
            if mask & (1 << i) != 0 {
                sa += x;
            } else {
                sb += x;
            }
        }
        sa / k as f64 - sb / (n - k) as f64
    };
    let observed = diff((1u32 << k) - 1);
    let tol = 1e-9 * pooled.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
    let (mut hits, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        total += 1;
        let d = diff(mask);
        let extreme = match (tails, direction) {
            (Tails::Two, _) => d.abs() >= observed.abs() - tol,
            (Tails::One, TailDirection::Upper) => d >= observed - tol,
            (Tails::One, TailDirection::Lower) => d <= observed + tol,
        };
        hits += u64::from(extreme);
    }
    hits as f64 / total as f64
}

fn criterion_7() -> Verdict {
    let df30_a = [16.0, 20.0, 25.0, 24.0, 22.0, 8.0, 27.0, 23.0, 9.0, 13.0];
    let df30_b = [17.0, 21.0, 6.0, 7.0, 14.0, 15.0, 7.0, 12.0, 13.0, 23.0];
    let df64_a = [22.0, 13.0, 13.0, 29.0, 26.0, 20.0, 30.0];
    let df64_b = [27.0, 26.0, 16.0, 5.0, 25.0, 22.0, 5.0, 6.0, 5.0];
    let datasets: Vec<(&str, Vec<f64>, Vec<f64>)> = vec![
        ("separation 3v3", vec![4.0, 5.0, 6.0], vec![1.0, 2.0, 3.0]),
        ("ties 4v5", vec![2.0, 2.0, 3.0, 5.0], vec![1.0, 2.0, 2.0, 3.0, 3.0]),
        ("real 5v6", vec![0.31, 1.7, -0.4, 2.2, 0.9], vec![0.1, -1.2, 0.4, 0.05, -0.3, 0.8]),
        ("df30 head 8v8", df30_a[..8].to_vec(), df30_b[..8].to_vec()),
        ("df30 head 10v10", df30_a.to_vec(), df30_b.to_vec()),
        ("df64 head 7v9", df64_a.to_vec(), df64_b.to_vec()),
    ];
    let mut checked = 0;
    let mut failures = Vec::new();
    for (name, a, b) in &datasets {
        for (tails, dir) in [
            (Tails::One, TailDirection::Upper),
            (Tails::One, TailDirection::Lower),
            (Tails::Two, TailDirection::Upper),
        ] {
            let engine = permutation_p_value(a, b, tails, dir, PermutationMode::exact()).unwrap();
            let oracle = enumerate(a, b, tails, dir);
            checked += 1;
            if engine != oracle {
                failures.push(format!("{name} {tails} {dir:?}: {engine} vs {oracle}"));
            }
        }
    }
    let sep = permutation_p_value(&[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0], Tails::One, TailDirection::Upper, PermutationMode::exact())
        .unwrap();
    if sep != 1.0 / 20.0 {
        failures.push(format!("3v3 separation p = {sep}"));
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{checked} dataset/tail cases equal the enumeration oracle; 3v3 separation p = {sep} (1/20)")
        } else {
            failures.join("; ")
        },
    )
}

fn criterion_8() -> Verdict {
    let mut failures = Vec::new();
    for row in ROWS.iter() {
        let covered = match row.coverage {
            Coverage::Rules(codes) => !codes.is_empty(),
            Coverage::NonGoal(reason) => !reason.trim().is_empty(),
        };
        if !covered {
            failures.push(format!("row {:?} uncovered", row.row));
        }
    }
    let mut rows: Vec<String> = ROWS.iter().map(|r| format!("{:?}", r.row)).collect();
    rows.sort();
    rows.dedup();
    if rows.len() != ROWS.len() || ROWS.len() < 13 {
        failures.push(format!("{} distinct rows", rows.len()));
    }

    let cases = [
        ("pure_fisher", Classification::PureFisher, 0),
        ("pure_np", Classification::PureNeymanPearson, 0),
        ("roving_alpha", Classification::NPLeaningNHST, 4),
    ];
    let mut roved = None;
    for (name, class, code) in cases {
        let trace = fixture(&format!("{name}.trace"));
        let text = datatest(&["audit", "--trace", &trace]);
        let json = datatest(&["audit", "--trace", &trace, "--format", "json"]);
        if text.exit_code != code || json.exit_code != code {
            failures.push(format!("{name}: exit {}", text.exit_code));
        }
        if text.stdout != golden(&format!("audit_{name}.txt")) || json.stdout != golden(&format!("audit_{name}.json")) {
            failures.push(format!("{name}: output differs from golden"));
        }
        match Report::from_json(&json.stdout).map(|r| r.body) {
            Ok(Body::Audit(report)) => {
                if report.classification != class {
                    failures.push(format!("{name}: classified {}", report.classification));
                }
                for repair in &report.repairs {
                    if let Repair::RovingBeta(rb) = repair {
                        roved = Some((rb.roved_alpha, rb.roved_beta));
                    }
                }
            }
            _ => failures.push(format!("{name}: report did not parse")),
        }
    }
    match roved {
        Some((a, b)) if a == 0.01 && (b - 0.4347).abs() < 5e-5 => {}
        other => failures.push(format!("roved pair {other:?}")),
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "{} construct rows covered; 3 golden traces match; roved pair (alpha, beta) = ({}, {:.4})",
                ROWS.len(),
                roved.unwrap().0,
                roved.unwrap().1
            )
        } else {
            failures.join("; ")
        },
    )
}

fn criterion_9() -> Verdict {
    let dir = manifest().join("tests/golden");
    let mut jsons: Vec<PathBuf> = std::fs::read_dir(&dir)
        .map(|rd| rd.filter_map(|e| e.ok().map(|e| e.path())).collect())
        .unwrap_or_default();
    jsons.retain(|p| p.extension().is_some_and(|e| e == "json"));
    jsons.sort();
    let mut failures = Vec::new();
    let mut counts = [0usize; 2];
    for path in &jsons {
        let json = std::fs::read_to_string(path).unwrap();
        let text = std::fs::read_to_string(path.with_extension("txt")).unwrap_or_default();
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("?");
        let Ok(report) = Report::from_json(&json) else {
            failures.push(format!("{name}: does not parse"));
            continue;
        };
        for rendering in [&json, &text] {
            if let Err(e) = check_vocabulary(report.paradigm, rendering) {
                failures.push(format!("{name}: {e}"));
            }
        }
        match report.paradigm {
            Paradigm::Fisher => counts[0] += 1,
            Paradigm::NeymanPearson => counts[1] += 1,
            _ => {}
        }
    }
    if counts.contains(&0) {
        failures.push("corpus lacks a Fisher or Neyman-Pearson report".into());
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "{} reports ({} Fisher, {} Neyman-Pearson), text and JSON renderings clean",
                jsons.len(),
                counts[0],
                counts[1]
            )
        } else {
            failures.join("; ")
        },
    )
}

type Check = fn() -> Verdict;

fn main() {
    let criteria: [(&str, Check); 9] = [
        ("p-value reproduction", criterion_1),
        ("Bonferroni per-test level", criterion_2),
        ("MES boundary at n = 50", criterion_3),
        ("df = 64 acceptance decision", criterion_4),
        ("sample size vs Monte Carlo oracle", criterion_5),
        ("long-run identities", criterion_6),
        ("permutation vs enumeration", criterion_7),
        ("audit coverage and golden traces", criterion_8),
        ("vocabulary partition", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {} {name}: {} ({})",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
