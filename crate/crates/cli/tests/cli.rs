use std::path::PathBuf;

use datatest::report::{check_vocabulary, Body, Paradigm, Report};
use datatest_cli::{run, Outcome};

fn fixture(name: &str) -> String {
    let local = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    if local.exists() {
        return local.display().to_string();
    }
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn datatest(args: &[&str]) -> Outcome {
    let mut argv = vec!["datatest".to_string()];
    argv.extend(args.iter().map(|a| {
        let is_fixture = [".csv", ".txt", ".trace", ".json"].iter().any(|e| a.ends_with(e));
        if is_fixture && !a.contains('/') {
            fixture(a)
        } else {
            a.to_string()
        }
    }));
    run(argv, None)
}

/// (golden name, arguments, exit code)
const CORPUS: &[(&str, &[&str], i32)] = &[
    ("fisher_df30", &["test", "--mode", "fisher", "--data", "scores_df30.csv", "--variance", "pooled"], 0),
    ("fisher_df30_welch", &["test", "--mode", "fisher", "--data", "scores_df30.csv"], 0),
    (
        "fisher_df30_less",
        &["test", "--mode", "fisher", "--data", "scores_df30.csv", "--variance", "pooled", "--direction", "less"],
        0,
    ),
    ("fisher_chi2", &["test", "--mode", "fisher", "--test", "chi2", "--data", "counts.csv"], 0),
    ("design_n21", &["design", "--test", "t2", "--tails", "1", "--d", "0.8", "--alpha", ".05", "--beta", ".20"], 0),
    ("design_n50", &["design", "--d", "0.8", "--alpha", ".05", "--beta", ".20", "--n", "50"], 0),
    ("design_df64", &["design", "--d", "0.8", "--alpha", ".01", "--beta", ".20", "--n", "33"], 0),
    ("design_low_power", &["design", "--d", "0.1", "--alpha", ".05", "--beta", ".20", "--n", "10"], 3),
    ("np_df64", &["test", "--mode", "np", "--data", "scores_df64.csv", "--design", "design_df64.json"], 0),
    (
        "np_df64_p",
        &["test", "--mode", "np", "--data", "scores_df64.csv", "--design", "design_df64.json", "--proxy", "p"],
        0,
    ),
    ("np_df30_deviation", &["test", "--mode", "np", "--data", "scores_df30.csv", "--design", "design_df64.json"], 0),
    ("correct_two", &["correct", "--pvalues", "pvalues_two.txt", "--method", "bonferroni", "--level", ".05"], 0),
    ("correct_family_holm", &["correct", "--pvalues", "pvalues_family.txt", "--method", "holm"], 0),
    ("correct_family_bh", &["correct", "--pvalues", "pvalues_family.txt", "--method", "bh"], 0),
    ("audit_pure_fisher", &["audit", "--trace", "pure_fisher.trace"], 0),
    ("audit_pure_np", &["audit", "--trace", "pure_np.trace"], 0),
    ("audit_roving_alpha", &["audit", "--trace", "roving_alpha.trace"], 4),
    ("audit_np_leaning", &["audit", "--trace", "np_leaning.trace"], 4),
    ("audit_np_leaning_supplied", &["audit", "--trace", "np_leaning.trace", "--d", "0.5", "--n", "51"], 4),
    ("audit_proof_claim", &["audit", "--trace", "proof_claim.trace"], 4),
    ("audit_fisher_leaning", &["audit", "--trace", "fisher_leaning.trace"], 4),
    ("simulate_type1", &["simulate", "--scenario", "type1", "--n", "10", "--reps", "20000", "--seed", "0"], 0),
    ("simulate_pdance", &["simulate", "--scenario", "pdance", "--n", "21", "--reps", "20000", "--seed", "0"], 0),
];

fn check_golden(name: &str, actual: &str) {
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|_| panic!("missing golden {}; rerun with UPDATE_GOLDEN=1", path.display()));
    assert_eq!(actual, expected, "{name} differs from its golden file");
}

#[test]
fn corpus_matches_golden_files() {
    for (name, args, code) in CORPUS {
        let text = datatest(args);
        assert_eq!(text.exit_code, *code, "{name}: {}", text.stderr);
        check_golden(&format!("{name}.txt"), &text.stdout);

        let mut json_args = args.to_vec();
        json_args.extend(["--format", "json"]);
        let json = datatest(&json_args);
        assert_eq!(json.exit_code, *code, "{name}");
        check_golden(&format!("{name}.json"), &json.stdout);
    }
}

#[test]
fn json_reports_round_trip() {
    for (name, args, _) in CORPUS {
        let mut json_args = args.to_vec();
        json_args.extend(["--format", "json"]);
        let out = datatest(&json_args).stdout;
        let report = Report::from_json(&out).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(report.to_json().unwrap(), out, "{name}");
        assert_eq!(Report::from_json(&report.to_json().unwrap()).unwrap(), report);
    }
}

#[test]
fn vocabulary_partition_over_golden_corpus() {
    let mut seen = [false; 2];
    for (name, _, _) in CORPUS {
        let json = std::fs::read_to_string(golden_path(&format!("{name}.json"))).unwrap();
        let text = std::fs::read_to_string(golden_path(&format!("{name}.txt"))).unwrap();
        let paradigm = Report::from_json(&json).unwrap().paradigm;
        check_vocabulary(paradigm, &json).unwrap_or_else(|e| panic!("{name}.json: {e}"));
        check_vocabulary(paradigm, &text).unwrap_or_else(|e| panic!("{name}.txt: {e}"));
        match paradigm {
            Paradigm::Fisher => seen[0] = true,
            Paradigm::NeymanPearson => seen[1] = true,
            _ => {}
        }
    }
    assert_eq!(seen, [true, true]);
}

#[test]
fn identical_invocations_are_byte_identical() {
    for (name, args, _) in CORPUS {
        let mut json_args = args.to_vec();
        json_args.extend(["--format", "json"]);
        assert_eq!(datatest(&json_args), datatest(&json_args), "{name}");
    }
    let sim = |workers: &str| {
        datatest(&[
            "simulate", "--scenario", "power", "--n", "12", "--reps", "5000", "--workers", workers, "--format",
            "json",
        ])
    };
    assert_eq!(sim("1").stdout, sim("4").stdout);
}

#[test]
fn report_lines() {
    let fisher = datatest(CORPUS[0].1).stdout;
    assert!(fisher.contains("t(30) = 2.25, p = .0160, 1-tailed"), "{fisher}");
    let np = datatest(CORPUS[8].1).stdout;
    assert!(np.contains("t(64) = 3.31, 1-tailed > CV_t = 2.386, thus accept H_A"), "{np}");
    let design = datatest(&["design", "--d", "0.8", "--alpha", ".05", "--beta", ".20"]).stdout;
    assert!(design.contains("sample size: 21 per group"), "{design}");
}

#[test]
fn design_file_matches_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("design.json");
    let o = datatest(&[
        "design", "--d", "0.8", "--alpha", ".01", "--beta", ".20", "--n", "33", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.exit_code, 0);
    assert_eq!(
        std::fs::read_to_string(out).unwrap(),
        std::fs::read_to_string(fixture("design_df64.json")).unwrap()
    );
}

#[test]
fn tampered_design_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("design.json");
    let text = std::fs::read_to_string(fixture("design_df64.json")).unwrap();
    std::fs::write(&path, text.replace("\"n_a\": 33", "\"n_a\": 20")).unwrap();
    let o = datatest(&["test", "--mode", "np", "--data", "scores_df64.csv", "--design", path.to_str().unwrap()]);
    assert_eq!(o.exit_code, 2, "{}", o.stdout);
}

#[test]
fn input_errors_exit_2() {
    let np = datatest(&["test", "--mode", "np", "--data", "scores_df64.csv"]);
    assert_eq!(np.exit_code, 2);
    assert!(np.stderr.contains("a priori design required"));

    let floor = datatest(&["design", "--d", "0.8", "--alpha", ".25", "--beta", ".20"]);
    assert_eq!(floor.exit_code, 2);
    assert!(floor.stderr.contains("Type II error rate may not be set below"), "{}", floor.stderr);

    let reps = datatest(&["simulate", "--scenario", "type1", "--reps", "0"]);
    assert_eq!(reps.exit_code, 2);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "A,B\n1,2\n3,x\n").unwrap();
    let o = datatest(&["test", "--mode", "fisher", "--data", bad.to_str().unwrap()]);
    assert_eq!(o.exit_code, 2);
    assert!(o.stderr.contains("line 3"), "{}", o.stderr);

    let trace = dir.path().join("bad.trace");
    std::fs::write(&trace, "apriori set_alpha level=2\n").unwrap();
    assert_eq!(datatest(&["audit", "--trace", trace.to_str().unwrap()]).exit_code, 2);

    assert_eq!(datatest(&["frobnicate"]).exit_code, 2);
    let help = datatest(&["--help"]);
    assert_eq!(help.exit_code, 0);
    assert!(help.stdout.contains("simulate"));
}

#[test]
fn low_power_design_still_freezes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("low.json");
    let o = datatest(&[
        "design", "--d", "0.1", "--alpha", ".05", "--beta", ".20", "--n", "10", "--out",
        out.to_str().unwrap(), "--format", "json",
    ]);
    assert_eq!(o.exit_code, 3);
    assert!(o.stderr.contains("LowPower"));
    assert!(out.exists());
}

#[test]
fn single_test_correction_is_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("one.txt");
    std::fs::write(&p, "0.03\n").unwrap();
    let o = datatest(&["correct", "--pvalues", p.to_str().unwrap(), "--format", "json"]);
    let report = Report::from_json(&o.stdout).unwrap();
    let Body::Correction(c) = report.body else { panic!() };
    assert_eq!(c.tests[0].threshold, 0.05);
}

#[test]
fn holm_rejects_a_superset_of_bonferroni() {
    let rejected = |method| {
        let o = datatest(&["correct", "--pvalues", "pvalues_family.txt", "--method", method, "--format", "json"]);
        let Body::Correction(c) = Report::from_json(&o.stdout).unwrap().body else { panic!() };
        c.tests.iter().map(|t| t.rejected).collect::<Vec<_>>()
    };
    let b = rejected("bonferroni");
    let h = rejected("holm");
    assert!(b.iter().zip(&h).all(|(b, h)| !b || *h));
    assert!(h.iter().filter(|x| **x).count() > b.iter().filter(|x| **x).count());
}

#[test]
fn seed_comes_from_environment() {
    let args = ["datatest", "simulate", "--scenario", "type1", "--n", "5", "--reps", "2000", "--format", "json"];
    let env7 = run(args, Some("7"));
    let flag7 = run(args.iter().copied().chain(["--seed", "7"]), None);
    let default = run(args, None);
    assert_eq!(env7.stdout, flag7.stdout);
    assert_ne!(env7.stdout, default.stdout);
    assert_eq!(run(args, Some("seven")).exit_code, 2);
}

#[test]
fn failing_simulation_exits_5() {
    // with 20 replications some seed lands outside the 3 s.e. band
    let failing = (0..2000u64).map(|seed| {
        let seed = seed.to_string();
        datatest(&["simulate", "--scenario", "type1", "--n", "5", "--reps", "20", "--seed", &seed])
    });
    let o = failing.into_iter().find(|o| o.exit_code != 0).expect("no failing seed");
    assert_eq!(o.exit_code, 5);
    assert!(o.stdout.contains("FAIL"));
}
