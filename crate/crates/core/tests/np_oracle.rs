mod support;

use datatest::np::{
    build_design, build_design_with_n, power, required_n, AlphaLevel, DesignRequest,
};
use datatest::{Tails, TestKind};
use proptest::prelude::*;
use support::{bisect, nct_cdf, t_cdf};

/// Power from the quadrature oracles: critical value by bisection of the
/// central t CDF, then the noncentral mixture integral above it.
fn oracle_power(d: f64, n: usize, alpha: f64) -> f64 {
    let df = (2 * n - 2) as f64;
    let cv = bisect(|x| t_cdf(x, df), 1.0 - alpha, 0.0, 20.0);
    1.0 - nct_cdf(cv, df, d * (n as f64 / 2.0).sqrt())
}

fn oracle_required_n(d: f64, alpha: f64, beta: f64) -> usize {
    (2..).find(|&n| oracle_power(d, n, alpha) >= 1.0 - beta).unwrap()
}

fn a(level: f64) -> AlphaLevel {
    AlphaLevel::new(level).unwrap()
}

#[test]
fn power_table_for_large_effect() {
    let frozen = [
        (18, 0.7602),
        (19, 0.7806),
        (20, 0.7994),
        (21, 0.8168),
        (22, 0.8328),
        (23, 0.8475),
    ];
    for (n, value) in frozen {
        let p = power(0.8, n, n, a(0.05), Tails::One).unwrap();
        let o = oracle_power(0.8, n, 0.05);
        assert!((p - o).abs() < 1e-6, "n={n}: {p} vs oracle {o}");
        assert!((p - value).abs() < 5e-5, "n={n}: {p}");
    }
}

#[test]
fn required_sizes_match_oracle_search() {
    for &(d, alpha, beta, frozen) in &[
        (0.8, 0.05, 0.20, 21),
        (0.8, 0.05, 0.05, 35),
        (0.5, 0.05, 0.20, 51),
        (0.8, 0.01, 0.20, 33),
    ] {
        let n = required_n(d, a(alpha), beta, Tails::One).unwrap();
        assert_eq!(n, oracle_required_n(d, alpha, beta), "d={d} alpha={alpha} beta={beta}");
        assert_eq!(n, frozen);
    }
}

#[test]
fn small_effect_needs_hundreds() {
    let n = required_n(0.2, a(0.05), 0.20, Tails::One).unwrap();
    assert_eq!(n, 310);
    assert!(oracle_power(0.2, n, 0.05) >= 0.80);
    assert!(oracle_power(0.2, n - 1, 0.05) < 0.80);
}

#[test]
fn fixed_fifty_per_group() {
    let req = DesignRequest::new(TestKind::TwoSampleT, Tails::One, 0.8, 0.05, 0.20).unwrap();
    let d = build_design_with_n(&req, 50).unwrap();
    assert!((d.power() - oracle_power(0.8, 50, 0.05)).abs() < 1e-6);
    assert!((d.power() - 0.990_03).abs() < 5e-5);
    assert!(d.beta() < 0.0101);
    assert_eq!(d.target_beta(), 0.20);
    let mes = 1.644_853_626_951_472_2 * (2.0f64 / 50.0).sqrt();
    assert!((d.mes() - mes).abs() < 1e-9);
}

#[test]
fn two_tailed_power_counts_both_tails() {
    let p = power(0.5, 40, 40, a(0.05), Tails::Two).unwrap();
    let df = 78.0;
    let cv = bisect(|x| t_cdf(x, df), 0.975, 0.0, 20.0);
    let ncp = 0.5 * 20f64.sqrt();
    let o = 1.0 - nct_cdf(cv, df, ncp) + nct_cdf(-cv, df, ncp);
    assert!((p - o).abs() < 1e-6);
}

#[test]
fn design_is_frozen_after_build() {
    let req = DesignRequest::new(TestKind::TwoSampleT, Tails::One, 0.8, 0.05, 0.20).unwrap();
    let d = build_design(&req).unwrap();
    let json = serde_json::to_value(&d).unwrap();
    assert_eq!(json["frozen"], true);
    assert_eq!(json["n_a"], 21);
    assert_eq!(json["target_beta"], 0.2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn power_increases_with_n(d in 0.1f64..1.5, n in 3usize..200, alpha in 0.005f64..0.1) {
        let lo = power(d, n, n, a(alpha), Tails::One).unwrap();
        let hi = power(d, n + 1, n + 1, a(alpha), Tails::One).unwrap();
        prop_assert!(hi >= lo - 1e-12);
    }

    #[test]
    fn power_increases_with_d(d in 0.1f64..1.5, step in 0.01f64..0.5, n in 3usize..200) {
        let lo = power(d, n, n, a(0.05), Tails::One).unwrap();
        let hi = power(d + step, n, n, a(0.05), Tails::One).unwrap();
        prop_assert!(hi >= lo - 1e-12);
    }

    #[test]
    fn required_n_is_minimal(d in 0.3f64..1.5, alpha in 0.01f64..0.05, beta in 0.05f64..0.3) {
        let n = required_n(d, a(alpha), beta, Tails::One).unwrap();
        prop_assert!(power(d, n, n, a(alpha), Tails::One).unwrap() >= 1.0 - beta);
        if n > 2 {
            prop_assert!(power(d, n - 1, n - 1, a(alpha), Tails::One).unwrap() < 1.0 - beta);
        }
    }

    #[test]
    fn design_json_round_trips(d in 0.3f64..1.5, alpha in 0.01f64..0.05, beta in 0.05f64..0.3) {
        let req = DesignRequest::new(TestKind::TwoSampleT, Tails::One, d, alpha, beta).unwrap();
        let design = build_design(&req).unwrap();
        let json = serde_json::to_string(&design).unwrap();
        let back: datatest::np::AcceptanceDesign = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, design);
    }
}
