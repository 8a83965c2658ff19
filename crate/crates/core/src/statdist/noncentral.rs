//! Noncentral t distribution function.
//!
//! For `t >= 0` the CDF is the Poisson-mixed beta series
//!
//! ```text
//! F(t; ν, δ) = Φ(-δ) + ½ Σ_j [ P_j · I_x(j + ½, ν/2) + Q_j · I_x(j + 1, ν/2) ]
//!     x   = t² / (t² + ν),   λ = δ²/2
//!     P_j = e^-λ λ^j / j!
//!     Q_j = e^-λ λ^j / Γ(j + 3/2) · δ/√2
//! ```
//!
//! and `F(t; ν, δ) = 1 - F(-t; ν, -δ)` for negative `t`.
//!
//! Terms are summed outward from the Poisson mode `⌊λ⌋`, weights evaluated in
//! log space so large noncentralities neither underflow nor lose the bulk of
//! the mass. Because every `I_x` lies in `[0, 1]` and
//! `|Q_j| ≤ Γ(1)/Γ(3/2) · |δ|/√2 · P_j ≤ 0.8 |δ| P_j`, the omitted terms are
//! bounded by `½ (1 + 0.8 |δ|) · (1 - Σ_included P_j)`. Summation stops once
//! that bound drops below [`TRUNCATION_BOUND`].

use super::special::{beta_reg, ln_gamma};
use super::std_normal_tails;

/// Upper bound on the truncation error of the series.
pub const TRUNCATION_BOUND: f64 = 1e-13;

const MAX_TERMS: usize = 50_000;
const NEGLIGIBLE_WEIGHT: f64 = 1e-300;

/// `(P(T ≤ t), P(T > t))` for T ~ noncentral t(df, ncp).
pub fn nct_tails(t: f64, df: f64, ncp: f64) -> (f64, f64) {
    if t.is_nan() {
        return (f64::NAN, f64::NAN);
    }
    if t < 0.0 {
        let (lower, upper) = nct_tails_nonneg(-t, df, -ncp);
        return (upper, lower);
    }
    nct_tails_nonneg(t, df, ncp)
}

fn nct_tails_nonneg(t: f64, df: f64, ncp: f64) -> (f64, f64) {
    let (phi_lower, phi_upper) = std_normal_tails(-ncp);
    if t == 0.0 {
        return (phi_lower, phi_upper);
    }
    let t2 = t * t;
    if !t2.is_finite() {
        return (1.0, 0.0);
    }
    let x = t2 / (t2 + df);
    let y = df / (t2 + df);
    let half_df = 0.5 * df;

    let lambda = 0.5 * ncp * ncp;
    let scale = ncp / std::f64::consts::SQRT_2;

    // Every term is a mixture over j; it splits into the P (half-integer)
    // and Q (integer) beta families.
    let term = |j: usize| -> (f64, f64) {
        let jf = j as f64;
        let log_pow = if j == 0 { 0.0 } else { jf * lambda.ln() };
        let p_j = (-lambda + log_pow - ln_gamma(jf + 1.0)).exp();
        let q_j = (-lambda + log_pow - ln_gamma(jf + 1.5)).exp() * scale;
        let mut value = 0.0;
        if p_j > 0.0 {
            value += p_j * beta_reg(jf + 0.5, half_df, x, y).0;
        }
        if q_j != 0.0 {
            value += q_j * beta_reg(jf + 1.0, half_df, x, y).0;
        }
        (p_j, value)
    };

    if lambda == 0.0 {
        let (_, v) = term(0);
        let lower = (phi_lower + 0.5 * v).min(1.0);
        return (lower, upper_from(lower, phi_upper, v));
    }

    let mode = lambda.floor() as usize;
    let mut sum = 0.0;
    let mut weight = 0.0;

    let bound_factor = 0.5 * (1.0 + 0.8 * ncp.abs());

    // downward from the mode; below the mode P_{j-1}/P_j = j/λ < 1, so the
    // rest of the left tail is at most P_j · r/(1 - r)
    let mut j = mode;
    loop {
        let (p_j, v) = term(j);
        sum += v;
        weight += p_j;
        if j == 0 || p_j < NEGLIGIBLE_WEIGHT {
            break;
        }
        let r = j as f64 / lambda;
        if r < 1.0 && bound_factor * p_j * r / (1.0 - r) < 0.01 * TRUNCATION_BOUND {
            break;
        }
        j -= 1;
    }

    // upward until the tail bound is met
    for j in (mode + 1..).take(MAX_TERMS) {
        let (p_j, v) = term(j);
        sum += v;
        weight += p_j;
        if bound_factor * (1.0 - weight).max(0.0) < TRUNCATION_BOUND {
            break;
        }
    }

    let lower = (phi_lower + 0.5 * sum).clamp(0.0, 1.0);
    (lower, upper_from(lower, phi_upper, sum))
}

/// Upper tail as `Φ(δ) - ½Σ`, which keeps precision when the lower tail is
/// close to one.
fn upper_from(lower: f64, phi_upper: f64, series: f64) -> f64 {
    if lower > 0.5 {
        (phi_upper - 0.5 * series).clamp(0.0, 1.0)
    } else {
        1.0 - lower
    }
}
