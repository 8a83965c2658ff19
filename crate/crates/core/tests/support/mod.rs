//! Independent oracles shared by the integration tests. Nothing here calls
//! into the crate's special-function code: densities are built from
//! `statrs` primitives and integrated numerically.

#![allow(dead_code)]

use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

/// Adaptive Simpson integration of `f` over `[a, b]`, started from 64 equal
/// panels so narrow peaks are not skipped by the first coarse estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    const PANELS: usize = 64;
    let h = (b - a) / PANELS as f64;
    (0..PANELS)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == PANELS { b } else { lo + h };
            integrate_panel(f, lo, hi, tol / PANELS as f64)
        })
        .sum()
}

fn integrate_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn t_pdf(x: f64, df: f64) -> f64 {
    let log_c = ln_gamma(0.5 * (df + 1.0))
        - ln_gamma(0.5 * df)
        - 0.5 * (df * std::f64::consts::PI).ln();
    (log_c - 0.5 * (df + 1.0) * (1.0 + x * x / df).ln()).exp()
}

pub fn chi2_pdf(u: f64, df: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    let k = 0.5 * df;
    ((k - 1.0) * u.ln() - 0.5 * u - k * 2f64.ln() - ln_gamma(k)).exp()
}

/// Central t CDF by quadrature of the density over `[0, |x|]`.
pub fn t_cdf(x: f64, df: f64) -> f64 {
    let half = integrate(&|s| t_pdf(s, df), 0.0, x.abs(), 1e-14);
    if x >= 0.0 {
        0.5 + half
    } else {
        0.5 - half
    }
}

pub fn std_normal_cdf_quadrature(x: f64) -> f64 {
    let half = integrate(&normal_pdf, 0.0, x.abs(), 1e-14);
    if x >= 0.0 {
        0.5 + half
    } else {
        0.5 - half
    }
}

/// Chi-square CDF, integrating in `s = √u` so the df = 1 singularity at 0
/// disappears.
pub fn chi2_cdf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    integrate(&|s| 2.0 * s * chi2_pdf(s * s, df), 0.0, x.sqrt(), 1e-14)
}

/// Noncentral t CDF as the mixture `∫ Φ(x·√(u/ν) − δ) f_χ²ν(u) du`.
pub fn nct_cdf(x: f64, df: f64, ncp: f64) -> f64 {
    let upper = (df + 60.0 * (2.0 * df).sqrt() + 200.0).sqrt();
    integrate(
        &|s| {
            let u = s * s;
            normal_cdf(x * (u / df).sqrt() - ncp) * 2.0 * s * chi2_pdf(u, df)
        },
        0.0,
        upper,
        1e-13,
    )
}

/// Bisection on a monotone CDF oracle.
pub fn bisect<F: Fn(f64) -> f64>(cdf: F, p: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Kolmogorov-Smirnov distance between a sample and a CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &mut [f64], cdf: F) -> f64 {
    sample.sort_by(|a, b| a.total_cmp(b));
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let above = (i as f64 + 1.0) / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}
