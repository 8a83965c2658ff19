//! Probability distributions used by both testing workflows.
//!
//! Each [`Distribution`] offers a CDF, a survival function, a quantile
//! solver, and a sampler. Accuracy is part of the contract:
//! [`CENTRAL_TOLERANCE`] for the normal, t and chi-square kernels and
//! [`NONCENTRAL_TOLERANCE`] for the noncentral t. Degrees of freedom are real
//! valued so Welch-corrected tests work unchanged.

mod noncentral;
pub mod special;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use noncentral::TRUNCATION_BOUND;

/// Absolute CDF accuracy for the standard normal, central t and chi-square.
pub const CENTRAL_TOLERANCE: f64 = 1e-8;
/// Absolute CDF accuracy for the noncentral t.
pub const NONCENTRAL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kind {
    StandardNormal,
    StudentT { df: f64 },
    NoncentralT { df: f64, ncp: f64 },
    ChiSquare { df: f64 },
}

/// A validated distribution. Construct through the named constructors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distribution(Kind);

fn check_df(df: f64) -> Result<f64> {
    if df.is_finite() && df > 0.0 {
        Ok(df)
    } else {
        Err(Error::domain(format!(
            "degrees of freedom must be positive and finite, got {df}"
        )))
    }
}

impl Distribution {
    pub fn standard_normal() -> Self {
        Distribution(Kind::StandardNormal)
    }

    pub fn student_t(df: f64) -> Result<Self> {
        Ok(Distribution(Kind::StudentT { df: check_df(df)? }))
    }

    pub fn noncentral_t(df: f64, ncp: f64) -> Result<Self> {
        if !ncp.is_finite() {
            return Err(Error::domain(format!("noncentrality must be finite, got {ncp}")));
        }
        Ok(Distribution(Kind::NoncentralT {
            df: check_df(df)?,
            ncp,
        }))
    }

    pub fn chi_square(df: f64) -> Result<Self> {
        Ok(Distribution(Kind::ChiSquare { df: check_df(df)? }))
    }

    pub fn kind(&self) -> Kind {
        self.0
    }

    /// True for the distributions symmetric about zero.
    pub fn is_symmetric(&self) -> bool {
        matches!(self.0, Kind::StandardNormal | Kind::StudentT { .. })
    }

    /// The contractual absolute accuracy of [`cdf`](Self::cdf).
    pub fn tolerance(&self) -> f64 {
        match self.0 {
            Kind::NoncentralT { .. } => NONCENTRAL_TOLERANCE,
            _ => CENTRAL_TOLERANCE,
        }
    }

    /// `(P(X ≤ x), P(X > x))`, each side computed without cancellation.
    pub fn tails(&self, x: f64) -> (f64, f64) {
        if x.is_nan() {
            return (f64::NAN, f64::NAN);
        }
        match self.0 {
            Kind::StandardNormal => std_normal_tails(x),
            Kind::StudentT { df } => student_t_tails(x, df),
            Kind::NoncentralT { df, ncp } => noncentral::nct_tails(x, df, ncp),
            Kind::ChiSquare { df } => {
                if x <= 0.0 {
                    (0.0, 1.0)
                } else {
                    special::gamma_reg(0.5 * df, 0.5 * x)
                }
            }
        }
    }

    /// P(X ≤ x).
    pub fn cdf(&self, x: f64) -> f64 {
        self.tails(x).0
    }

    /// P(X > x).
    pub fn sf(&self, x: f64) -> f64 {
        self.tails(x).1
    }

    /// Inverse CDF by monotone bisection with bracket expansion.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!(
                "quantile probability must lie in (0, 1), got {p}"
            )));
        }
        let (mut lo, mut hi) = match self.0 {
            Kind::ChiSquare { df } => (0.0, df.max(1.0)),
            Kind::NoncentralT { ncp, .. } => (ncp - 1.0, ncp + 1.0),
            _ => (-1.0, 1.0),
        };
        let lower_bounded = matches!(self.0, Kind::ChiSquare { .. });

        let mut step = hi - lo;
        while !lower_bounded && self.cdf(lo) > p {
            hi = lo;
            lo -= step;
            step *= 2.0;
            if !lo.is_finite() {
                return Err(Error::domain("quantile bracket diverged"));
            }
        }
        let mut step = hi - lo;
        while self.cdf(hi) < p {
            lo = hi;
            hi += step;
            step *= 2.0;
            if !hi.is_finite() {
                return Err(Error::domain("quantile bracket diverged"));
            }
        }

        for _ in 0..2_000 {
            let mid = lo + 0.5 * (hi - lo);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(if (self.cdf(lo) - p).abs() <= (self.cdf(hi) - p).abs() {
            lo
        } else {
            hi
        })
    }

    /// One draw from the distribution. Deterministic for a given stream
    /// state.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.0 {
            Kind::StandardNormal => rng.sample(StandardNormal),
            Kind::StudentT { df } => {
                let z: f64 = rng.sample(StandardNormal);
                z / (chi_square_draw(df, rng) / df).sqrt()
            }
            Kind::NoncentralT { df, ncp } => {
                let z: f64 = rng.sample(StandardNormal);
                (z + ncp) / (chi_square_draw(df, rng) / df).sqrt()
            }
            Kind::ChiSquare { df } => chi_square_draw(df, rng),
        }
    }
}

fn chi_square_draw<R: Rng + ?Sized>(df: f64, rng: &mut R) -> f64 {
    // df was validated at construction, so the sampler always builds
    ChiSquared::new(df)
        .expect("validated degrees of freedom")
        .sample(rng)
}

/// `(Φ(x), 1 - Φ(x))` via `Φ(x) = ½ erfc(-x/√2)` and `erfc(z) = Q(½, z²)`.
pub(crate) fn std_normal_tails(x: f64) -> (f64, f64) {
    if x.is_infinite() {
        return if x > 0.0 { (1.0, 0.0) } else { (0.0, 1.0) };
    }
    let (p, q) = special::gamma_reg(0.5, 0.5 * x * x);
    let outer = 0.5 * q;
    let inner = 0.5 + 0.5 * p;
    if x < 0.0 {
        (outer, inner)
    } else {
        (inner, outer)
    }
}

fn student_t_tails(t: f64, df: f64) -> (f64, f64) {
    if t == 0.0 {
        return (0.5, 0.5);
    }
    let t2 = t * t;
    if !t2.is_finite() {
        return if t > 0.0 { (1.0, 0.0) } else { (0.0, 1.0) };
    }
    let (i, _) = special::beta_reg(0.5 * df, 0.5, df / (df + t2), t2 / (df + t2));
    let outer = 0.5 * i;
    let inner = 1.0 - outer;
    if t < 0.0 {
        (outer, inner)
    } else {
        (inner, outer)
    }
}
