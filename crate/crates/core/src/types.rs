//! Small enums shared by both workflows.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    TwoSampleT,
    ChiSquareIndependence,
}

impl TestKind {
    pub fn short_name(self) -> &'static str {
        match self {
            TestKind::TwoSampleT => "t2",
            TestKind::ChiSquareIndependence => "chi2",
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "t2" | "t" | "two_sample_t" | "ttest" => Ok(TestKind::TwoSampleT),
            "chi2" | "chisq" | "chi_square" | "chi_square_independence" => {
                Ok(TestKind::ChiSquareIndependence)
            }
            other => Err(Error::Domain(format!("unknown test kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tails {
    One,
    Two,
}

impl Tails {
    pub fn count(self) -> u8 {
        match self {
            Tails::One => 1,
            Tails::Two => 2,
        }
    }
}

impl fmt::Display for Tails {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-tailed", self.count())
    }
}

impl FromStr for Tails {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "1" | "one" => Ok(Tails::One),
            "2" | "two" => Ok(Tails::Two),
            other => Err(Error::Domain(format!("tails must be 1 or 2, got `{other}`"))),
        }
    }
}

/// Which tail a one-tailed test looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailDirection {
    Upper,
    Lower,
}

/// Sign of an observed contrast.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
    Zero,
}

impl Sign {
    pub fn of(x: f64) -> Sign {
        if x > 0.0 {
            Sign::Positive
        } else if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}
