use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Quadrature,
    MonteCarlo,
    Enumeration,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte-carlo",
            Method::Enumeration => "enumeration",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "quadrature" => Some(Method::Quadrature),
            "monte-carlo" => Some(Method::MonteCarlo),
            "enumeration" => Some(Method::Enumeration),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A scalar estimate together with its uncertainty and provenance.
///
/// For quadrature `stderr` holds the nested-refinement residual, for Monte
/// Carlo the standard error of the sample mean, and for enumeration it is 0.
/// `flagged` marks estimates whose residual exceeded the requested tolerance
/// or whose series did not converge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithCI {
    pub value: f64,
    pub stderr: f64,
    pub method: Method,
    pub samples: usize,
    pub flagged: bool,
}

impl EstimateWithCI {
    pub fn enumeration(value: f64, terms: usize) -> Self {
        Self {
            value,
            stderr: 0.0,
            method: Method::Enumeration,
            samples: terms,
            flagged: false,
        }
    }

    pub fn quadrature(value: f64, residual: f64, nodes: usize, converged: bool) -> Self {
        Self {
            value,
            stderr: residual.abs(),
            method: Method::Quadrature,
            samples: nodes,
            flagged: !converged,
        }
    }

    pub fn monte_carlo(acc: &MeanAccumulator) -> Self {
        Self {
            value: acc.mean(),
            stderr: acc.stderr(),
            method: Method::MonteCarlo,
            samples: acc.count(),
            flagged: false,
        }
    }

    /// Half-width of a `k`-sigma interval.
    pub fn band(&self, k: f64) -> f64 {
        k * self.stderr
    }

    pub fn with_flag(mut self, flagged: bool) -> Self {
        self.flagged |= flagged;
        self
    }
}

/// Running first and second moments of a sample.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MeanAccumulator {
    n: usize,
    sum: f64,
    sum_sq: f64,
}

impl MeanAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &MeanAccumulator) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.sum / self.n as f64
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let m = self.sum / n;
        ((self.sum_sq - n * m * m) / (n - 1.0)).max(0.0)
    }

    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.variance() / self.n as f64).sqrt()
    }
}
