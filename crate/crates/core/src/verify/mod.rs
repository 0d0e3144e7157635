//! Oracle and finite-difference verification suites behind `pshape check`.
//!
//! Each suite compares the production kernels against an independent
//! reference (dense linear algebra, closed-form solutions or central
//! differences) and reports every comparison with its tolerance.

mod algebra;
mod derivatives;
mod flow;

use std::time::Instant;

use crate::error::{Error, Result};

pub use algebra::{detexp_suite, gmres_suite, saddle_suite};
pub use derivatives::derivative_suite;
pub use flow::flow_suite;

/// One measured quantity against its bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// The bound is a lower bound instead of an upper one.
    pub lower: bool,
}

impl Check {
    /// Passes when `value <= bound`.
    pub fn new(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, bound, lower: false }
    }

    /// Passes when `value >= bound`.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, bound, lower: true }
    }

    pub fn passed(&self) -> bool {
        if self.lower {
            self.value >= self.bound
        } else {
            self.value <= self.bound
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checks: Vec<Check>,
    pub seconds: f64,
    /// Wall-time budget of the suite.
    pub time_limit: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(Check::passed) && self.seconds <= self.time_limit
    }

    /// Failing checks, and the time budget if exceeded.
    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .checks
            .iter()
            .filter(|c| !c.passed())
            .map(|c| format!("{}: {:.3e} {} {:.1e}", c.name, c.value, if c.lower { "<" } else { ">" }, c.bound))
            .collect();
        if self.seconds > self.time_limit {
            out.push(format!("runtime {:.1} s > {:.0} s", self.seconds, self.time_limit));
        }
        out
    }
}

pub const SUITES: [&str; 5] = ["saddle", "derivatives", "detexp", "flow", "gmres"];

pub(crate) fn timed(
    name: &'static str,
    time_limit: f64,
    body: impl FnOnce(&mut Vec<Check>) -> Result<()>,
) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut checks = Vec::new();
    body(&mut checks)?;
    Ok(SuiteReport { name, checks, seconds: start.elapsed().as_secs_f64(), time_limit })
}

/// Runs the named suite; `all` runs every suite in [`SUITES`] order.
pub fn run_suite(name: &str, seed: u64) -> Result<Vec<SuiteReport>> {
    match name {
        "saddle" => Ok(vec![saddle_suite(seed)?]),
        "derivatives" => Ok(vec![derivative_suite(seed)?]),
        "detexp" => Ok(vec![detexp_suite(seed)?]),
        "flow" => Ok(vec![flow_suite()?]),
        "gmres" => Ok(vec![gmres_suite(seed)?]),
        "all" => SUITES.iter().map(|s| run_suite(s, seed).map(|mut v| v.remove(0))).collect(),
        other => Err(Error::Parameter(format!(
            "unknown suite `{other}`; expected one of {} or all",
            SUITES.join(", ")
        ))),
    }
}

pub(crate) fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let norm = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / norm.max(f64::MIN_POSITIVE)
}
