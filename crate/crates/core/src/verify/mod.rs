//! Deciding `<<A>> φ` under memoryless imperfect-information strategies.
//!
//! Three engines share one result type:
//! - [`verify_bruteforce`] enumerates every strategy and is exact;
//! - [`verify_approx`] sandwiches the answer between a uniform lower and a
//!   perfect-information upper fixpoint and may be inconclusive;
//! - [`verify_dfs`] searches partial strategies depth-first, pruning and
//!   learning from refuted fragments, and is exact.
//!
//! Outcomes start from the whole coalition neighborhood of the initial state
//! and the scheduler resolves interleaving adversarially.

mod bruteforce;
pub mod certificate;
mod dfs;
mod fixpoint;
pub mod outcome;
mod strategy;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amas::Formula;
use crate::model::GlobalModel;

pub use bruteforce::{strategy_space, verify_bruteforce};
pub use dfs::verify_dfs;
pub use fixpoint::{fixpoint_lower, fixpoint_upper, verify_approx};
pub use outcome::{eval_objective, prune_model, Submodel};
pub use strategy::Strategy;

pub const DEFAULT_STRATEGY_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("strategy space of {size} exceeds the cap of {cap}")]
    StrategySpaceExceeded { size: String, cap: u64 },
    #[error("verification timed out")]
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Truth {
    True,
    False,
    Inconclusive,
}

impl Truth {
    pub fn as_str(self) -> &'static str {
        match self {
            Truth::True => "true",
            Truth::False => "false",
            Truth::Inconclusive => "inconclusive",
        }
    }
}

impl From<bool> for Truth {
    fn from(b: bool) -> Self {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bruteforce,
    Fixpoint,
    Dfs,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Bruteforce => "bruteforce",
            Method::Fixpoint => "fixpoint",
            Method::Dfs => "dfs",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    /// Accepts `approx` as an alias of `fixpoint`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bruteforce" => Ok(Method::Bruteforce),
            "approx" | "fixpoint" => Ok(Method::Fixpoint),
            "dfs" => Ok(Method::Dfs),
            _ => Err(format!("unknown method {s:?} (expected bruteforce, approx or dfs)")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statistics {
    /// States of the model the engine ran on.
    pub states: usize,
    /// Complete strategies evaluated (bruteforce, dfs) or fixpoint iterations.
    pub strategies_examined: u64,
    /// Search nodes (dfs) or pre-image evaluations (fixpoint).
    pub nodes: u64,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationResult {
    pub truth: Truth,
    pub strategy: Option<Strategy>,
    pub method: Method,
    pub statistics: Statistics,
}

/// Serializable summary of a verification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub formula: String,
    pub method: Method,
    pub model: String,
    pub truth: Truth,
    pub strategy: Option<serde_json::Value>,
    pub statistics: Statistics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl VerificationResult {
    /// `model` labels the input, e.g. `full` or `reduced`.
    pub fn record(&self, model: &GlobalModel, formula: &Formula, label: &str, timings: bool) -> ResultRecord {
        ResultRecord {
            formula: model.amas().display_formula(formula),
            method: self.method,
            model: label.to_string(),
            truth: self.truth,
            strategy: self.strategy.as_ref().map(|s| s.to_json(model.amas())),
            statistics: self.statistics.clone(),
            elapsed_ms: timings.then_some(self.statistics.elapsed.as_millis() as u64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub strategy_cap: u64,
    pub deadline: Option<Instant>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            strategy_cap: DEFAULT_STRATEGY_CAP,
            deadline: None,
        }
    }
}

impl Limits {
    pub fn with_timeout(timeout: Duration) -> Self {
        Limits {
            deadline: Some(Instant::now() + timeout),
            ..Limits::default()
        }
    }
}

/// Work counter checking the deadline every few hundred ticks.
pub(crate) struct Budget {
    limits: Limits,
    ticks: u64,
}

impl Budget {
    pub(crate) fn new(limits: Limits) -> Self {
        Budget { limits, ticks: 0 }
    }

    pub(crate) fn tick(&mut self) -> Result<(), VerifyError> {
        self.ticks += 1;
        if self.ticks % 256 == 1 {
            self.check_deadline()?;
        }
        Ok(())
    }

    pub(crate) fn check_deadline(&self) -> Result<(), VerifyError> {
        match self.limits.deadline {
            Some(d) if Instant::now() >= d => Err(VerifyError::Timeout),
            _ => Ok(()),
        }
    }

    pub(crate) fn cap(&self) -> u64 {
        self.limits.strategy_cap
    }
}

/// Runs the engine selected by `method`.
pub fn verify(
    model: &GlobalModel,
    formula: &Formula,
    method: Method,
    limits: Limits,
) -> Result<VerificationResult, VerifyError> {
    match method {
        Method::Bruteforce => verify_bruteforce(model, formula, limits),
        Method::Fixpoint => verify_approx(model, formula, limits),
        Method::Dfs => verify_dfs(model, formula, limits),
    }
}

/// Coalition in declaration order without duplicates.
pub(crate) fn normalized_coalition(formula: &Formula) -> Vec<crate::amas::AgentId> {
    let mut c = formula.coalition.clone();
    c.sort();
    c.dedup();
    c
}
