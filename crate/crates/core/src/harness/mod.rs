//! Experiment drivers shared by the command-line tool and the test suites.
//!
//! Every command returns an [`ExperimentReport`]: the inputs and their
//! digest, whatever bounds and audits were computed, and a list of named
//! pass/fail verdicts from which the process exit code is derived.

mod commands;
mod selftest;

use std::collections::HashMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bounds::BoundsReport;
use crate::codec::{LeakageAudit, SchemeDescriptor, DEFAULT_ATOM_BUDGET};
use crate::dist::JointDistribution;
use crate::error::{Error, Result};
use crate::separation::{Separation, SeparationSpec};

pub use commands::{
    cmd_bounds, cmd_codec, cmd_example1, cmd_example2, evaluate_scheme, CodecRequest, SchemeChoice,
    EXAMPLE1_MAX_N,
};
pub use selftest::{
    cmd_selftest, optimal_expected_length, suite_coding, suite_efrl, suite_frl, suite_functional,
    suite_identity, suite_remark4, suite_split, suite_thm1, Fault, SelftestSizes,
};

/// Environment variable overriding [`DEFAULT_ATOM_BUDGET`].
pub const ATOM_BUDGET_ENV: &str = "PRIVCODE_ATOM_BUDGET";

/// Absolute tolerance on every equality and inequality check.
pub const CHECK_TOL: f64 = 1e-9;

pub fn atom_budget() -> u64 {
    std::env::var(ATOM_BUDGET_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_ATOM_BUDGET)
}

pub fn load_distribution(path: &Path) -> Result<JointDistribution> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::ParseError(format!("{}: {e}", path.display())))?;
    JointDistribution::from_json(&text)
}

pub fn load_separation(path: &Path, j: &JointDistribution) -> Result<Separation> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::ParseError(format!("{}: {e}", path.display())))?;
    let spec: SeparationSpec =
        serde_json::from_str(&text).map_err(|e| Error::ParseError(e.to_string()))?;
    Separation::from_spec(&spec, &j.p_x())
}

/// What a failed verdict means for the exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Bound,
    Leakage,
    Lossless,
}

impl VerdictKind {
    fn exit_code(self) -> i32 {
        match self {
            VerdictKind::Bound => 2,
            VerdictKind::Leakage => 3,
            VerdictKind::Lossless => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub kind: VerdictKind,
    pub pass: bool,
    pub cases: u64,
    pub failures: u64,
    /// First failing case.
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

/// Tallies named checks across many cases.
#[derive(Debug, Default)]
pub struct Checker {
    verdicts: Vec<Verdict>,
    index: HashMap<String, usize>,
}

impl Checker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn check(
        &mut self,
        name: &str,
        kind: VerdictKind,
        ok: bool,
        detail: impl FnOnce() -> String,
    ) {
        let i = *self.index.entry(name.to_string()).or_insert_with(|| {
            self.verdicts.push(Verdict {
                name: name.to_string(),
                kind,
                pass: true,
                cases: 0,
                failures: 0,
                detail: String::new(),
            });
            self.verdicts.len() - 1
        });
        let v = &mut self.verdicts[i];
        v.cases += 1;
        if !ok {
            v.failures += 1;
            v.pass = false;
            if v.detail.is_empty() {
                v.detail = detail();
            }
        }
    }

    /// `a <= b` within [`CHECK_TOL`].
    pub fn le(
        &mut self,
        name: &str,
        kind: VerdictKind,
        a: f64,
        b: f64,
        what: impl FnOnce() -> String,
    ) {
        self.check(name, kind, a <= b + CHECK_TOL, || {
            format!("{}: {a} > {b}", what())
        });
    }

    /// `|a - b| <= CHECK_TOL`.
    pub fn close(
        &mut self,
        name: &str,
        kind: VerdictKind,
        a: f64,
        b: f64,
        what: impl FnOnce() -> String,
    ) {
        self.check(name, kind, (a - b).abs() <= CHECK_TOL, || {
            format!("{}: {a} != {b}", what())
        });
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn verdicts(&self) -> &[Verdict] {
        &self.verdicts
    }

    pub fn into_verdicts(self) -> Vec<Verdict> {
        self.verdicts
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub command: String,
    /// SHA-256 of the canonical JSON of `inputs`.
    pub digest: String,
    pub inputs: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeDescriptor>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit: Option<LeakageAudit>,
    pub results: serde_json::Value,
    pub verdicts: Vec<Verdict>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_ms: Option<f64>,
}

pub fn digest(inputs: &serde_json::Value) -> String {
    hex::encode(Sha256::digest(
        serde_json::to_vec(inputs).expect("json value serializes"),
    ))
}

impl ExperimentReport {
    pub fn new(command: &str, inputs: serde_json::Value) -> Self {
        ExperimentReport {
            command: command.to_string(),
            digest: digest(&inputs),
            inputs,
            bounds: None,
            scheme: None,
            audit: None,
            results: serde_json::Value::Object(Default::default()),
            verdicts: Vec::new(),
            notes: Vec::new(),
            wall_clock_ms: None,
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("result serializes");
        self.results
            .as_object_mut()
            .expect("results is an object")
            .insert(key.to_string(), v);
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    /// 0 if every verdict passes, otherwise the most severe failure:
    /// 4 lossless, 3 leakage, 2 bound.
    pub fn exit_code(&self) -> i32 {
        self.verdicts
            .iter()
            .filter(|v| !v.pass)
            .map(|v| v.kind.exit_code())
            .max()
            .unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_priority() {
        let mut r = ExperimentReport::new("t", serde_json::json!({"a": 1}));
        assert_eq!(r.exit_code(), 0);
        let mut c = Checker::new();
        c.check("b", VerdictKind::Bound, false, || "x".into());
        c.check("l", VerdictKind::Leakage, true, String::new);
        r.verdicts = c.into_verdicts();
        assert_eq!(r.exit_code(), 2);
        r.verdicts[1].pass = false;
        assert_eq!(r.exit_code(), 3);
    }

    #[test]
    fn digest_is_stable() {
        let a = digest(&serde_json::json!({"b": 1, "a": [1, 2]}));
        let b = digest(&serde_json::json!({"a": [1, 2], "b": 1}));
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn checker_keeps_first_failure() {
        let mut c = Checker::new();
        c.le("k", VerdictKind::Bound, 1.0, 2.0, || "one".into());
        c.le("k", VerdictKind::Bound, 3.0, 2.0, || "two".into());
        c.le("k", VerdictKind::Bound, 4.0, 2.0, || "three".into());
        let v = &c.verdicts()[0];
        assert_eq!((v.cases, v.failures), (3, 2));
        assert!(v.detail.starts_with("two"));
    }
}
