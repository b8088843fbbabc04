//! Run reports and their JSON and text forms.

use std::fmt::Write as _;

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub check: String,
    pub anchor: String,
    /// `None` when the check errored before producing a number.
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    pub outcome: Outcome,
    pub expected: Outcome,
    /// `outcome` matched `expected`.
    pub passed: bool,
    pub informational: bool,
    pub samples: usize,
    pub message: Option<String>,
    pub details: serde_json::Value,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub scenario: String,
    pub version: String,
    pub seed: u64,
    pub passed: bool,
    pub records: Vec<Record>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// JSON with every wall-time field zeroed, for determinism comparisons.
    pub fn to_json_untimed(&self) -> String {
        let mut r = self.clone();
        for rec in &mut r.records {
            rec.wall_time_ms = 0.0;
        }
        r.to_json()
    }

    pub fn summary_table(&self) -> String {
        let width = self
            .records
            .iter()
            .map(|r| r.check.len())
            .max()
            .unwrap_or(5)
            .max(5);
        let mut out = String::new();
        let _ = writeln!(out, "scenario {} (seed {})", self.scenario, self.seed);
        let _ = writeln!(
            out,
            "  {:<width$}  {:>6}  {:>12}  {:>10}  {:>8}",
            "check", "result", "residual", "tol", "ms"
        );
        for r in &self.records {
            let result = match (r.passed, r.expected) {
                (true, Outcome::Pass) => "PASS",
                (true, _) => "XFAIL",
                (false, _) => "FAIL",
            };
            let residual = r
                .max_residual
                .map_or("-".to_string(), |v| format!("{v:.3e}"));
            let note = if r.informational { " (info)" } else { "" };
            let _ = writeln!(
                out,
                "  {:<width$}  {:>6}  {:>12}  {:>10.1e}  {:>8.1}{note}",
                r.check, result, residual, r.tolerance, r.wall_time_ms
            );
            if let (false, Some(m)) = (r.passed, &r.message) {
                let _ = writeln!(out, "      {m}");
            }
        }
        let _ = writeln!(
            out,
            "overall: {}",
            if self.passed { "PASS" } else { "FAIL" }
        );
        out
    }
}
