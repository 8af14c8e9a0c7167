//! Diagnostics reports: one record per enabled check, in execution order.

use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    /// Hypothesis or result label the check verifies.
    pub tag: String,
    pub passed: bool,
    pub verdict: String,
    pub witness: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub command: String,
    pub seed: u64,
    pub parameters: Value,
    pub checks: Vec<CheckRecord>,
    pub passed: bool,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub name: String,
    pub seconds: f64,
}

/// Wall-clock times, kept out of the report so that it stays reproducible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timings {
    pub command: String,
    pub checks: Vec<Timing>,
    pub total_seconds: f64,
}

pub struct ReportBuilder {
    command: String,
    seed: u64,
    parameters: Value,
    checks: Vec<CheckRecord>,
    timings: Vec<Timing>,
    started: Instant,
    lap: Instant,
}

impl ReportBuilder {
    pub fn new(command: &str, seed: u64, parameters: Value) -> Self {
        let now = Instant::now();
        Self {
            command: command.to_string(),
            seed,
            parameters,
            checks: Vec::new(),
            timings: Vec::new(),
            started: now,
            lap: now,
        }
    }

    /// Appends a record; its time is measured from the previous record.
    pub fn record(&mut self, name: &str, tag: &str, passed: bool, verdict: impl Into<String>, witness: Value) {
        let now = Instant::now();
        self.timings.push(Timing {
            name: name.to_string(),
            seconds: (now - self.lap).as_secs_f64(),
        });
        self.lap = now;
        debug_assert!(self.checks.iter().all(|c| c.name != name), "duplicate check {name}");
        self.checks.push(CheckRecord {
            name: name.to_string(),
            tag: tag.to_string(),
            passed,
            verdict: verdict.into(),
            witness,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn finish(self, pass_verdict: &str, fail_verdict: &str) -> (DiagnosticsReport, Timings) {
        let passed = self.passed();
        let timings = Timings {
            command: self.command.clone(),
            checks: self.timings,
            total_seconds: self.started.elapsed().as_secs_f64(),
        };
        let report = DiagnosticsReport {
            command: self.command,
            seed: self.seed,
            parameters: self.parameters,
            checks: self.checks,
            passed,
            verdict: if passed { pass_verdict } else { fail_verdict }.to_string(),
        };
        (report, timings)
    }
}

/// `PASS`/`FAIL` line for a record.
pub fn summary_line(c: &CheckRecord) -> String {
    format!("{} [{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.tag, c.name, c.verdict)
}
