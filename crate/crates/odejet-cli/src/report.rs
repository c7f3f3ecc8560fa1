//! Machine-readable run reports.
//!
//! One [`RunReport`] is emitted per invocation. The field set — `command`,
//! `seed`, `checks` (each with `name`, `status`, `details`), `verdict`,
//! `wall_ms` — is a stable schema: fields are never renamed within a major
//! version, only added.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
}

/// One named check with its outcome and free-form supporting detail.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: CheckStatus,
    pub details: String,
}

/// The full result of one CLI invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    /// The invocation's arguments, echoed.
    pub command: String,
    pub seed: u64,
    pub checks: Vec<CheckRecord>,
    pub verdict: CheckStatus,
    pub wall_ms: u64,
}

impl RunReport {
    pub fn new(command: impl Into<String>, seed: u64) -> Self {
        RunReport {
            command: command.into(),
            seed,
            checks: Vec::new(),
            verdict: CheckStatus::Pass,
            wall_ms: 0,
        }
    }

    /// Record a check and fold its outcome into the verdict.
    pub fn check(&mut self, name: impl Into<String>, pass: bool, details: impl Into<String>) {
        let status = if pass { CheckStatus::Pass } else { CheckStatus::Fail };
        if !pass {
            self.verdict = CheckStatus::Fail;
        }
        self.checks.push(CheckRecord {
            name: name.into(),
            status,
            details: details.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.verdict == CheckStatus::Pass
    }

    /// Plain-text rendering. With `quiet`, detail blocks are suppressed and
    /// only the per-check lines and the verdict remain.
    pub fn render_human(&self, quiet: bool) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = match c.status {
                CheckStatus::Pass => "pass",
                CheckStatus::Fail => "FAIL",
            };
            out.push_str(&format!("check {:<34} {}\n", c.name, status));
            if !quiet && !c.details.is_empty() {
                for line in c.details.lines() {
                    out.push_str("  ");
                    out.push_str(line);
                    out.push('\n');
                }
            }
        }
        let verdict = match self.verdict {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
        };
        out.push_str(&format!(
            "verdict: {} ({} checks, seed {}, {} ms)\n",
            verdict,
            self.checks.len(),
            self.seed,
            self.wall_ms
        ));
        out
    }
}
