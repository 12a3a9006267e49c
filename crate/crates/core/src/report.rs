//! Claim reports: a measured residual judged against its numerical error.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Supported,
    Refuted,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Supported => "SUPPORTED",
            Verdict::Refuted => "REFUTED",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// Thresholds of the verdict rule, as multiples of the error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerdictPolicy {
    pub support_factor: f64,
    pub refute_factor: f64,
}

impl Default for VerdictPolicy {
    fn default() -> Self {
        Self { support_factor: 10.0, refute_factor: 100.0 }
    }
}

impl VerdictPolicy {
    /// SUPPORTED iff `residual ≤ support·error`, REFUTED iff
    /// `residual > refute·error`, INCONCLUSIVE otherwise.
    pub fn judge(&self, residual: f64, error_estimate: f64) -> Verdict {
        if residual <= self.support_factor * error_estimate {
            Verdict::Supported
        } else if residual > self.refute_factor * error_estimate {
            Verdict::Refuted
        } else {
            Verdict::Inconclusive
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimReport {
    pub claim_id: String,
    pub paper_ref: String,
    pub residual: f64,
    pub error_estimate: f64,
    pub verdict: Verdict,
    pub metadata: BTreeMap<String, Value>,
}

impl ClaimReport {
    /// A measured claim, judged by `policy`. Non-finite or negative inputs
    /// produce an INCONCLUSIVE report with a diagnostic instead.
    pub fn measured(
        claim_id: impl Into<String>,
        paper_ref: impl Into<String>,
        residual: f64,
        error_estimate: f64,
        policy: &VerdictPolicy,
    ) -> Self {
        let (claim_id, paper_ref) = (claim_id.into(), paper_ref.into());
        if !(residual.is_finite() && error_estimate.is_finite() && residual >= 0.0 && error_estimate >= 0.0) {
            return Self::inconclusive(
                claim_id,
                paper_ref,
                format!("non-finite or negative measurement (residual {residual}, error {error_estimate})"),
            );
        }
        Self {
            claim_id,
            paper_ref,
            residual,
            error_estimate,
            verdict: policy.judge(residual, error_estimate),
            metadata: BTreeMap::new(),
        }
    }

    /// A claim that could not be measured. Residual and error are zero and
    /// the reason is stored under `metadata.diagnostic`.
    pub fn inconclusive(claim_id: impl Into<String>, paper_ref: impl Into<String>, diagnostic: impl Into<String>) -> Self {
        let mut metadata = BTreeMap::new();
        metadata.insert("diagnostic".to_owned(), Value::String(diagnostic.into()));
        Self {
            claim_id: claim_id.into(),
            paper_ref: paper_ref.into(),
            residual: 0.0,
            error_estimate: 0.0,
            verdict: Verdict::Inconclusive,
            metadata,
        }
    }

    pub fn diagnostic(&self) -> Option<&str> {
        self.metadata.get("diagnostic").and_then(Value::as_str)
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_owned(), value.into());
        self
    }

    /// Re-applies the verdict rule under a different policy. Reports that
    /// carry a diagnostic stay INCONCLUSIVE.
    pub fn rejudge(mut self, policy: &VerdictPolicy) -> Self {
        if self.diagnostic().is_none() {
            self.verdict = policy.judge(self.residual, self.error_estimate);
        }
        self
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("claim reports always serialize")
    }
}

/// Newline-delimited JSON, one report per line.
pub fn to_ndjson(reports: &[ClaimReport]) -> String {
    reports.iter().map(|r| r.to_json_line() + "\n").collect()
}
