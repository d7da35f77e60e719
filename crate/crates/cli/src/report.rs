//! JSON reports: `{version, config, results: [{check, status, margin, details}]}`.

use std::io::Write;

use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Not applicable to this input, e.g. a seed on a basin boundary.
    Skip,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub check: String,
    pub status: Status,
    /// Signed slack of the criterion: non-negative when it holds.
    pub margin: Option<f64>,
    pub details: Value,
}

impl CheckResult {
    pub fn new(check: &str, status: Status, margin: Option<f64>, details: Value) -> Self {
        Self {
            check: check.to_string(),
            status,
            margin,
            details,
        }
    }

    /// Status from the sign of the margin.
    pub fn from_margin(check: &str, margin: f64, details: Value) -> Self {
        Self::new(check, Status::from_bool(margin >= 0.0), Some(margin), details)
    }

    pub fn fail(check: &str, message: impl std::fmt::Display) -> Self {
        Self::new(check, Status::Fail, None, json!({ "error": message.to_string() }))
    }

    pub fn skip(check: &str, reason: impl std::fmt::Display) -> Self {
        Self::new(check, Status::Skip, None, json!({ "reason": reason.to_string() }))
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub config: Value,
    pub results: Vec<CheckResult>,
}

impl Report {
    pub fn new(config: Value) -> Self {
        Self {
            config,
            results: Vec::new(),
        }
    }

    pub fn push(&mut self, r: CheckResult) {
        self.results.push(r);
    }

    pub fn extend(&mut self, rs: impl IntoIterator<Item = CheckResult>) {
        self.results.extend(rs);
    }

    pub fn failures(&self) -> Vec<&str> {
        self.results
            .iter()
            .filter(|r| r.status == Status::Fail)
            .map(|r| r.check.as_str())
            .collect()
    }

    pub fn passed(&self) -> usize {
        self.results.iter().filter(|r| r.status == Status::Pass).count()
    }

    pub fn to_json(&self) -> Value {
        let results: Vec<Value> = self
            .results
            .iter()
            .map(|r| {
                json!({
                    "check": r.check,
                    "status": r.status.as_str(),
                    "margin": r.margin.filter(|m| m.is_finite()),
                    "details": r.details,
                })
            })
            .collect();
        json!({
            "version": env!("CARGO_PKG_VERSION"),
            "config": self.config,
            "results": results,
        })
    }

    /// Prints the report and names failing checks on `err`; returns the exit code.
    pub fn emit(&self, out: &mut dyn Write, err: &mut dyn Write) -> std::io::Result<i32> {
        let text = serde_json::to_string_pretty(&self.to_json()).expect("reports serialize");
        out.write_all(text.as_bytes())?;
        out.write_all(b"\n")?;
        let failures = self.failures();
        if failures.is_empty() {
            Ok(crate::EXIT_OK)
        } else {
            let mut names = failures.clone();
            names.dedup();
            writeln!(err, "failed checks: {}", names.join(", "))?;
            Ok(crate::EXIT_FAILED)
        }
    }
}

/// Non-finite values become JSON null.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}
