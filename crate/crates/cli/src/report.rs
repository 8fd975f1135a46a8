//! Versioned, deterministic command reports.

use std::collections::BTreeMap;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    NotComputable,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::NotComputable => "not-computable",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// Present only for a nonzero residual.
    pub residual: Option<Value>,
    pub detail: Option<String>,
}

impl Check {
    /// Passes iff `residual` is `None` (i.e. zero).
    pub fn zero(name: impl Into<String>, residual: Option<Value>) -> Check {
        let status = if residual.is_none() { Status::Pass } else { Status::Fail };
        Check { name: name.into(), status, residual, detail: None }
    }

    pub fn not_computable(name: impl Into<String>, why: impl Into<String>) -> Check {
        Check { name: name.into(), status: Status::NotComputable, residual: None, detail: Some(why.into()) }
    }

    fn to_json(&self) -> Value {
        let mut v = json!({ "name": self.name, "status": self.status.as_str() });
        if let Some(r) = &self.residual {
            v["residual"] = r.clone();
        }
        if let Some(d) = &self.detail {
            v["detail"] = json!(d);
        }
        v
    }
}

pub struct Report {
    command: String,
    echo: Vec<String>,
    hasher: Sha256,
    checks: Vec<Check>,
    results: BTreeMap<String, Value>,
    timing_ms: Option<f64>,
}

impl Report {
    pub fn new(command: &str, echo: Vec<String>) -> Report {
        Report {
            command: command.to_string(),
            echo,
            hasher: Sha256::new(),
            checks: Vec::new(),
            results: BTreeMap::new(),
            timing_ms: None,
        }
    }

    /// Fold a canonical rendering of an input into the inputs digest.
    pub fn digest_input(&mut self, label: &str, v: &Value) {
        self.hasher.update(label.as_bytes());
        self.hasher.update([0]);
        self.hasher.update(v.to_string().as_bytes());
        self.hasher.update([0]);
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn result(&mut self, key: impl Into<String>, v: Value) {
        self.results.insert(key.into(), v);
    }

    pub fn set_timing(&mut self, ms: f64) {
        self.timing_ms = Some(ms);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    fn digest(&self) -> String {
        format!("{:x}", self.hasher.clone().finalize())
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "args": self.echo,
            "inputs_sha256": self.digest(),
            "checks": self.checks.iter().map(Check::to_json).collect::<Vec<_>>(),
            "results": self.results,
            "status": if self.passed() { "pass" } else { "fail" },
        });
        if let Some(ms) = self.timing_ms {
            v["timing_ms"] = json!(ms);
        }
        v
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("bialg {} (schema {SCHEMA_VERSION})\n", self.command);
        out += &format!("args: {}\n", self.echo.join(" "));
        out += &format!("inputs sha256: {}\n", self.digest());
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::NotComputable => "N/C ",
            };
            out += &format!("{tag}  {}", c.name);
            if let Some(d) = &c.detail {
                out += &format!(" — {d}");
            }
            if let Some(r) = &c.residual {
                out += &format!("\n      residual: {r}");
            }
            out.push('\n');
        }
        for (k, v) in &self.results {
            out += &format!("{k}: {v}\n");
        }
        if let Some(ms) = self.timing_ms {
            out += &format!("time: {ms:.1} ms\n");
        }
        out += &format!("status: {}\n", if self.passed() { "pass" } else { "fail" });
        out
    }
}
