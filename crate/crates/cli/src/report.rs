//! Verification reports in human and machine (JSON) form.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Warn,
    Fail,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Warn => "warn",
            Status::Fail => "fail",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub kind: String,
    pub status: Status,
    /// Non-finite measurements are dropped.
    pub measured: BTreeMap<String, f64>,
    pub tolerance: Option<f64>,
    pub seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, kind: &str) -> Self {
        CheckRecord {
            name: name.into(),
            kind: kind.to_string(),
            status: Status::Pass,
            measured: BTreeMap::new(),
            tolerance: None,
            seconds: 0.0,
            note: None,
        }
    }

    pub fn measure(&mut self, key: &str, value: f64) {
        if value.is_finite() {
            self.measured.insert(key.to_string(), value);
        }
    }

    pub fn fail(&mut self, why: impl Into<String>) {
        self.status = Status::Fail;
        self.push_note(why);
    }

    /// Downgrades a pass to a warning. A failure stays a failure.
    pub fn warn(&mut self, why: impl Into<String>) {
        if self.status == Status::Pass {
            self.status = Status::Warn;
        }
        self.push_note(why);
    }

    pub fn push_note(&mut self, text: impl Into<String>) {
        let text = text.into();
        self.note = Some(match self.note.take() {
            Some(n) => format!("{n}; {text}"),
            None => text,
        });
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub toolkit: String,
    pub version: String,
    pub seed: u64,
    /// The scenario file as parsed.
    pub config: serde_json::Value,
    pub checks: Vec<CheckRecord>,
}

impl Report {
    pub fn new(seed: u64, config: serde_json::Value) -> Self {
        Report {
            toolkit: "statvar".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            config,
            checks: Vec::new(),
        }
    }

    pub fn failed(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Fail)
    }

    pub fn count(&self, s: Status) -> usize {
        self.checks.iter().filter(|c| c.status == s).count()
    }

    pub fn to_machine(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_human(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} (seed {})", self.toolkit, self.version, self.seed);
        for c in &self.checks {
            let _ = write!(out, "[{}] {}", c.status.as_str().to_uppercase(), c.name);
            if c.name != c.kind {
                let _ = write!(out, " ({})", c.kind);
            }
            if let Some(t) = c.tolerance {
                let _ = write!(out, "  tol {t:e}");
            }
            let _ = writeln!(out, "  {:.3}s", c.seconds);
            for (k, v) in &c.measured {
                let _ = writeln!(out, "    {k:<28} {v:.12e}");
            }
            if let Some(n) = &c.note {
                let _ = writeln!(out, "    note: {n}");
            }
        }
        let _ = writeln!(
            out,
            "{} checks: {} pass, {} warn, {} fail",
            self.checks.len(),
            self.count(Status::Pass),
            self.count(Status::Warn),
            self.count(Status::Fail)
        );
        out
    }
}
