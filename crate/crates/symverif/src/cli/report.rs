//! Machine-readable and human-readable run reports.

use crate::logic::{FuzzReport, ProofNode};
use crate::smt::ObligationRecord;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Valid,
    Invalid,
    Unknown,
}

impl Status {
    /// 0 = Valid, 1 = Invalid, 2 = Unknown.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Valid => 0,
            Status::Invalid => 1,
            Status::Unknown => 2,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Valid => "Valid",
            Status::Invalid => "Invalid",
            Status::Unknown => "Unknown",
        })
    }
}

/// Obligations listed in the text form.
const SHOWN: usize = 200;

#[derive(Clone, Debug, Default, Serialize)]
pub struct Totals {
    pub obligations: usize,
    pub solver_calls: u64,
    pub solver_seconds: f64,
    pub wall_seconds: f64,
    pub rules: BTreeMap<String, usize>,
}

/// Result of one command. Struct fields serialize in declaration order and
/// maps are ordered, so the JSON form is stable apart from timings.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub file: String,
    pub status: Status,
    /// Verdict or outcome text.
    pub verdict: String,
    pub detail: Option<String>,
    pub proof: Option<ProofNode>,
    pub obligations: Vec<ObligationRecord>,
    pub fuzz: Option<FuzzReport>,
    pub data: BTreeMap<String, serde_json::Value>,
    pub totals: Totals,
}

impl Report {
    pub fn new(command: &str, file: &str, status: Status, verdict: impl Into<String>) -> Report {
        Report {
            command: command.to_string(),
            file: file.to_string(),
            status,
            verdict: verdict.into(),
            detail: None,
            proof: None,
            obligations: Vec::new(),
            fuzz: None,
            data: BTreeMap::new(),
            totals: Totals::default(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Report {
        self.data.insert(key.to_string(), serde_json::to_value(value).expect("serializable"));
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    fn proof_text(node: &ProofNode, depth: usize, out: &mut String) {
        out.push_str(&format!("  {}{} [{}] {}\n", "  ".repeat(depth), node.rule, node.path, node.judgment));
        for c in &node.children {
            Report::proof_text(c, depth + 1, out);
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}: {}", self.command, self.file, self.verdict)?;
        if let Some(d) = &self.detail {
            writeln!(f, "  {}", d)?;
        }
        if let Some(p) = &self.proof {
            writeln!(f, "proof:")?;
            let mut s = String::new();
            Report::proof_text(p, 0, &mut s);
            f.write_str(&s)?;
        }
        if !self.obligations.is_empty() {
            writeln!(f, "obligations:")?;
            for o in self.obligations.iter().take(SHOWN) {
                writeln!(f, "  {:<10} {:<12} {:>9.1} ms  {}  {}", o.rule, o.path, o.solver_ms, o.method, o.label)?;
            }
            if self.obligations.len() > SHOWN {
                writeln!(f, "  ... {} more (see --json)", self.obligations.len() - SHOWN)?;
            }
        }
        if let Some(z) = &self.fuzz {
            write!(f, "fuzz: {}/{} passed, {} skipped", z.passed, z.trials, z.skipped)?;
            match &z.first_discrepancy {
                Some(d) => writeln!(
                    f,
                    "; trial {} element {} on `{}`: expected {}, got {} from {}",
                    d.trial, d.element, d.variable, d.expected, d.actual, d.state
                )?,
                None => writeln!(f)?,
            }
        }
        for (k, v) in &self.data {
            match v {
                serde_json::Value::String(s) => writeln!(f, "{}: {}", k, s)?,
                other => writeln!(f, "{}: {}", k, other)?,
            }
        }
        let t = &self.totals;
        write!(
            f,
            "totals: {} obligations, {} solver calls, {:.3} s solver, {:.3} s wall",
            t.obligations, t.solver_calls, t.solver_seconds, t.wall_seconds
        )
    }
}
