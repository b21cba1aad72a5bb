//! Proof obligations, their SMT-LIB encoding and discharge through an
//! external solver.

mod check;
mod emit;
mod encode;
mod solver;

pub use check::{domain_constraint, sort_of, values_equal, Checker, Counterexample, Method, ObligationRecord, Outcome};
pub use emit::{emit_script, get_value_command, symbol};
pub use encode::{encode_sem_assign, extract_hom, max_example, EncodeError, SemAssignEncoding};
pub use solver::{default_args, locate_solver, run_solver};

use crate::expr::SymbolicExpr;
use num_rational::BigRational;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::time::Duration;

/// Default per-obligation solver timeout.
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Sort {
    Int,
    Real,
}

/// A universally quantified logical variable with its domain constraint.
#[derive(Clone, Debug, PartialEq)]
pub struct Universal {
    pub name: String,
    pub sort: Sort,
    pub constraint: Option<SymbolicExpr>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ObligationKind {
    SemAssign,
    ActionRelation,
    Entailment,
    Injectivity,
    InverseIdentity,
    ExprEquality,
}

impl ObligationKind {
    pub fn name(self) -> &'static str {
        match self {
            ObligationKind::SemAssign => "sem_assign",
            ObligationKind::ActionRelation => "action_relation",
            ObligationKind::Entailment => "entailment",
            ObligationKind::Injectivity => "injectivity",
            ObligationKind::InverseIdentity => "inverse_identity",
            ObligationKind::ExprEquality => "expr_equality",
        }
    }
}

impl fmt::Display for ObligationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `∀ universals. body`, with `body` of Boolean sort.
#[derive(Clone, Debug, PartialEq)]
pub struct Obligation {
    pub kind: ObligationKind,
    pub label: String,
    pub universals: Vec<Universal>,
    pub body: SymbolicExpr,
}

impl Obligation {
    /// File name stem used when scripts are kept on disk.
    pub fn file_stem(&self) -> String {
        let mut s: String = self
            .label
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
            .collect();
        s.truncate(80);
        let mut h: u64 = 0xcbf29ce484222325;
        for b in self.label.bytes().chain(self.body.to_string().bytes()) {
            h = (h ^ b as u64).wrapping_mul(0x100000001b3);
        }
        format!("{}-{}-{:08x}", self.kind, s, h as u32)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolverResult {
    Valid,
    CounterModel(BTreeMap<String, BigRational>),
    Timeout,
    /// The solver answered `unknown`.
    Unknown(String),
    SolverError(String),
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Explicit solver binary; falls back to `SYMVERIF_SOLVER`, then `z3`.
    pub path: Option<PathBuf>,
    /// Extra arguments; empty means the defaults for the detected solver.
    pub args: Vec<String>,
    pub timeout: Duration,
    pub trig_axioms: bool,
    /// Directory that receives every emitted script.
    pub keep_dir: Option<PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { path: None, args: Vec::new(), timeout: DEFAULT_TIMEOUT, trig_axioms: false, keep_dir: None }
    }
}
