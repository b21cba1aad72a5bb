//! Symmetry triples and the rule engine that certifies them.

mod fuzz;
mod post;
mod verify;

pub use fuzz::{fuzz_soundness, Discrepancy, FuzzReport};
pub use post::{assigned_expr, injectivity_check, invert_assignment, post_transform};
pub use verify::{verify, VerifyConfig, Verifier};

use crate::expr::{ExprError, SymbolicExpr};
use crate::group::{check_action, Certificate, GroupAction, GroupContext, GroupError, Homomorphism};
use crate::lang::{Command, StmtPath};
use crate::smt::{Checker, EncodeError, ObligationRecord};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LogicError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("no inverse found for the assignment to `{var}`; an `inverse:` annotation is required")]
    NoInverseFound { var: String },
    #[error("candidate inverse for `{var}` is not verified: {reason}")]
    InverseUnverified { var: String, reason: String },
    #[error("ill-formed triple: {0}")]
    IllFormed(String),
}

/// `⦅pre⦆ program ⦅post⦆ hom`.
#[derive(Clone, Debug)]
pub struct SymmetryTriple {
    pub pre: GroupAction,
    pub program: Command,
    pub post: GroupAction,
    pub hom: Homomorphism,
    /// Intermediate assertions: the action holding after the statement and
    /// the homomorphism from the statement's pre-condition group.
    pub annotations: BTreeMap<StmtPath, (GroupAction, Homomorphism)>,
    /// User-supplied inverses `f̂` of assignments, over the post-state.
    pub inverses: BTreeMap<StmtPath, SymbolicExpr>,
}

impl SymmetryTriple {
    pub fn new(pre: GroupAction, program: Command, post: GroupAction, hom: Homomorphism) -> Result<Self, LogicError> {
        if !hom.source.same_group(&pre.group) || !hom.target.same_group(&post.group) {
            return Err(LogicError::IllFormed(format!(
                "{} maps {} to {}, but the triple relates {} and {}",
                hom.name, hom.source.name, hom.target.name, pre.group.name, post.group.name
            )));
        }
        Ok(SymmetryTriple {
            pre,
            program,
            post,
            hom,
            annotations: BTreeMap::new(),
            inverses: BTreeMap::new(),
        })
    }

    /// Annotation paths are stored in their normalized form.
    pub fn annotate(&mut self, path: &StmtPath, action: GroupAction, hom: Homomorphism) {
        self.annotations.insert(path.normalize(&self.program), (action, hom));
    }

    pub fn with_inverse(&mut self, path: &StmtPath, inverse: SymbolicExpr) {
        self.inverses.insert(path.normalize(&self.program), inverse);
    }

    /// Validity certificates of the pre- and post-condition actions.
    pub fn certify(&self, checker: &Checker, ctx: &GroupContext) -> Result<(Certificate, Certificate), GroupError> {
        Ok((check_action(&self.pre, checker, ctx)?, check_action(&self.post, checker, ctx)?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Rule {
    #[serde(rename = "SKIP")]
    Skip,
    #[serde(rename = "ASSGN")]
    Assgn,
    #[serde(rename = "SEM-ASSGN")]
    SemAssgn,
    #[serde(rename = "SEQ")]
    Seq,
    #[serde(rename = "IF")]
    If,
    #[serde(rename = "FOR")]
    For,
    #[serde(rename = "WHILE")]
    While,
    #[serde(rename = "CONST")]
    Const,
    #[serde(rename = "LIFT")]
    Lift,
    #[serde(rename = "ID")]
    Id,
    #[serde(rename = "DIR-PROD")]
    DirProd,
    #[serde(rename = "FREE-PROD")]
    FreeProd,
    #[serde(rename = "CONS-1")]
    Cons1,
    #[serde(rename = "CONS-2")]
    Cons2,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Skip => "SKIP",
            Rule::Assgn => "ASSGN",
            Rule::SemAssgn => "SEM-ASSGN",
            Rule::Seq => "SEQ",
            Rule::If => "IF",
            Rule::For => "FOR",
            Rule::While => "WHILE",
            Rule::Const => "CONST",
            Rule::Lift => "LIFT",
            Rule::Id => "ID",
            Rule::DirProd => "DIR-PROD",
            Rule::FreeProd => "FREE-PROD",
            Rule::Cons1 => "CONS-1",
            Rule::Cons2 => "CONS-2",
        }
    }

    /// Rules without premise triples.
    pub fn is_axiom(self) -> bool {
        matches!(self, Rule::Skip | Rule::Assgn | Rule::SemAssgn | Rule::Const | Rule::Id)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One rule application.
#[derive(Clone, Debug, Serialize)]
pub struct ProofNode {
    pub rule: Rule,
    pub path: String,
    /// `⦅pre⦆ C ⦅post⦆ hom` with action names.
    pub judgment: String,
    /// Discharged side conditions, including entailment certificates.
    pub side: Vec<String>,
    pub children: Vec<ProofNode>,
}

impl ProofNode {
    pub fn new(rule: Rule, path: &str, judgment: String) -> Self {
        ProofNode { rule, path: path.to_string(), judgment, side: Vec::new(), children: Vec::new() }
    }

    pub fn count(&self, rule: Rule) -> usize {
        usize::from(self.rule == rule) + self.children.iter().map(|c| c.count(rule)).sum::<usize>()
    }

    pub fn all_leaves_axioms(&self) -> bool {
        if self.children.is_empty() {
            self.rule.is_axiom()
        } else {
            self.children.iter().all(ProofNode::all_leaves_axioms)
        }
    }

    fn render(&self, depth: usize, out: &mut String) {
        out.push_str(&format!("{}{} [{}] {}\n", "  ".repeat(depth), self.rule, self.path, self.judgment));
        for s in &self.side {
            out.push_str(&format!("{}  · {}\n", "  ".repeat(depth), s));
        }
        for c in &self.children {
            c.render(depth + 1, out);
        }
    }
}

/// A completed derivation with the obligations discharged along the way.
#[derive(Clone, Debug, Serialize)]
pub struct ProofTrace {
    pub root: ProofNode,
    pub obligations: Vec<ObligationRecord>,
}

impl ProofTrace {
    pub fn count(&self, rule: Rule) -> usize {
        self.root.count(rule)
    }
}

impl fmt::Display for ProofTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.root.render(0, &mut s);
        f.write_str(s.trim_end())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnknownReason {
    Timeout,
    UnsupportedConstruct,
    MissingAnnotation,
}

impl fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnknownReason::Timeout => "timeout",
            UnknownReason::UnsupportedConstruct => "unsupported-construct",
            UnknownReason::MissingAnnotation => "missing-annotation",
        })
    }
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Valid(ProofTrace),
    /// A failed obligation with a concrete model or the failed relation.
    Invalid { rule: Rule, path: String, obligation: String, counterexample: String },
    Unknown { reason: UnknownReason, path: String, detail: String },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid(_))
    }

    pub fn is_invalid(&self) -> bool {
        matches!(self, Verdict::Invalid { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Valid(_) => "valid",
            Verdict::Invalid { .. } => "invalid",
            Verdict::Unknown { .. } => "unknown",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Valid(_) => f.write_str("Valid"),
            Verdict::Invalid { rule, path, obligation, counterexample } => {
                write!(f, "Invalid at {} [{}]: {}; {}", rule, path, obligation, counterexample)
            }
            Verdict::Unknown { reason, path, detail } => write!(f, "Unknown ({}) at [{}]: {}", reason, path, detail),
        }
    }
}
