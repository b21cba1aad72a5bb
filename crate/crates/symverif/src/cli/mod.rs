//! Command implementations behind the `symverif` binary, the `.sym` input
//! format, reports, and corpus templaters.

mod report;
mod spec;
mod templates;

pub use report::{Report, Status, Totals};
pub use spec::{parse_spec, ActionDecl, Annotation, HomDecl, HomRef, SpecError, SpecFile, SynthTarget, TripleDecl};
pub use templates::{dihedral_car, voting};

use crate::group::{
    builtin_hom, check_action, direct_product, enumerate, free_product, hom_check, GroupAction, GroupContext,
    GroupError, GroupPresentation, Homomorphism, ProductKind,
};
use crate::lang::{Command, StmtPath};
use crate::logic::{fuzz_soundness, ProofNode, SymmetryTriple, Verdict, VerifyConfig, Verifier};
use crate::smt::SolverConfig;
use crate::synth::{synthesize_pre, SynthBudget, SynthError};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};
use thiserror::Error;

/// Options shared by every command.
#[derive(Clone, Debug)]
pub struct Flags {
    pub solver: Option<PathBuf>,
    /// Seconds per solver query.
    pub smt_timeout: f64,
    pub max_elems: usize,
    pub trig_axioms: bool,
    pub keep_smt: Option<PathBuf>,
    pub fuzz: Option<usize>,
    pub seed: u64,
    pub depth: usize,
    /// Seconds per post-condition generator.
    pub synth_timeout: f64,
}

impl Default for Flags {
    fn default() -> Self {
        Flags {
            solver: None,
            smt_timeout: SolverConfig::default().timeout.as_secs_f64(),
            max_elems: crate::group::DEFAULT_MAX_ELEMS,
            trig_axioms: false,
            keep_smt: None,
            fuzz: None,
            seed: 0,
            depth: 3,
            synth_timeout: 120.0,
        }
    }
}

impl Flags {
    pub fn verify_config(&self) -> VerifyConfig {
        VerifyConfig {
            solver: SolverConfig {
                path: self.solver.clone(),
                args: Vec::new(),
                timeout: Duration::from_secs_f64(self.smt_timeout.max(0.001)),
                trig_axioms: self.trig_axioms,
                keep_dir: self.keep_smt.clone(),
            },
            max_elems: self.max_elems,
        }
    }
}

/// Failures that end a command before a verdict: exit code 3.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
    #[error("{0}")]
    Spec(#[from] SpecError),
    #[error("{file}: {msg}")]
    Semantic { file: String, msg: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        3
    }
}

/// Reads and parses a `.sym` file.
pub fn load(path: &Path) -> Result<SpecFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io { path: path.display().to_string(), msg: e.to_string() })?;
    Ok(parse_spec(&path.display().to_string(), &text)?)
}

/// A parsed file together with the verifier state used to resolve it.
pub struct Session {
    pub spec: SpecFile,
    pub verifier: Verifier,
}

/// Why a triple could not be assembled.
#[derive(Debug)]
pub enum Resolve {
    /// A declared homomorphism fails a relation.
    Invalid(String),
    Error(CliError),
}

impl From<CliError> for Resolve {
    fn from(e: CliError) -> Self {
        Resolve::Error(e)
    }
}

impl Session {
    pub fn open(path: &Path, flags: &Flags) -> Result<Session, CliError> {
        Ok(Session::new(load(path)?, flags))
    }

    pub fn new(spec: SpecFile, flags: &Flags) -> Session {
        let verifier = Verifier::new(&spec.vars, &flags.verify_config());
        Session { spec, verifier }
    }

    fn semantic(&self, msg: impl Into<String>) -> CliError {
        CliError::Semantic { file: self.spec.file.clone(), msg: msg.into() }
    }

    pub fn group(&self, name: &str) -> Result<GroupPresentation, CliError> {
        self.spec.group(name).cloned().ok_or_else(|| self.semantic(format!("unknown group `{}`", name)))
    }

    /// Builds a declared action; products of actions are formed on demand.
    pub fn action(&self, name: &str) -> Result<GroupAction, CliError> {
        let decl = self.spec.action_decl(name).ok_or_else(|| self.semantic(format!("unknown action `{}`", name)))?;
        let a = match decl {
            ActionDecl::Maps { group, vars, faithful, gens } => {
                GroupAction::new(name, self.group(group)?, vars.clone(), gens.clone(), *faithful)
                    .map_err(|e| self.semantic(e.to_string()))?
            }
            ActionDecl::Product { kind, left, right } => {
                let (l, r) = (self.action(left)?, self.action(right)?);
                match kind {
                    ProductKind::Direct => direct_product(&l, &r, &self.verifier.checker, &self.verifier.ctx)
                        .map_err(|e| self.semantic(e.to_string()))?,
                    ProductKind::Free => free_product(&l, &r),
                }
            }
        };
        Ok(a.rename(name))
    }

    fn hom(&self, r: &HomRef, source: &GroupPresentation, target: &GroupPresentation) -> Result<Homomorphism, Resolve> {
        let checked = |e: GroupError| match e {
            GroupError::NotAHomomorphism { .. } => Resolve::Invalid(e.to_string()),
            other => Resolve::Error(self.semantic(other.to_string())),
        };
        match r {
            HomRef::Builtin(k) => builtin_hom(*k, source, target, &self.verifier.ctx).map_err(checked),
            HomRef::Named(n) => {
                let d = self.spec.hom_decl(n).ok_or_else(|| self.semantic(format!("unknown homomorphism `{}`", n)))?;
                let h = Homomorphism::new(n, self.group(&d.source)?, self.group(&d.target)?, d.images.clone())
                    .map_err(|e| self.semantic(e.to_string()))?;
                hom_check(&h, &self.verifier.ctx).map_err(checked)?;
                Ok(h)
            }
        }
    }

    /// The declared triple with its annotations and inverse hints.
    pub fn triple(&self) -> Result<SymmetryTriple, Resolve> {
        let t = self.spec.triple.as_ref().ok_or_else(|| self.semantic("the file declares no triple"))?;
        let pre = self.action(&t.pre)?;
        let post = self.action(&t.post)?;
        let hom = self.hom(&t.hom, &pre.group, &post.group)?;
        let mut triple = SymmetryTriple::new(pre.clone(), self.spec.program.clone(), post, hom)
            .map_err(|e| self.semantic(e.to_string()))?;
        for a in &self.spec.annotations {
            let action = self.action(&a.action)?;
            let source = match &a.hom {
                HomRef::Named(n) => self.group(&self.spec.hom_decl(n).expect("resolved at parse").source)?,
                HomRef::Builtin(_) => pre.group.clone(),
            };
            let hom = self.hom(&a.hom, &source, &action.group)?;
            triple.annotate(&a.path, action, hom);
        }
        for (p, e) in &self.spec.inverses {
            triple.with_inverse(p, e.clone());
        }
        Ok(triple)
    }

    fn finish(&self, mut r: Report, started: Instant) -> Report {
        let c = &self.verifier.checker;
        r.obligations = c.records();
        r.totals.obligations = r.obligations.len();
        r.totals.solver_calls = c.solver_calls();
        r.totals.solver_seconds = c.solver_seconds();
        r.totals.wall_seconds = started.elapsed().as_secs_f64();
        r
    }
}

fn count_rules(n: &ProofNode, out: &mut BTreeMap<String, usize>) {
    *out.entry(n.rule.name().to_string()).or_default() += 1;
    n.children.iter().for_each(|c| count_rules(c, out));
}

fn file_name(path: &Path) -> String {
    path.display().to_string()
}

fn open(path: &Path, flags: &Flags) -> Result<Session, CliError> {
    Session::open(path, flags)
}

fn resolve_failure(cmd: &str, file: &str, e: Resolve) -> Result<Report, CliError> {
    match e {
        Resolve::Invalid(msg) => {
            let mut r = Report::new(cmd, file, Status::Invalid, "Invalid");
            r.detail = Some(msg);
            Ok(r)
        }
        Resolve::Error(e) => Err(e),
    }
}

/// Verifies the file's triple; with `flags.fuzz`, a Valid verdict is also
/// fuzzed on a separate enumeration cache.
pub fn cmd_verify(path: &Path, flags: &Flags) -> Result<Report, CliError> {
    Session::open(path, flags)?.verify(flags)
}

impl Session {
    pub fn verify(&self, flags: &Flags) -> Result<Report, CliError> {
        let started = Instant::now();
        let file = self.spec.file.clone();
        let t = match self.triple() {
            Ok(t) => t,
            Err(e) => return resolve_failure("verify", &file, e),
        };
        let verdict = self.verifier.verify(&t);
        let mut r = match &verdict {
            Verdict::Valid(trace) => {
                let mut r = Report::new("verify", &file, Status::Valid, "Valid");
                count_rules(&trace.root, &mut r.totals.rules);
                r.proof = Some(trace.root.clone());
                r
            }
            Verdict::Invalid { .. } => {
                let mut r = Report::new("verify", &file, Status::Invalid, "Invalid");
                r.detail = Some(verdict.to_string());
                r
            }
            Verdict::Unknown { reason, .. } => {
                let mut r = Report::new("verify", &file, Status::Unknown, format!("Unknown ({})", reason));
                r.detail = Some(verdict.to_string());
                r
            }
        };
        r = r.with("assignments", t.program.count_assignments());
        if let (Some(n), true) = (flags.fuzz, verdict.is_valid()) {
            let report = fuzz_soundness(&t, &self.verifier.vars, n, flags.seed, &GroupContext::new(flags.max_elems));
            if !report.ok() {
                r.status = Status::Invalid;
                r.verdict = "Valid, but fuzzing found a discrepancy".into();
            }
            r.fuzz = Some(report);
        }
        Ok(self.finish(r, started))
    }
}

/// Randomized check of the triple's validity equation.
pub fn cmd_fuzz(path: &Path, n: usize, seed: u64, flags: &Flags) -> Result<Report, CliError> {
    let started = Instant::now();
    let s = open(path, flags)?;
    let t = match s.triple() {
        Ok(t) => t,
        Err(e) => return resolve_failure("fuzz", &file_name(path), e),
    };
    let report = fuzz_soundness(&t, &s.verifier.vars, n, seed, &GroupContext::new(flags.max_elems));
    let (status, verdict) = if report.ok() {
        (Status::Valid, format!("no discrepancy in {} trials", n))
    } else {
        (Status::Invalid, "discrepancy found".to_string())
    };
    let mut r = Report::new("fuzz", &file_name(path), status, verdict).with("seed", seed);
    r.fuzz = Some(report);
    Ok(s.finish(r, started))
}

/// Checks that a named action satisfies its group's relations.
pub fn cmd_check_action(path: &Path, name: &str, flags: &Flags) -> Result<Report, CliError> {
    let started = Instant::now();
    let s = open(path, flags)?;
    let a = s.action(name)?;
    let r = match check_action(&a, &s.verifier.checker, &s.verifier.ctx) {
        Ok(cert) => Report::new("check-action", &file_name(path), Status::Valid, format!("{} is a group action", name))
            .with("certificate", &cert.entries),
        Err(e @ GroupError::NotAnAction { .. }) => {
            let mut r = Report::new("check-action", &file_name(path), Status::Invalid, "not a group action");
            r.detail = Some(e.to_string());
            r
        }
        Err(e) => {
            let mut r = Report::new("check-action", &file_name(path), Status::Unknown, "undecided");
            r.detail = Some(e.to_string());
            r
        }
    };
    Ok(s.finish(r, started))
}

#[derive(Serialize)]
struct GroupSummary {
    name: String,
    generators: Vec<String>,
    relations: usize,
}

/// Enumerates a named group up to `bound` elements.
pub fn cmd_enumerate(path: &Path, name: &str, bound: usize, flags: &Flags) -> Result<Report, CliError> {
    let started = Instant::now();
    let s = open(path, flags)?;
    let g = s.group(name)?;
    let summary = GroupSummary { name: g.name.clone(), generators: g.generators.clone(), relations: g.relations.len() };
    let r = match enumerate(&g, bound) {
        Ok(t) => {
            let mut r = Report::new("enumerate", &file_name(path), Status::Valid, format!("{} has {} elements", name, t.size()))
                .with("group", &summary)
                .with("size", t.size());
            if t.size() <= 64 {
                let elems: Vec<String> = t.elements().iter().map(|w| w.to_string()).collect();
                r = r.with("elements", elems);
            }
            r
        }
        Err(e) => {
            let mut r = Report::new("enumerate", &file_name(path), Status::Unknown, "not enumerated").with("group", &summary);
            r.detail = Some(e.to_string());
            r
        }
    };
    Ok(s.finish(r, started))
}

#[derive(Serialize)]
struct SynthRow {
    path: String,
    variable: String,
    post: String,
    outcome: String,
    pre: BTreeMap<String, BTreeMap<String, String>>,
    candidates: u64,
    solver_calls: u64,
    seconds: f64,
    fuzz_passed: Option<usize>,
}

/// Runs every synthesis target of the file.
pub fn cmd_synth(path: &Path, flags: &Flags) -> Result<Report, CliError> {
    let started = Instant::now();
    let s = open(path, flags)?;
    if s.spec.synth.is_empty() {
        return Err(s.semantic("the file declares no synthesis target"));
    }
    let budget = SynthBudget {
        depth: flags.depth,
        timeout: Duration::from_secs_f64(flags.synth_timeout.max(0.001)),
        seed: flags.seed,
    };
    let mut rows = Vec::new();
    let mut status = Status::Valid;
    for target in &s.spec.synth {
        let (p, stmt) = match &target.path {
            Some(p) => (p.normalize(&s.spec.program), p.resolve(&s.spec.program)),
            None => (StmtPath::root(), Some(&s.spec.program)),
        };
        let Some(Command::Assign(x, f)) = stmt else {
            return Err(s.semantic("a synthesis target must be a single assignment"));
        };
        let post = s.action(&target.post)?;
        let mut row = SynthRow {
            path: p.display_for(&s.spec.program),
            variable: x.clone(),
            post: target.post.clone(),
            outcome: String::new(),
            pre: BTreeMap::new(),
            candidates: 0,
            solver_calls: 0,
            seconds: 0.0,
            fuzz_passed: None,
        };
        let t0 = Instant::now();
        match synthesize_pre(x, f, &post, &budget, &s.verifier) {
            Ok(res) => {
                row.outcome = "valid".into();
                row.pre = res
                    .pre
                    .gens
                    .iter()
                    .map(|(g, m)| {
                        let moved = m
                            .iter()
                            .filter(|(v, e)| e.as_var() != Some(v.as_str()))
                            .map(|(v, e)| (v.clone(), e.to_string()))
                            .collect();
                        (g.clone(), moved)
                    })
                    .collect();
                row.candidates = res.stats.candidates;
                row.solver_calls = res.stats.solver_calls;
                if let Some(n) = flags.fuzz {
                    let prog = Command::Assign(x.clone(), f.clone());
                    let t = SymmetryTriple::new(res.pre, prog, post, res.hom).expect("synthesized shapes agree");
                    let z = fuzz_soundness(&t, &s.verifier.vars, n, flags.seed, &GroupContext::new(flags.max_elems));
                    if !z.ok() {
                        status = Status::Invalid;
                    }
                    row.fuzz_passed = Some(z.passed);
                }
            }
            Err(e) => {
                row.outcome = e.to_string();
                let this = match e {
                    SynthError::Unverified(_) => Status::Invalid,
                    _ => Status::Unknown,
                };
                if this == Status::Invalid || status == Status::Valid {
                    status = this;
                }
            }
        }
        row.seconds = t0.elapsed().as_secs_f64();
        rows.push(row);
    }
    let found = rows.iter().filter(|r| r.outcome == "valid").count();
    let verdict = format!("{} of {} targets synthesized", found, rows.len());
    let r = Report::new("synth", &file_name(path), status, verdict).with("targets", rows);
    Ok(s.finish(r, started))
}
