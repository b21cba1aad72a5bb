//! The imperative language: AST, parser, statement paths and interpreter.

mod interp;
pub mod lexer;
mod parser;

pub use interp::{eval_program_expr, interpret, interpret_counting, store_value, InterpError, DEFAULT_FUEL};
pub use parser::{parse_expr, parse_program, parse_statements, ParseError, ProgramParser};

use crate::expr::Op;
use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Value domain of a variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Domain {
    Int,
    Bool,
    IntMod(BigInt),
    Real,
    /// Reals in the open interval (0, 1).
    RealOpen01,
    /// Reals taken modulo 2π.
    Angle,
}

impl Domain {
    pub fn is_integral(&self) -> bool {
        matches!(self, Domain::Int | Domain::Bool | Domain::IntMod(_))
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Int => f.write_str("int"),
            Domain::Bool => f.write_str("bool"),
            Domain::IntMod(n) => write!(f, "intmod {}", n),
            Domain::Real => f.write_str("real"),
            Domain::RealOpen01 => f.write_str("real01"),
            Domain::Angle => f.write_str("angle"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Program,
    Param,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub domain: Domain,
    pub role: Role,
}

/// Declared variables by name.
pub type VarTable = BTreeMap<String, VarDecl>;

pub fn var_table(decls: &[VarDecl]) -> VarTable {
    decls.iter().map(|d| (d.name.clone(), d.clone())).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProgramExpr {
    Var(String),
    Int(BigInt),
    Rat(BigRational),
    Pi,
    Apply(Op, Vec<ProgramExpr>),
}

impl ProgramExpr {
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut BTreeSet<String>) {
        match self {
            ProgramExpr::Var(v) => {
                out.insert(v.clone());
            }
            ProgramExpr::Apply(_, args) => args.iter().for_each(|a| a.collect(out)),
            _ => {}
        }
    }
}

impl fmt::Display for ProgramExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::expr::lift_program_expr(self))
    }
}

/// Loop bound or step: a parameter name or a numeric literal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LoopOperand {
    Var(String),
    Lit(BigRational),
}

impl LoopOperand {
    pub fn to_expr(&self) -> ProgramExpr {
        match self {
            LoopOperand::Var(v) => ProgramExpr::Var(v.clone()),
            LoopOperand::Lit(r) if r.is_integer() => ProgramExpr::Int(r.to_integer()),
            LoopOperand::Lit(r) => ProgramExpr::Rat(r.clone()),
        }
    }
}

impl fmt::Display for LoopOperand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoopOperand::Var(v) => f.write_str(v),
            LoopOperand::Lit(r) => write!(f, "{}", r),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Skip,
    Assign(String, ProgramExpr),
    Seq(Box<Command>, Box<Command>),
    If(String, Box<Command>, Box<Command>),
    /// `for (c := 0; c < bound; c := c + step) body`
    For {
        counter: String,
        bound: LoopOperand,
        step: LoopOperand,
        body: Box<Command>,
    },
    While(String, Box<Command>),
}

impl Command {
    /// Right-nested sequence of the given statements; `Skip` when empty.
    pub fn seq(mut stmts: Vec<Command>) -> Command {
        match stmts.len() {
            0 => Command::Skip,
            1 => stmts.pop().unwrap(),
            _ => {
                let first = stmts.remove(0);
                Command::Seq(Box::new(first), Box::new(Command::seq(stmts)))
            }
        }
    }

    /// The statement list of a (possibly nested) sequence.
    pub fn statements(&self) -> Vec<&Command> {
        match self {
            Command::Seq(a, b) => {
                let mut v = a.statements();
                v.extend(b.statements());
                v
            }
            other => vec![other],
        }
    }

    pub fn count_assignments(&self) -> usize {
        match self {
            Command::Skip => 0,
            Command::Assign(..) => 1,
            Command::Seq(a, b) | Command::If(_, a, b) => a.count_assignments() + b.count_assignments(),
            Command::For { body, .. } | Command::While(_, body) => body.count_assignments(),
        }
    }

    /// Variables read anywhere in the command, including guards and loop
    /// operands.
    pub fn read_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_reads(&mut out);
        out
    }

    fn collect_reads(&self, out: &mut BTreeSet<String>) {
        match self {
            Command::Skip => {}
            Command::Assign(_, e) => out.extend(e.vars()),
            Command::Seq(a, b) => {
                a.collect_reads(out);
                b.collect_reads(out);
            }
            Command::If(x, a, b) => {
                out.insert(x.clone());
                a.collect_reads(out);
                b.collect_reads(out);
            }
            Command::For { counter, bound, step, body } => {
                out.insert(counter.clone());
                for op in [bound, step] {
                    if let LoopOperand::Var(v) = op {
                        out.insert(v.clone());
                    }
                }
                body.collect_reads(out);
            }
            Command::While(x, body) => {
                out.insert(x.clone());
                body.collect_reads(out);
            }
        }
    }

    fn fmt_indent(&self, f: &mut fmt::Formatter<'_>, ind: usize) -> fmt::Result {
        let pad = "  ".repeat(ind);
        match self {
            Command::Skip => write!(f, "{}skip", pad),
            Command::Assign(x, e) => write!(f, "{}{} := {}", pad, x, e),
            Command::Seq(..) => {
                let stmts = self.statements();
                for (i, s) in stmts.iter().enumerate() {
                    s.fmt_indent(f, ind)?;
                    if i + 1 < stmts.len() {
                        writeln!(f, ";")?;
                    }
                }
                Ok(())
            }
            Command::If(x, a, b) => {
                writeln!(f, "{}if {} then {{", pad, x)?;
                a.fmt_indent(f, ind + 1)?;
                writeln!(f, "\n{}}} else {{", pad)?;
                b.fmt_indent(f, ind + 1)?;
                write!(f, "\n{}}}", pad)
            }
            Command::For { counter, bound, step, body } => {
                writeln!(
                    f,
                    "{}for ({c} := 0; {c} < {}; {c} := {c} + {}) {{",
                    pad,
                    bound,
                    step,
                    c = counter
                )?;
                body.fmt_indent(f, ind + 1)?;
                write!(f, "\n{}}}", pad)
            }
            Command::While(x, body) => {
                writeln!(f, "{}while {} {{", pad, x)?;
                body.fmt_indent(f, ind + 1)?;
                write!(f, "\n{}}}", pad)
            }
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_indent(f, 0)
    }
}

/// Syntactic set of assignment targets (loop counters included).
pub fn modified_vars(c: &Command) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_modified(c, &mut out);
    out
}

fn collect_modified(c: &Command, out: &mut BTreeSet<String>) {
    match c {
        Command::Skip => {}
        Command::Assign(x, _) => {
            out.insert(x.clone());
        }
        Command::Seq(a, b) | Command::If(_, a, b) => {
            collect_modified(a, out);
            collect_modified(b, out);
        }
        Command::For { counter, body, .. } => {
            out.insert(counter.clone());
            collect_modified(body, out);
        }
        Command::While(_, body) => collect_modified(body, out),
    }
}

/// A position in the AST. Numeric segments index a statement list; `body`,
/// `then` and `else` descend into a compound statement.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct StmtPath(pub Vec<String>);

impl StmtPath {
    pub fn root() -> StmtPath {
        StmtPath(Vec::new())
    }

    pub fn child(&self, seg: impl Into<String>) -> StmtPath {
        let mut v = self.0.clone();
        v.push(seg.into());
        StmtPath(v)
    }

    pub fn parse(s: &str) -> StmtPath {
        StmtPath(s.split('.').filter(|x| !x.is_empty()).map(|x| x.to_string()).collect())
    }

    /// Canonical form relative to a program: when the top level is a single
    /// statement, a leading `0` is implied.
    pub fn normalize(&self, program: &Command) -> StmtPath {
        let top = program.statements();
        match self.0.first() {
            Some(s) if s.parse::<usize>().is_err() && top.len() == 1 => {
                let mut v = vec!["0".to_string()];
                v.extend(self.0.iter().cloned());
                StmtPath(v)
            }
            _ => self.clone(),
        }
    }

    /// Short display form: the implied leading `0` is dropped.
    pub fn display_for(&self, program: &Command) -> String {
        let top = program.statements();
        if top.len() == 1 && self.0.len() > 1 && self.0[0] == "0" {
            self.0[1..].join(".")
        } else if self.0.is_empty() {
            "<root>".to_string()
        } else {
            self.0.join(".")
        }
    }

    /// Resolves the path to a statement of `program`.
    pub fn resolve<'a>(&self, program: &'a Command) -> Option<&'a Command> {
        let path = self.normalize(program);
        let mut list: Vec<&Command> = program.statements();
        let mut cur: Option<&Command> = None;
        for seg in &path.0 {
            if let Ok(i) = seg.parse::<usize>() {
                cur = Some(*list.get(i)?);
                continue;
            }
            let c = cur?;
            let child: &Command = match (seg.as_str(), c) {
                ("body", Command::For { body, .. }) | ("body", Command::While(_, body)) => body,
                ("then", Command::If(_, a, _)) => a,
                ("else", Command::If(_, _, b)) => b,
                _ => return None,
            };
            list = child.statements();
            cur = None;
        }
        cur
    }
}

impl fmt::Display for StmtPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            f.write_str("<root>")
        } else {
            f.write_str(&self.0.join("."))
        }
    }
}

#[cfg(test)]
mod tests;
