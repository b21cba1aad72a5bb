//! SMT-LIB v2.6 text for obligations. Validity is checked as
//! unsatisfiability of the negated body over skolem constants.

use super::{Obligation, Sort};
use crate::expr::{Node, Op, SymbolicExpr};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

const PI: &str = "sv.pi";
const RESERVED: &[&str] = &[
    "and", "or", "not", "ite", "let", "forall", "exists", "true", "false", "mod", "div", "abs", "to_real", "to_int",
    "is_int", "distinct", "assert", "check-sat", "par", "as", "match", "_", "!", "pi", "sin", "cos", "tan", "exp",
];

/// SMT symbol for a logical variable. Source identifiers never contain `.`,
/// so the `v.` prefix cannot collide with another variable.
pub fn symbol(name: &str) -> String {
    let simple = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if simple && !RESERVED.contains(&name) {
        name.to_string()
    } else if simple {
        format!("v.{}", name)
    } else {
        format!("|{}|", name.replace(['|', '\\'], "_"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum S {
    Bool,
    Int,
    Real,
}

#[derive(Default)]
struct Features {
    ints: bool,
    reals: bool,
    nonlinear: bool,
    ufs: BTreeSet<(&'static str, usize)>,
    pi: bool,
}

struct Emitter<'a> {
    sorts: &'a BTreeMap<String, Sort>,
    feat: Features,
}

fn int_lit(i: &BigInt) -> String {
    if i.is_negative() {
        format!("(- {})", -i)
    } else {
        i.to_string()
    }
}

fn real_lit(r: &BigRational) -> String {
    let body = if r.is_integer() {
        format!("{}.0", r.numer().abs())
    } else {
        format!("(/ {}.0 {}.0)", r.numer().abs(), r.denom())
    };
    if r.is_negative() {
        format!("(- {})", body)
    } else {
        body
    }
}

fn is_lit(e: &SymbolicExpr) -> bool {
    e.is_literal() || matches!(e.node(), Node::Pi)
}

impl Emitter<'_> {
    fn coerce(&mut self, (t, s): (String, S), want: S) -> String {
        match (s, want) {
            (a, b) if a == b => t,
            (S::Bool, S::Int) => format!("(ite {} 1 0)", t),
            (S::Bool, S::Real) => format!("(ite {} 1.0 0.0)", t),
            (S::Int, S::Real) => {
                self.feat.ints = true;
                self.feat.reals = true;
                format!("(to_real {})", t)
            }
            (S::Int, S::Bool) => format!("(not (= {} 0))", t),
            (S::Real, S::Bool) => format!("(not (= {} 0.0))", t),
            (S::Real, S::Int) => unreachable!("reals are never narrowed"),
            _ => unreachable!(),
        }
    }

    fn numeric(&mut self, args: &[SymbolicExpr]) -> (Vec<String>, S) {
        let parts: Vec<(String, S)> = args.iter().map(|a| self.term(a)).collect();
        let s = if parts.iter().any(|(_, s)| *s == S::Real) { S::Real } else { S::Int };
        (parts.into_iter().map(|p| self.coerce(p, s)).collect(), s)
    }

    fn term(&mut self, e: &SymbolicExpr) -> (String, S) {
        match e.node() {
            Node::Var(v) => {
                let s = match self.sorts.get(v) {
                    Some(Sort::Int) => S::Int,
                    _ => S::Real,
                };
                (symbol(v), s)
            }
            Node::Int(i) => (int_lit(i), S::Int),
            Node::Rat(r) => (real_lit(r), S::Real),
            Node::Pi => {
                self.feat.pi = true;
                (PI.to_string(), S::Real)
            }
            Node::Apply(op, args) => self.apply(*op, args),
        }
    }

    fn apply(&mut self, op: Op, args: &[SymbolicExpr]) -> (String, S) {
        match op {
            Op::Add | Op::Sub | Op::Mul => {
                if op == Op::Mul && args.iter().filter(|a| !is_lit(a)).count() > 1 {
                    self.feat.nonlinear = true;
                }
                let (ts, s) = self.numeric(args);
                (format!("({} {})", op.smt_name(), ts.join(" ")), s)
            }
            Op::Neg => {
                let (ts, s) = self.numeric(args);
                (format!("(- {})", ts[0]), s)
            }
            Op::Div => {
                if !is_lit(&args[1]) {
                    self.feat.nonlinear = true;
                }
                let a = self.term(&args[0]);
                let a = self.coerce(a, S::Real);
                let b = self.term(&args[1]);
                let b = self.coerce(b, S::Real);
                self.feat.reals = true;
                (format!("(/ {} {})", a, b), S::Real)
            }
            Op::Pow => self.pow(args),
            Op::Mod => {
                let (ta, sa) = self.term(&args[0]);
                let lit_n = args[1].as_rational().filter(|n| n.is_integer() && n.is_positive());
                if let (S::Int, Some(n)) = (sa, &lit_n) {
                    return (format!("(mod {} {})", ta, n.numer()), S::Int);
                }
                // floored remainder over the reals: a - b * floor(a / b)
                if lit_n.is_none() {
                    self.feat.nonlinear = true;
                }
                let a = self.coerce((ta, sa), S::Real);
                let b = self.term(&args[1]);
                let b = self.coerce(b, S::Real);
                self.feat.ints = true;
                self.feat.reals = true;
                (format!("(- {a} (* {b} (to_real (to_int (/ {a} {b})))))", a = a, b = b), S::Real)
            }
            Op::Abs => {
                let (ts, s) = self.numeric(args);
                let zero = if s == S::Int { "0" } else { "0.0" };
                (format!("(ite (< {t} {z}) (- {t}) {t})", t = ts[0], z = zero), s)
            }
            Op::Lt | Op::Le | Op::Gt | Op::Ge | Op::Eq | Op::Ne => {
                let (ts, _) = self.numeric(args);
                (format!("({} {} {})", op.smt_name(), ts[0], ts[1]), S::Bool)
            }
            Op::And | Op::Or => {
                let ts: Vec<String> = args
                    .iter()
                    .map(|a| {
                        let t = self.term(a);
                        self.coerce(t, S::Bool)
                    })
                    .collect();
                (format!("({} {})", op.smt_name(), ts.join(" ")), S::Bool)
            }
            Op::Not => {
                let t = self.term(&args[0]);
                (format!("(not {})", self.coerce(t, S::Bool)), S::Bool)
            }
            Op::Ite => {
                let c = self.term(&args[0]);
                let c = self.coerce(c, S::Bool);
                let a = self.term(&args[1]);
                let b = self.term(&args[2]);
                let s = if a.1 == S::Bool && b.1 == S::Bool {
                    S::Bool
                } else if a.1 == S::Real || b.1 == S::Real {
                    S::Real
                } else {
                    S::Int
                };
                let a = self.coerce(a, s);
                let b = self.coerce(b, s);
                (format!("(ite {} {} {})", c, a, b), s)
            }
            Op::Sin | Op::Cos | Op::Tan => {
                let name = match op {
                    Op::Sin => "sv.sin",
                    Op::Cos => "sv.cos",
                    _ => "sv.tan",
                };
                self.feat.ufs.insert((name, 1));
                let a = self.term(&args[0]);
                let a = self.coerce(a, S::Real);
                (format!("({} {})", name, a), S::Real)
            }
        }
    }

    fn pow(&mut self, args: &[SymbolicExpr]) -> (String, S) {
        let k = args[1].as_rational().filter(|k| k.is_integer()).and_then(|k| k.to_integer().to_i64());
        match k {
            Some(0) => ("1".to_string(), S::Int),
            Some(k) if k.abs() <= 64 => {
                let (b, s) = self.term(&args[0]);
                if k.abs() > 1 && !is_lit(&args[0]) {
                    self.feat.nonlinear = true;
                }
                let prod = if k.abs() == 1 { b } else { format!("(* {})", vec![b; k.unsigned_abs() as usize].join(" ")) };
                if k > 0 {
                    (prod, s)
                } else {
                    self.feat.nonlinear |= !is_lit(&args[0]);
                    self.feat.reals = true;
                    let p = self.coerce((prod, s), S::Real);
                    (format!("(/ 1.0 {})", p), S::Real)
                }
            }
            _ => {
                self.feat.ufs.insert(("sv.pow", 2));
                let a = self.term(&args[0]);
                let a = self.coerce(a, S::Real);
                let b = self.term(&args[1]);
                let b = self.coerce(b, S::Real);
                (format!("(sv.pow {} {})", a, b), S::Real)
            }
        }
    }
}

const TRIG_AXIOMS: &[&str] = &[
    "(assert (forall ((a Real)) (= (sv.sin (- sv.pi a)) (sv.sin a))))",
    "(assert (forall ((a Real)) (= (sv.cos (- sv.pi a)) (- (sv.cos a)))))",
    "(assert (forall ((a Real)) (= (sv.sin (- a)) (- (sv.sin a)))))",
    "(assert (forall ((a Real)) (= (sv.cos (- a)) (sv.cos a))))",
    "(assert (forall ((a Real)) (= (sv.tan (- a)) (- (sv.tan a)))))",
];

/// Renders the obligation as a script ending in `(check-sat)`.
pub fn emit_script(ob: &Obligation, trig_axioms: bool) -> String {
    let sorts: BTreeMap<String, Sort> = ob.universals.iter().map(|u| (u.name.clone(), u.sort)).collect();
    let mut em = Emitter { sorts: &sorts, feat: Features::default() };
    let mut asserts = Vec::new();
    for u in &ob.universals {
        match u.sort {
            Sort::Int => em.feat.ints = true,
            Sort::Real => em.feat.reals = true,
        }
        if let Some(c) = &u.constraint {
            let t = em.term(c);
            asserts.push(em.coerce(t, S::Bool));
        }
    }
    let body = em.term(&ob.body);
    let body = em.coerce(body, S::Bool);
    let axioms = trig_axioms && em.feat.ufs.iter().any(|(n, _)| *n != "sv.pow");
    if axioms {
        em.feat.pi = true;
        for n in ["sv.sin", "sv.cos", "sv.tan"] {
            em.feat.ufs.insert((n, 1));
        }
    }
    let f = &em.feat;
    let arith = match (f.ints, f.reals || f.pi) {
        (true, true) => "IRA",
        (false, _) if f.reals || f.pi => "RA",
        _ => "IA",
    };
    let logic = format!(
        "{}{}{}{}",
        if axioms { "" } else { "QF_" },
        if f.ufs.is_empty() { "" } else { "UF" },
        if f.nonlinear || axioms { "N" } else { "L" },
        arith
    );
    let mut out = String::new();
    let _ = writeln!(out, "; {}", ob.label.replace('\n', " "));
    let _ = writeln!(out, "(set-logic {})", logic);
    let _ = writeln!(out, "(set-option :produce-models true)");
    if f.pi {
        let _ = writeln!(out, "(declare-const {} Real)", PI);
        let _ = writeln!(out, "(assert (and (< 3.14159 {p}) (< {p} 3.1416)))", p = PI);
    }
    for (name, arity) in &f.ufs {
        let _ = writeln!(out, "(declare-fun {} ({}) Real)", name, vec!["Real"; *arity].join(" "));
    }
    if axioms {
        for a in TRIG_AXIOMS {
            let _ = writeln!(out, "{}", a);
        }
    }
    for u in &ob.universals {
        let _ = writeln!(out, "(declare-const {} {})", symbol(&u.name), if u.sort == Sort::Int { "Int" } else { "Real" });
    }
    for a in asserts {
        let _ = writeln!(out, "(assert {})", a);
    }
    let _ = writeln!(out, "(assert (not {}))", body);
    let _ = writeln!(out, "(check-sat)");
    out
}

/// `(get-value ...)` command for the universals, or `None` when there are
/// none.
pub fn get_value_command(ob: &Obligation) -> Option<String> {
    if ob.universals.is_empty() {
        return None;
    }
    let names: Vec<String> = ob.universals.iter().map(|u| symbol(&u.name)).collect();
    Some(format!("(get-value ({}))", names.join(" ")))
}

