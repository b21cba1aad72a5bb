//! Symbolic expressions over logical variables, symbolic and concrete states,
//! translation of program expressions (Γ), canonical simplification and
//! evaluation.

mod canon;
mod ops;
mod scalar;

pub use canon::{affine_in, is_closed_constant, pi_multiple, polynomial_terms, simplify, Piecewise};
pub use ops::{Arity, Op, OpKind, ALL_OPS};
pub use scalar::{floor_int, rational_to_float, Scalar, ScalarError, PRECISION};

use crate::lang::ProgramExpr;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Var(String),
    Int(BigInt),
    Rat(BigRational),
    Pi,
    Apply(Op, Vec<SymbolicExpr>),
}

/// Immutable, structurally shared expression tree. Equality and ordering
/// are structural.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolicExpr(Arc<Node>);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("unbound variable `{0}`")]
    UnboundVar(String),
    #[error("division by zero")]
    DivByZero,
    #[error("non-finite intermediate value")]
    NotFinite,
    #[error("operator `{0}` expects an integer literal argument")]
    NonIntegerArgument(Op),
    #[error("operator `{op}` applied to {got} arguments")]
    Arity { op: Op, got: usize },
}

impl From<ScalarError> for ExprError {
    fn from(e: ScalarError) -> Self {
        match e {
            ScalarError::DivByZero => ExprError::DivByZero,
            ScalarError::NotFinite => ExprError::NotFinite,
        }
    }
}

impl SymbolicExpr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn ptr_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn var(name: impl Into<String>) -> Self {
        SymbolicExpr(Arc::new(Node::Var(name.into())))
    }

    pub fn int(v: impl Into<BigInt>) -> Self {
        SymbolicExpr(Arc::new(Node::Int(v.into())))
    }

    /// Rational literal; integral values are stored as `Int`.
    pub fn rat(v: BigRational) -> Self {
        if v.is_integer() {
            Self::int(v.to_integer())
        } else {
            SymbolicExpr(Arc::new(Node::Rat(v)))
        }
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::rat(BigRational::new(n.into(), d.into()))
    }

    pub fn pi() -> Self {
        SymbolicExpr(Arc::new(Node::Pi))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    /// Builds an application, checking arity against the registry.
    pub fn try_apply(op: Op, args: Vec<SymbolicExpr>) -> Result<Self, ExprError> {
        if !op.arity_ok(args.len()) {
            return Err(ExprError::Arity { op, got: args.len() });
        }
        Ok(SymbolicExpr(Arc::new(Node::Apply(op, args))))
    }

    /// Builds an application; panics on an arity mismatch, which is always a
    /// programming error at the call site.
    pub fn apply(op: Op, args: Vec<SymbolicExpr>) -> Self {
        Self::try_apply(op, args).expect("operator arity")
    }

    pub fn add(a: Self, b: Self) -> Self {
        Self::apply(Op::Add, vec![a, b])
    }

    pub fn sub(a: Self, b: Self) -> Self {
        Self::apply(Op::Sub, vec![a, b])
    }

    pub fn mul(a: Self, b: Self) -> Self {
        Self::apply(Op::Mul, vec![a, b])
    }

    pub fn div(a: Self, b: Self) -> Self {
        Self::apply(Op::Div, vec![a, b])
    }

    pub fn neg(a: Self) -> Self {
        Self::apply(Op::Neg, vec![a])
    }

    pub fn ite(c: Self, a: Self, b: Self) -> Self {
        Self::apply(Op::Ite, vec![c, a, b])
    }

    pub fn eq(a: Self, b: Self) -> Self {
        Self::apply(Op::Eq, vec![a, b])
    }

    pub fn modulo(a: Self, n: Self) -> Self {
        Self::apply(Op::Mod, vec![a, n])
    }

    pub fn unary(op: Op, a: Self) -> Self {
        Self::apply(op, vec![a])
    }

    pub fn binary(op: Op, a: Self, b: Self) -> Self {
        Self::apply(op, vec![a, b])
    }

    pub fn as_var(&self) -> Option<&str> {
        match self.node() {
            Node::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        match self.node() {
            Node::Int(i) => Some(BigRational::from_integer(i.clone())),
            Node::Rat(r) => Some(r.clone()),
            _ => None,
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(self.node(), Node::Int(_) | Node::Rat(_))
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self.node(), Node::Int(i) if i.is_zero())
    }

    pub fn size(&self) -> usize {
        match self.node() {
            Node::Apply(_, args) => 1 + args.iter().map(|a| a.size()).sum::<usize>(),
            _ => 1,
        }
    }

    pub fn depth(&self) -> usize {
        match self.node() {
            Node::Apply(_, args) => 1 + args.iter().map(|a| a.depth()).max().unwrap_or(0),
            _ => 1,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self.node() {
            Node::Var(v) => {
                out.insert(v.clone());
            }
            Node::Apply(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            _ => {}
        }
    }

    pub fn mentions(&self, var: &str) -> bool {
        match self.node() {
            Node::Var(v) => v == var,
            Node::Apply(_, args) => args.iter().any(|a| a.mentions(var)),
            _ => false,
        }
    }

    pub fn contains_op(&self, pred: &dyn Fn(Op) -> bool) -> bool {
        match self.node() {
            Node::Apply(op, args) => pred(*op) || args.iter().any(|a| a.contains_op(pred)),
            _ => false,
        }
    }

    pub fn has_opaque(&self) -> bool {
        self.contains_op(&|op| op.is_opaque())
    }

    pub fn mentions_pi(&self) -> bool {
        match self.node() {
            Node::Pi => true,
            Node::Apply(_, args) => args.iter().any(|a| a.mentions_pi()),
            _ => false,
        }
    }

    /// Collects every opaque operator used in the expression.
    pub fn opaque_ops(&self, out: &mut BTreeSet<Op>) {
        if let Node::Apply(op, args) = self.node() {
            if op.is_opaque() {
                out.insert(*op);
            }
            args.iter().for_each(|a| a.opaque_ops(out));
        }
    }

    /// Simultaneous substitution of logical variables.
    pub fn substitute(&self, map: &BTreeMap<String, SymbolicExpr>) -> SymbolicExpr {
        if map.is_empty() {
            return self.clone();
        }
        self.subst_with(&|v| map.get(v).cloned())
    }

    pub fn subst_with(&self, f: &dyn Fn(&str) -> Option<SymbolicExpr>) -> SymbolicExpr {
        match self.node() {
            Node::Var(v) => f(v).unwrap_or_else(|| self.clone()),
            Node::Apply(op, args) => {
                let new: Vec<_> = args.iter().map(|a| a.subst_with(f)).collect();
                if new.iter().zip(args).all(|(a, b)| Arc::ptr_eq(&a.0, &b.0)) {
                    self.clone()
                } else {
                    SymbolicExpr(Arc::new(Node::Apply(*op, new)))
                }
            }
            _ => self.clone(),
        }
    }

    /// Renames variables; names absent from the map are kept.
    pub fn rename(&self, map: &BTreeMap<String, String>) -> SymbolicExpr {
        self.subst_with(&|v| map.get(v).map(|n| SymbolicExpr::var(n.clone())))
    }

    pub fn eval(&self, env: &BTreeMap<String, Scalar>) -> Result<Scalar, ExprError> {
        eval(self, env)
    }
}

impl fmt::Debug for SymbolicExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

fn prec(e: &SymbolicExpr) -> u8 {
    match e.node() {
        Node::Apply(op, _) => match op {
            Op::Ite => 1,
            Op::Or => 2,
            Op::And => 3,
            Op::Lt | Op::Le | Op::Gt | Op::Ge | Op::Eq | Op::Ne => 4,
            Op::Add | Op::Sub => 5,
            Op::Mul | Op::Div => 6,
            Op::Neg | Op::Not => 7,
            Op::Pow => 8,
            _ => 9,
        },
        Node::Int(i) if i.is_negative() => 7,
        Node::Rat(_) => 6,
        _ => 9,
    }
}

fn write_sub(f: &mut fmt::Formatter<'_>, e: &SymbolicExpr, min: u8) -> fmt::Result {
    if prec(e) < min {
        write!(f, "({})", e)
    } else {
        write!(f, "{}", e)
    }
}

/// Splits a term into (negated?, positive form) for pretty sums.
fn negated_term(e: &SymbolicExpr) -> Option<SymbolicExpr> {
    match e.node() {
        Node::Apply(Op::Neg, a) => Some(a[0].clone()),
        Node::Int(i) if i.is_negative() => Some(SymbolicExpr::int(-i)),
        Node::Rat(r) if r.is_negative() => Some(SymbolicExpr::rat(-r)),
        Node::Apply(Op::Mul, args) => {
            let c = args[0].as_rational()?;
            if !c.is_negative() {
                return None;
            }
            let c = -c;
            let mut rest: Vec<_> = args[1..].to_vec();
            if !c.is_one() {
                rest.insert(0, SymbolicExpr::rat(c));
            }
            Some(if rest.len() == 1 {
                rest.pop().unwrap()
            } else {
                SymbolicExpr::apply(Op::Mul, rest)
            })
        }
        _ => None,
    }
}

impl fmt::Display for SymbolicExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Var(v) => f.write_str(v),
            Node::Int(i) => write!(f, "{}", i),
            Node::Rat(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Node::Pi => f.write_str("pi"),
            Node::Apply(op, args) => match op {
                Op::Add => {
                    write_sub(f, &args[0], 5)?;
                    for a in &args[1..] {
                        match negated_term(a) {
                            Some(p) => {
                                f.write_str(" - ")?;
                                write_sub(f, &p, 6)?;
                            }
                            None => {
                                f.write_str(" + ")?;
                                write_sub(f, a, 6)?;
                            }
                        }
                    }
                    Ok(())
                }
                Op::Mul => {
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(" * ")?;
                        }
                        write_sub(f, a, if i == 0 { 6 } else { 7 })?;
                    }
                    Ok(())
                }
                Op::Sub | Op::Div | Op::Lt | Op::Le | Op::Gt | Op::Ge | Op::Eq | Op::Ne | Op::And | Op::Or => {
                    let p = prec(self);
                    write_sub(f, &args[0], if op.is_comparison() { p + 1 } else { p })?;
                    write!(f, " {} ", op.name())?;
                    write_sub(f, &args[1], p + 1)
                }
                Op::Pow => {
                    write_sub(f, &args[0], 9)?;
                    f.write_str("^")?;
                    write_sub(f, &args[1], 9)
                }
                Op::Neg => {
                    f.write_str("-")?;
                    write_sub(f, &args[0], 8)
                }
                Op::Not => {
                    f.write_str("!")?;
                    write_sub(f, &args[0], 8)
                }
                Op::Ite => {
                    write_sub(f, &args[0], 2)?;
                    f.write_str(" ? ")?;
                    write_sub(f, &args[1], 2)?;
                    f.write_str(" : ")?;
                    write_sub(f, &args[2], 1)
                }
                Op::Mod | Op::Abs | Op::Sin | Op::Cos | Op::Tan => {
                    write!(f, "{}(", op.name())?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{}", a)?;
                    }
                    f.write_str(")")
                }
            },
        }
    }
}

/// Symbolic state: each program variable mapped to an expression over
/// logical variables.
pub type SymState = BTreeMap<String, SymbolicExpr>;

/// Concrete state: program variables mapped to scalars.
pub type ConcState = BTreeMap<String, Scalar>;

/// The fresh symbolic state σ' mapping every variable to its own logical
/// variable.
pub fn fresh_state<'a>(vars: impl IntoIterator<Item = &'a String>) -> SymState {
    vars.into_iter().map(|v| (v.clone(), SymbolicExpr::var(v.clone()))).collect()
}

/// Γ: translates a program expression under a symbolic state.
pub fn gamma(e: &ProgramExpr, state: &SymState) -> Result<SymbolicExpr, ExprError> {
    Ok(match e {
        ProgramExpr::Var(v) => state.get(v).cloned().ok_or_else(|| ExprError::UnboundVar(v.clone()))?,
        ProgramExpr::Int(i) => SymbolicExpr::int(i.clone()),
        ProgramExpr::Rat(r) => SymbolicExpr::rat(r.clone()),
        ProgramExpr::Pi => SymbolicExpr::pi(),
        ProgramExpr::Apply(op, args) => {
            let args = args.iter().map(|a| gamma(a, state)).collect::<Result<Vec<_>, _>>()?;
            SymbolicExpr::try_apply(*op, args)?
        }
    })
}

/// Converts a program expression to a symbolic one, reading each program
/// variable as the logical variable of the same name.
pub fn lift_program_expr(e: &ProgramExpr) -> SymbolicExpr {
    match e {
        ProgramExpr::Var(v) => SymbolicExpr::var(v.clone()),
        ProgramExpr::Int(i) => SymbolicExpr::int(i.clone()),
        ProgramExpr::Rat(r) => SymbolicExpr::rat(r.clone()),
        ProgramExpr::Pi => SymbolicExpr::pi(),
        ProgramExpr::Apply(op, args) => SymbolicExpr::apply(*op, args.iter().map(lift_program_expr).collect()),
    }
}

fn integer_exponent(e: &SymbolicExpr, env: &BTreeMap<String, Scalar>, op: Op) -> Result<i64, ExprError> {
    let v = eval(e, env)?;
    v.as_integer()
        .and_then(|i| i.to_i64())
        .ok_or(ExprError::NonIntegerArgument(op))
}

/// Evaluates under a concrete environment. Exact while only interpreted
/// operators occur; opaque operators and π produce approximate values.
pub fn eval(e: &SymbolicExpr, env: &BTreeMap<String, Scalar>) -> Result<Scalar, ExprError> {
    match e.node() {
        Node::Var(v) => env.get(v).cloned().ok_or_else(|| ExprError::UnboundVar(v.clone())),
        Node::Int(i) => Ok(Scalar::from_bigint(i.clone())),
        Node::Rat(r) => Ok(Scalar::Exact(r.clone())),
        Node::Pi => Ok(Scalar::pi()),
        Node::Apply(op, args) => apply_op(*op, args, env),
    }
}

fn apply_op(op: Op, args: &[SymbolicExpr], env: &BTreeMap<String, Scalar>) -> Result<Scalar, ExprError> {
    let ev = |i: usize| eval(&args[i], env);
    Ok(match op {
        Op::Add => {
            let mut acc = ev(0)?;
            for a in &args[1..] {
                acc = acc.add(&eval(a, env)?)?;
            }
            acc
        }
        Op::Mul => {
            let mut acc = ev(0)?;
            for a in &args[1..] {
                acc = acc.mul(&eval(a, env)?)?;
            }
            acc
        }
        Op::Sub => ev(0)?.sub(&ev(1)?)?,
        Op::Div => ev(0)?.div(&ev(1)?)?,
        Op::Neg => ev(0)?.neg(),
        Op::Pow => {
            let k = integer_exponent(&args[1], env, op)?;
            ev(0)?.powi(k)?
        }
        Op::Mod => ev(0)?.modulo(&ev(1)?)?,
        Op::Abs => ev(0)?.abs(),
        Op::Lt => Scalar::bool(ev(0)?.cmp_value(&ev(1)?).is_lt()),
        Op::Le => Scalar::bool(ev(0)?.cmp_value(&ev(1)?).is_le()),
        Op::Gt => Scalar::bool(ev(0)?.cmp_value(&ev(1)?).is_gt()),
        Op::Ge => Scalar::bool(ev(0)?.cmp_value(&ev(1)?).is_ge()),
        Op::Eq => Scalar::bool(ev(0)?.cmp_value(&ev(1)?).is_eq()),
        Op::Ne => Scalar::bool(ev(0)?.cmp_value(&ev(1)?).is_ne()),
        Op::And => Scalar::bool(ev(0)?.truthy() && ev(1)?.truthy()),
        Op::Or => Scalar::bool(ev(0)?.truthy() || ev(1)?.truthy()),
        Op::Not => Scalar::bool(!ev(0)?.truthy()),
        Op::Ite => {
            if ev(0)?.truthy() {
                ev(1)?
            } else {
                ev(2)?
            }
        }
        Op::Sin => ev(0)?.sin()?,
        Op::Cos => ev(0)?.cos()?,
        Op::Tan => ev(0)?.tan()?,
    })
}

impl std::ops::Add for SymbolicExpr {
    type Output = SymbolicExpr;
    fn add(self, o: SymbolicExpr) -> SymbolicExpr {
        SymbolicExpr::add(self, o)
    }
}

impl std::ops::Sub for SymbolicExpr {
    type Output = SymbolicExpr;
    fn sub(self, o: SymbolicExpr) -> SymbolicExpr {
        SymbolicExpr::sub(self, o)
    }
}

impl std::ops::Mul for SymbolicExpr {
    type Output = SymbolicExpr;
    fn mul(self, o: SymbolicExpr) -> SymbolicExpr {
        SymbolicExpr::mul(self, o)
    }
}

impl std::ops::Div for SymbolicExpr {
    type Output = SymbolicExpr;
    fn div(self, o: SymbolicExpr) -> SymbolicExpr {
        SymbolicExpr::div(self, o)
    }
}

impl std::ops::Neg for SymbolicExpr {
    type Output = SymbolicExpr;
    fn neg(self) -> SymbolicExpr {
        SymbolicExpr::neg(self)
    }
}

#[cfg(test)]
mod tests;
