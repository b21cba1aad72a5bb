//! Big-step interpreter over concrete states. Used as the semantic oracle,
//! so it evaluates program expressions directly rather than through Γ.

use super::{Command, Domain, LoopOperand, ProgramExpr, VarTable};
use crate::expr::{ConcState, Op, Scalar, ScalarError};
use num_traits::ToPrimitive;
use thiserror::Error;

/// Default bound on loop-body executions.
pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InterpError {
    #[error("fuel exhausted after {0} loop iterations")]
    FuelExhausted(u64),
    #[error("division by zero")]
    DivByZero,
    #[error("non-finite value")]
    NotFinite,
    #[error("unbound variable `{0}`")]
    UnboundVar(String),
    #[error("`{0}` needs an integer exponent")]
    NonIntegerExponent(Op),
}

impl From<ScalarError> for InterpError {
    fn from(e: ScalarError) -> Self {
        match e {
            ScalarError::DivByZero => InterpError::DivByZero,
            ScalarError::NotFinite => InterpError::NotFinite,
        }
    }
}

/// ⟦e⟧σ for a program expression.
pub fn eval_program_expr(e: &ProgramExpr, s: &ConcState) -> Result<Scalar, InterpError> {
    Ok(match e {
        ProgramExpr::Var(v) => s.get(v).cloned().ok_or_else(|| InterpError::UnboundVar(v.clone()))?,
        ProgramExpr::Int(i) => Scalar::from_bigint(i.clone()),
        ProgramExpr::Rat(r) => Scalar::Exact(r.clone()),
        ProgramExpr::Pi => Scalar::pi(),
        ProgramExpr::Apply(op, args) => {
            let ev = |i: usize| eval_program_expr(&args[i], s);
            match op {
                Op::Add | Op::Mul => {
                    let mut acc = ev(0)?;
                    for a in &args[1..] {
                        let b = eval_program_expr(a, s)?;
                        acc = if *op == Op::Add { acc.add(&b)? } else { acc.mul(&b)? };
                    }
                    acc
                }
                Op::Sub => ev(0)?.sub(&ev(1)?)?,
                Op::Div => ev(0)?.div(&ev(1)?)?,
                Op::Neg => ev(0)?.neg(),
                Op::Mod => ev(0)?.modulo(&ev(1)?)?,
                Op::Abs => ev(0)?.abs(),
                Op::Pow => {
                    let k = ev(1)?
                        .as_integer()
                        .and_then(|k| k.to_i64())
                        .ok_or(InterpError::NonIntegerExponent(*op))?;
                    ev(0)?.powi(k)?
                }
                Op::Lt => Scalar::bool(ev(0)?.cmp_value(&ev(1)?).is_lt()),
                Op::Le => Scalar::bool(ev(0)?.cmp_value(&ev(1)?).is_le()),
                Op::Gt => Scalar::bool(ev(0)?.cmp_value(&ev(1)?).is_gt()),
                Op::Ge => Scalar::bool(ev(0)?.cmp_value(&ev(1)?).is_ge()),
                Op::Eq => Scalar::bool(ev(0)?.cmp_value(&ev(1)?).is_eq()),
                Op::Ne => Scalar::bool(ev(0)?.cmp_value(&ev(1)?).is_ne()),
                // Both operands are evaluated so that errors surface regardless
                // of short-circuiting.
                Op::And => {
                    let (a, b) = (ev(0)?, ev(1)?);
                    Scalar::bool(a.truthy() && b.truthy())
                }
                Op::Or => {
                    let (a, b) = (ev(0)?, ev(1)?);
                    Scalar::bool(a.truthy() || b.truthy())
                }
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
            }
        }
    })
}

/// Brings a value into its variable's domain on store (`intmod n` wraps).
pub fn store_value(vars: &VarTable, x: &str, v: Scalar) -> Result<Scalar, InterpError> {
    match vars.get(x).map(|d| &d.domain) {
        Some(Domain::IntMod(n)) => Ok(v.modulo(&Scalar::from_bigint(n.clone()))?),
        _ => Ok(v),
    }
}

struct Machine<'a> {
    vars: &'a VarTable,
    fuel: u64,
    used: u64,
}

impl Machine<'_> {
    fn tick(&mut self) -> Result<(), InterpError> {
        if self.used >= self.fuel {
            return Err(InterpError::FuelExhausted(self.used));
        }
        self.used += 1;
        Ok(())
    }

    fn operand(&self, o: &LoopOperand, s: &ConcState) -> Result<Scalar, InterpError> {
        match o {
            LoopOperand::Var(v) => s.get(v).cloned().ok_or_else(|| InterpError::UnboundVar(v.clone())),
            LoopOperand::Lit(r) => Ok(Scalar::Exact(r.clone())),
        }
    }

    fn run(&mut self, c: &Command, s: &mut ConcState) -> Result<(), InterpError> {
        match c {
            Command::Skip => Ok(()),
            Command::Assign(x, e) => {
                let v = eval_program_expr(e, s)?;
                let v = store_value(self.vars, x, v)?;
                s.insert(x.clone(), v);
                Ok(())
            }
            Command::Seq(a, b) => {
                self.run(a, s)?;
                self.run(b, s)
            }
            Command::If(x, a, b) => {
                let g = s.get(x).ok_or_else(|| InterpError::UnboundVar(x.clone()))?;
                if g.truthy() {
                    self.run(a, s)
                } else {
                    self.run(b, s)
                }
            }
            Command::For { counter, bound, step, body } => {
                s.insert(counter.clone(), Scalar::int(0));
                loop {
                    let t = s.get(counter).cloned().ok_or_else(|| InterpError::UnboundVar(counter.clone()))?;
                    if !t.cmp_value(&self.operand(bound, s)?).is_lt() {
                        return Ok(());
                    }
                    self.tick()?;
                    self.run(body, s)?;
                    let t = s.get(counter).cloned().ok_or_else(|| InterpError::UnboundVar(counter.clone()))?;
                    let next = store_value(self.vars, counter, t.add(&self.operand(step, s)?)?)?;
                    s.insert(counter.clone(), next);
                }
            }
            Command::While(x, body) => loop {
                let g = s.get(x).ok_or_else(|| InterpError::UnboundVar(x.clone()))?;
                if !g.truthy() {
                    return Ok(());
                }
                self.tick()?;
                self.run(body, s)?;
            },
        }
    }
}

/// ⟦c⟧σ, bounded by `fuel` loop-body executions.
pub fn interpret(c: &Command, vars: &VarTable, s: &ConcState, fuel: u64) -> Result<ConcState, InterpError> {
    interpret_counting(c, vars, s, fuel).map(|(s, _)| s)
}

/// Like [`interpret`], also returning the number of loop-body executions.
pub fn interpret_counting(
    c: &Command,
    vars: &VarTable,
    s: &ConcState,
    fuel: u64,
) -> Result<(ConcState, u64), InterpError> {
    let mut m = Machine { vars, fuel, used: 0 };
    let mut out = s.clone();
    m.run(c, &mut out)?;
    Ok((out, m.used))
}
