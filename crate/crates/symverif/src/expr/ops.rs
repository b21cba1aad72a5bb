//! Operator registry shared by program expressions and symbolic expressions.

use std::fmt;

/// Operator symbols known to the tool. The set is closed: unknown names are
/// rejected at parse time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Pow,
    Mod,
    Abs,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
    Not,
    Ite,
    Sin,
    Cos,
    Tan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arity {
    Exactly(usize),
    AtLeast(usize),
}

/// Interpreted operators have exact arithmetic semantics; opaque ones are
/// uninterpreted in the solver and evaluated numerically by the interpreter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpKind {
    Interpreted,
    Opaque,
}

pub const ALL_OPS: [Op; 21] = [
    Op::Add,
    Op::Sub,
    Op::Mul,
    Op::Div,
    Op::Neg,
    Op::Pow,
    Op::Mod,
    Op::Abs,
    Op::Lt,
    Op::Le,
    Op::Gt,
    Op::Ge,
    Op::Eq,
    Op::Ne,
    Op::And,
    Op::Or,
    Op::Not,
    Op::Ite,
    Op::Sin,
    Op::Cos,
    Op::Tan,
];

impl Op {
    pub fn name(self) -> &'static str {
        match self {
            Op::Add => "+",
            Op::Sub => "-",
            Op::Mul => "*",
            Op::Div => "/",
            Op::Neg => "neg",
            Op::Pow => "^",
            Op::Mod => "mod",
            Op::Abs => "abs",
            Op::Lt => "<",
            Op::Le => "<=",
            Op::Gt => ">",
            Op::Ge => ">=",
            Op::Eq => "==",
            Op::Ne => "!=",
            Op::And => "&&",
            Op::Or => "||",
            Op::Not => "!",
            Op::Ite => "ite",
            Op::Sin => "sin",
            Op::Cos => "cos",
            Op::Tan => "tan",
        }
    }

    pub fn arity(self) -> Arity {
        match self {
            Op::Add | Op::Mul => Arity::AtLeast(2),
            Op::Neg | Op::Abs | Op::Not | Op::Sin | Op::Cos | Op::Tan => Arity::Exactly(1),
            Op::Ite => Arity::Exactly(3),
            _ => Arity::Exactly(2),
        }
    }

    pub fn kind(self) -> OpKind {
        match self {
            Op::Sin | Op::Cos | Op::Tan => OpKind::Opaque,
            _ => OpKind::Interpreted,
        }
    }

    pub fn is_opaque(self) -> bool {
        self.kind() == OpKind::Opaque
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, Op::Lt | Op::Le | Op::Gt | Op::Ge | Op::Eq | Op::Ne)
    }

    pub fn is_boolean(self) -> bool {
        self.is_comparison() || matches!(self, Op::And | Op::Or | Op::Not)
    }

    pub fn arity_ok(self, n: usize) -> bool {
        match self.arity() {
            Arity::Exactly(k) => n == k,
            Arity::AtLeast(k) => n >= k,
        }
    }

    /// Named functions callable as `name(args)` in source text.
    pub fn from_function_name(name: &str) -> Option<Op> {
        match name {
            "sin" => Some(Op::Sin),
            "cos" => Some(Op::Cos),
            "tan" => Some(Op::Tan),
            "abs" => Some(Op::Abs),
            "mod" => Some(Op::Mod),
            "pow" => Some(Op::Pow),
            "ite" => Some(Op::Ite),
            _ => None,
        }
    }

    /// SMT-LIB function symbol. `abs`, `pow`, `neg` and the comparison
    /// variants are lowered by the emitter and never reach this table.
    pub fn smt_name(self) -> &'static str {
        match self {
            Op::Add => "+",
            Op::Sub => "-",
            Op::Mul => "*",
            Op::Div => "/",
            Op::Neg => "-",
            Op::Pow => "^",
            Op::Mod => "mod",
            Op::Abs => "abs",
            Op::Lt => "<",
            Op::Le => "<=",
            Op::Gt => ">",
            Op::Ge => ">=",
            Op::Eq => "=",
            Op::Ne => "distinct",
            Op::And => "and",
            Op::Or => "or",
            Op::Not => "not",
            Op::Ite => "ite",
            Op::Sin => "sin",
            Op::Cos => "cos",
            Op::Tan => "tan",
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
