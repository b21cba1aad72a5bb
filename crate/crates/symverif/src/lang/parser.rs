//! Recursive-descent parser for program text.
//!
//! ```text
//! program  := decl* stmts
//! decl     := ("var" | "param") ident ("," ident)* ":" domain ";"
//! domain   := "int" | "bool" | "real" | "real01" | "angle" | "intmod" NUM
//! stmts    := stmt (";" stmt)* ";"?
//! stmt     := "skip" | ident ":=" expr
//!           | "if" ident "then"? block ("else" block)?
//!           | "for" "(" ident ":=" "0" ";" ident "<" operand ";" ident ":=" ident "+" operand ")" block
//!           | "while" ident block
//! block    := "{" stmts "}" | stmt
//! expr     := or ("?" expr ":" expr)?
//! ```

use super::lexer::{is_zero_num, tokenize, Cursor, Pos, Tok};
use super::{Command, Domain, LoopOperand, ProgramExpr, Role, VarDecl};
use crate::expr::Op;
use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: undeclared variable `{name}`")]
    UndeclaredVariable { name: String, pos: Pos },
    #[error("{pos}: guard must be a variable")]
    NonVariableGuard { pos: Pos },
}

impl ParseError {
    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::UndeclaredVariable { pos, .. }
            | ParseError::NonVariableGuard { pos } => *pos,
        }
    }
}

fn syntax(pos: Pos, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { pos, msg: msg.into() }
}

/// Parser state over a shared cursor. Records the first use of every
/// variable so undeclared names can be reported with a position.
pub struct ProgramParser<'c> {
    pub cur: &'c mut Cursor,
    pub uses: BTreeMap<String, Pos>,
}

impl<'c> ProgramParser<'c> {
    pub fn new(cur: &'c mut Cursor) -> Self {
        ProgramParser { cur, uses: BTreeMap::new() }
    }

    fn unexpected(&self, what: &str) -> ParseError {
        syntax(self.cur.pos(), format!("expected {}, found {}", what, self.cur.peek()))
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.cur.eat_sym(s) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{}`", s)))
        }
    }

    pub fn ident(&mut self) -> Result<(String, Pos), ParseError> {
        let pos = self.cur.pos();
        match self.cur.peek().clone() {
            Tok::Ident(s) => {
                self.cur.next();
                Ok((s, pos))
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn use_var(&mut self, name: &str, pos: Pos) {
        self.uses.entry(name.to_string()).or_insert(pos);
    }

    pub fn domain(&mut self) -> Result<Domain, ParseError> {
        let (d, pos) = self.ident()?;
        Ok(match d.as_str() {
            "int" => Domain::Int,
            "bool" => Domain::Bool,
            "real" => Domain::Real,
            "real01" => Domain::RealOpen01,
            "angle" => Domain::Angle,
            "intmod" => match self.cur.next().tok {
                Tok::Num(n) if n.is_integer() && n > BigRational::from_integer(1.into()) => {
                    Domain::IntMod(n.to_integer())
                }
                _ => return Err(syntax(pos, "intmod expects an integer modulus > 1")),
            },
            other => return Err(syntax(pos, format!("unknown domain `{}`", other))),
        })
    }

    /// `name ("," name)* ":" domain ("param")?`, used by the `.sym` vars
    /// section; `role` is the default when no trailing `param` is given.
    pub fn decl_group(&mut self, role: Role) -> Result<Vec<VarDecl>, ParseError> {
        let mut names = vec![self.ident()?.0];
        while self.cur.eat_sym(",") {
            names.push(self.ident()?.0);
        }
        self.expect_sym(":")?;
        let domain = self.domain()?;
        let role = if self.cur.eat_kw("param") { Role::Param } else { role };
        Ok(names.into_iter().map(|name| VarDecl { name, domain: domain.clone(), role }).collect())
    }

    pub fn statements(&mut self) -> Result<Command, ParseError> {
        let mut stmts = Vec::new();
        loop {
            if self.cur.at_eof() || self.cur.at_sym("}") {
                break;
            }
            let compound = self.cur.at_kw("if") || self.cur.at_kw("for") || self.cur.at_kw("while") || self.cur.at_sym("{");
            stmts.push(self.statement()?);
            if self.cur.eat_sym(";") {
                continue;
            }
            if compound || self.cur.at_eof() || self.cur.at_sym("}") {
                continue;
            }
            return Err(self.unexpected("`;`"));
        }
        Ok(Command::seq(stmts))
    }

    fn block(&mut self) -> Result<Command, ParseError> {
        if self.cur.eat_sym("{") {
            let c = self.statements()?;
            self.expect_sym("}")?;
            Ok(c)
        } else {
            self.statement()
        }
    }

    fn guard(&mut self) -> Result<String, ParseError> {
        let pos = self.cur.pos();
        match self.expr()? {
            ProgramExpr::Var(v) => Ok(v),
            _ => Err(ParseError::NonVariableGuard { pos }),
        }
    }

    fn operand(&mut self) -> Result<LoopOperand, ParseError> {
        let pos = self.cur.pos();
        match self.cur.next().tok {
            Tok::Ident(v) => {
                self.use_var(&v, pos);
                Ok(LoopOperand::Var(v))
            }
            Tok::Num(n) => Ok(LoopOperand::Lit(n)),
            _ => Err(syntax(pos, "loop bound and step must be a variable or a literal")),
        }
    }

    fn same_counter(&mut self, counter: &str) -> Result<(), ParseError> {
        let (c, pos) = self.ident()?;
        if c != counter {
            return Err(syntax(pos, format!("loop header must use counter `{}` throughout", counter)));
        }
        Ok(())
    }

    pub fn statement(&mut self) -> Result<Command, ParseError> {
        if self.cur.at_sym("{") {
            return self.block();
        }
        if self.cur.eat_kw("skip") {
            return Ok(Command::Skip);
        }
        if self.cur.eat_kw("if") {
            let x = self.guard()?;
            self.cur.eat_kw("then");
            let a = self.block()?;
            let b = if self.cur.eat_kw("else") { self.block()? } else { Command::Skip };
            return Ok(Command::If(x, Box::new(a), Box::new(b)));
        }
        if self.cur.eat_kw("while") {
            let x = self.guard()?;
            self.cur.eat_kw("do");
            let body = self.block()?;
            return Ok(Command::While(x, Box::new(body)));
        }
        if self.cur.eat_kw("for") {
            self.expect_sym("(")?;
            let (counter, cpos) = self.ident()?;
            self.use_var(&counter, cpos);
            self.expect_sym(":=")?;
            if !is_zero_num(self.cur.peek()) {
                return Err(syntax(self.cur.pos(), "loop counter must start at 0"));
            }
            self.cur.next();
            self.expect_sym(";")?;
            self.same_counter(&counter)?;
            self.expect_sym("<")?;
            let bound = self.operand()?;
            self.expect_sym(";")?;
            self.same_counter(&counter)?;
            self.expect_sym(":=")?;
            self.same_counter(&counter)?;
            self.expect_sym("+")?;
            let step = self.operand()?;
            self.expect_sym(")")?;
            let body = self.block()?;
            let names: Vec<String> = [&bound, &step]
                .iter()
                .filter_map(|o| match o {
                    LoopOperand::Var(v) => Some(v.clone()),
                    _ => None,
                })
                .collect();
            if names.contains(&counter) || (names.len() == 2 && names[0] == names[1]) {
                return Err(syntax(cpos, "loop counter, bound and step must be distinct"));
            }
            let assigned = super::modified_vars(&body);
            if let Some(v) = names.iter().find(|v| assigned.contains(*v)) {
                return Err(syntax(cpos, format!("loop parameter `{}` is assigned in the body", v)));
            }
            return Ok(Command::For { counter, bound, step, body: Box::new(body) });
        }
        let (x, pos) = self.ident()?;
        self.use_var(&x, pos);
        self.expect_sym(":=")?;
        let e = self.expr()?;
        Ok(Command::Assign(x, e))
    }

    pub fn expr(&mut self) -> Result<ProgramExpr, ParseError> {
        let c = self.or_expr()?;
        if self.cur.eat_sym("?") {
            let a = self.expr()?;
            self.expect_sym(":")?;
            let b = self.expr()?;
            return Ok(ProgramExpr::Apply(Op::Ite, vec![c, a, b]));
        }
        Ok(c)
    }

    fn or_expr(&mut self) -> Result<ProgramExpr, ParseError> {
        let mut l = self.and_expr()?;
        while self.cur.eat_sym("||") {
            let r = self.and_expr()?;
            l = ProgramExpr::Apply(Op::Or, vec![l, r]);
        }
        Ok(l)
    }

    fn and_expr(&mut self) -> Result<ProgramExpr, ParseError> {
        let mut l = self.cmp_expr()?;
        while self.cur.eat_sym("&&") {
            let r = self.cmp_expr()?;
            l = ProgramExpr::Apply(Op::And, vec![l, r]);
        }
        Ok(l)
    }

    fn cmp_expr(&mut self) -> Result<ProgramExpr, ParseError> {
        let l = self.add_expr()?;
        let op = match self.cur.peek() {
            Tok::Sym("<") => Op::Lt,
            Tok::Sym("<=") => Op::Le,
            Tok::Sym(">") => Op::Gt,
            Tok::Sym(">=") => Op::Ge,
            Tok::Sym("==") => Op::Eq,
            Tok::Sym("!=") => Op::Ne,
            _ => return Ok(l),
        };
        self.cur.next();
        let r = self.add_expr()?;
        Ok(ProgramExpr::Apply(op, vec![l, r]))
    }

    fn add_expr(&mut self) -> Result<ProgramExpr, ParseError> {
        let mut l = self.mul_expr()?;
        loop {
            let op = match self.cur.peek() {
                Tok::Sym("+") => Op::Add,
                Tok::Sym("-") => Op::Sub,
                _ => return Ok(l),
            };
            self.cur.next();
            let r = self.mul_expr()?;
            l = ProgramExpr::Apply(op, vec![l, r]);
        }
    }

    fn mul_expr(&mut self) -> Result<ProgramExpr, ParseError> {
        let mut l = self.unary()?;
        loop {
            let op = match self.cur.peek() {
                Tok::Sym("*") => Op::Mul,
                Tok::Sym("/") => Op::Div,
                Tok::Ident(k) if k == "mod" => Op::Mod,
                _ => return Ok(l),
            };
            self.cur.next();
            let r = self.unary()?;
            l = ProgramExpr::Apply(op, vec![l, r]);
        }
    }

    fn unary(&mut self) -> Result<ProgramExpr, ParseError> {
        if self.cur.eat_sym("-") {
            let e = self.unary()?;
            return Ok(match e {
                ProgramExpr::Int(i) => ProgramExpr::Int(-i),
                ProgramExpr::Rat(r) => ProgramExpr::Rat(-r),
                e => ProgramExpr::Apply(Op::Neg, vec![e]),
            });
        }
        if self.cur.eat_sym("!") {
            let e = self.unary()?;
            return Ok(ProgramExpr::Apply(Op::Not, vec![e]));
        }
        self.power()
    }

    fn power(&mut self) -> Result<ProgramExpr, ParseError> {
        let base = self.atom()?;
        if self.cur.eat_sym("^-1") {
            return Ok(ProgramExpr::Apply(Op::Pow, vec![base, ProgramExpr::Int(BigInt::from(-1))]));
        }
        if self.cur.eat_sym("^") {
            let e = self.unary()?;
            return Ok(ProgramExpr::Apply(Op::Pow, vec![base, e]));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ProgramExpr, ParseError> {
        let pos = self.cur.pos();
        match self.cur.peek().clone() {
            Tok::Num(n) => {
                self.cur.next();
                Ok(if n.is_integer() { ProgramExpr::Int(n.to_integer()) } else { ProgramExpr::Rat(n) })
            }
            Tok::Pi => {
                self.cur.next();
                Ok(ProgramExpr::Pi)
            }
            Tok::Sym("(") => {
                self.cur.next();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.cur.next();
                if self.cur.at_sym("(") {
                    let op = Op::from_function_name(&name)
                        .ok_or_else(|| syntax(pos, format!("unknown operator `{}`", name)))?;
                    self.cur.next();
                    let mut args = Vec::new();
                    if !self.cur.at_sym(")") {
                        args.push(self.expr()?);
                        while self.cur.eat_sym(",") {
                            args.push(self.expr()?);
                        }
                    }
                    self.expect_sym(")")?;
                    if !op.arity_ok(args.len()) {
                        return Err(syntax(pos, format!("`{}` applied to {} arguments", name, args.len())));
                    }
                    return Ok(ProgramExpr::Apply(op, args));
                }
                if matches!(name.as_str(), "true" | "false") {
                    return Ok(ProgramExpr::Int(BigInt::from((name == "true") as i32)));
                }
                self.use_var(&name, pos);
                Ok(ProgramExpr::Var(name))
            }
            _ => Err(self.unexpected("expression")),
        }
    }

    /// Reports the first use of a variable missing from `declared`.
    pub fn check_declared(&self, declared: &BTreeSet<String>) -> Result<(), ParseError> {
        let mut missing: Vec<(&String, &Pos)> = self.uses.iter().filter(|(n, _)| !declared.contains(*n)).collect();
        missing.sort_by_key(|(_, p)| (p.line, p.col));
        match missing.first() {
            Some((n, p)) => Err(ParseError::UndeclaredVariable { name: (*n).clone(), pos: **p }),
            None => Ok(()),
        }
    }
}

fn lex(text: &str) -> Result<Cursor, ParseError> {
    tokenize(text).map(Cursor::new).map_err(|e| syntax(e.pos, e.msg))
}

/// Parses declarations followed by statements.
pub fn parse_program(text: &str) -> Result<(Vec<VarDecl>, Command), ParseError> {
    let mut cur = lex(text)?;
    let mut p = ProgramParser::new(&mut cur);
    let mut decls: Vec<VarDecl> = Vec::new();
    loop {
        let role = if p.cur.eat_kw("var") {
            Role::Program
        } else if p.cur.eat_kw("param") {
            Role::Param
        } else {
            break;
        };
        let pos = p.cur.pos();
        for d in p.decl_group(role)? {
            if decls.iter().any(|e| e.name == d.name) {
                return Err(syntax(pos, format!("variable `{}` declared twice", d.name)));
            }
            decls.push(d);
        }
        p.expect_sym(";")?;
    }
    let c = p.statements()?;
    if !p.cur.at_eof() {
        return Err(p.unexpected("end of program"));
    }
    let declared = decls.iter().map(|d| d.name.clone()).collect();
    p.check_declared(&declared)?;
    Ok((decls, c))
}

/// Parses statements against an existing declaration list.
pub fn parse_statements(text: &str, decls: &[VarDecl]) -> Result<Command, ParseError> {
    let mut cur = lex(text)?;
    let mut p = ProgramParser::new(&mut cur);
    let c = p.statements()?;
    if !p.cur.at_eof() {
        return Err(p.unexpected("end of program"));
    }
    let declared = decls.iter().map(|d| d.name.clone()).collect();
    p.check_declared(&declared)?;
    Ok(c)
}

/// Parses a standalone expression.
pub fn parse_expr(text: &str) -> Result<ProgramExpr, ParseError> {
    let mut cur = lex(text)?;
    let mut p = ProgramParser::new(&mut cur);
    let e = p.expr()?;
    if !p.cur.at_eof() {
        return Err(p.unexpected("end of expression"));
    }
    Ok(e)
}
