//! The `.sym` input format.
//!
//! ```text
//! file     := item*
//! item     := "vars" "{" (("var" | "param")? names ":" domain "param"? ";")* "}"
//!           | "program" "{" stmts "}"
//!           | "group" NAME "=" group ";"
//!           | "action" NAME ":" GROUP "on" names "faithful"? "{" ("act"? GEN ":" eqs ";")* "}"
//!           | "action" NAME "=" ACTION ("x" | "*") ACTION ";"
//!           | "hom" NAME ":" GROUP "->" GROUP "{" (GEN "->" word ("," | ";")?)* "}"
//!           | "triple" ACTION "->" ACTION "by" hom ";"
//!           | "annotate" path ":" ACTION "by" hom ";"
//!           | "inverse" path "=" expr ";"
//!           | "synth" path? "against" ACTION ";"
//! group    := "<" gens? "|" (word ("=" word)?),* ">" ("in" GROUP "{" (GEN "->" word),* "}")?
//!           | "dihedral" "(" n ")" | "cyclic" "(" n ("," GEN)? ")" | "symmetric" "(" n ")"
//!           | "free" "(" gens ")" | "trivial" | GROUP ("x" | "*") GROUP
//! eqs      := VAR "->" expr ("," VAR "->" expr)*
//! hom      := "eq" | "e*" | "e-" | "proj1" | "proj2" | "inclusion" | NAME
//! path     := segment ("." segment)*
//! ```
//!
//! Line comments start with `#`.

use crate::expr::{lift_program_expr, SymbolicExpr};
use crate::group::{parse_word, Embedding, GroupPresentation, HomKind, ProductKind, Word};
use crate::lang::lexer::{tokenize, Cursor, Pos, Tok};
use crate::lang::{var_table, Command, ParseError, ProgramParser, Role, StmtPath, VarDecl, VarTable};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct SpecError {
    pub file: String,
    pub pos: Pos,
    pub msg: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}: {}", self.file, self.pos.line, self.pos.col, self.msg)
    }
}

impl std::error::Error for SpecError {}

#[derive(Clone, Debug, PartialEq)]
pub enum ActionDecl {
    Maps { group: String, vars: Vec<String>, faithful: bool, gens: BTreeMap<String, BTreeMap<String, SymbolicExpr>> },
    Product { kind: ProductKind, left: String, right: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct HomDecl {
    pub source: String,
    pub target: String,
    pub images: BTreeMap<String, Word>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum HomRef {
    Builtin(HomKind),
    Named(String),
}

impl fmt::Display for HomRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HomRef::Named(n) => f.write_str(n),
            HomRef::Builtin(k) => f.write_str(match k {
                HomKind::Eq => "eq",
                HomKind::EStar => "e*",
                HomKind::Proj1 => "proj1",
                HomKind::Proj2 => "proj2",
                HomKind::Inclusion => "inclusion",
                HomKind::EMinus => "e-",
                HomKind::Declared | HomKind::Derived => "?",
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TripleDecl {
    pub pre: String,
    pub post: String,
    pub hom: HomRef,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Annotation {
    pub path: StmtPath,
    pub action: String,
    pub hom: HomRef,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthTarget {
    pub path: Option<StmtPath>,
    pub post: String,
}

/// A parsed `.sym` file with every cross-reference resolved by name.
#[derive(Clone, Debug)]
pub struct SpecFile {
    pub file: String,
    pub decls: Vec<VarDecl>,
    pub vars: VarTable,
    pub program: Command,
    /// Declaration order is kept for listing.
    pub groups: Vec<(String, GroupPresentation)>,
    pub actions: Vec<(String, ActionDecl)>,
    pub homs: Vec<(String, HomDecl)>,
    pub triple: Option<TripleDecl>,
    pub annotations: Vec<Annotation>,
    pub inverses: Vec<(StmtPath, SymbolicExpr)>,
    pub synth: Vec<SynthTarget>,
}

impl SpecFile {
    pub fn group(&self, name: &str) -> Option<&GroupPresentation> {
        self.groups.iter().find(|(n, _)| n == name).map(|(_, g)| g)
    }

    pub fn action_decl(&self, name: &str) -> Option<&ActionDecl> {
        self.actions.iter().find(|(n, _)| n == name).map(|(_, a)| a)
    }

    pub fn hom_decl(&self, name: &str) -> Option<&HomDecl> {
        self.homs.iter().find(|(n, _)| n == name).map(|(_, h)| h)
    }
}

struct Parser<'s> {
    file: &'s str,
    src: &'s str,
    cur: Cursor,
    spec: SpecFile,
    program_seen: bool,
}

const KEYWORDS: [&str; 9] = ["vars", "program", "group", "action", "hom", "triple", "annotate", "inverse", "synth"];

/// Parses `.sym` text; `file` is used in error positions.
pub fn parse_spec(file: &str, src: &str) -> Result<SpecFile, SpecError> {
    let toks = tokenize(src).map_err(|e| SpecError { file: file.to_string(), pos: e.pos, msg: e.msg })?;
    let mut p = Parser {
        file,
        src,
        cur: Cursor::new(toks),
        spec: SpecFile {
            file: file.to_string(),
            decls: Vec::new(),
            vars: VarTable::new(),
            program: Command::Skip,
            groups: Vec::new(),
            actions: Vec::new(),
            homs: Vec::new(),
            triple: None,
            annotations: Vec::new(),
            inverses: Vec::new(),
            synth: Vec::new(),
        },
        program_seen: false,
    };
    while !p.cur.at_eof() {
        p.item()?;
    }
    p.spec.vars = var_table(&p.spec.decls);
    Ok(p.spec)
}

impl Parser<'_> {
    fn err(&self, pos: Pos, msg: impl Into<String>) -> SpecError {
        SpecError { file: self.file.to_string(), pos, msg: msg.into() }
    }

    fn from_parse(&self, e: ParseError) -> SpecError {
        let msg = e.to_string();
        let msg = msg.split_once(": ").map(|(_, m)| m.to_string()).unwrap_or(msg);
        self.err(e.pos(), msg)
    }

    fn expect(&mut self, s: &str) -> Result<(), SpecError> {
        if self.cur.eat_sym(s) {
            Ok(())
        } else {
            Err(self.err(self.cur.pos(), format!("expected `{}`, found {}", s, self.cur.peek())))
        }
    }

    fn expect_kw(&mut self, s: &str) -> Result<(), SpecError> {
        if self.cur.eat_kw(s) {
            Ok(())
        } else {
            Err(self.err(self.cur.pos(), format!("expected `{}`, found {}", s, self.cur.peek())))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), SpecError> {
        let pos = self.cur.pos();
        match self.cur.peek().clone() {
            Tok::Ident(s) => {
                self.cur.next();
                Ok((s, pos))
            }
            t => Err(self.err(pos, format!("expected a name, found {}", t))),
        }
    }

    fn integer(&mut self) -> Result<i64, SpecError> {
        let pos = self.cur.pos();
        match self.cur.next().tok {
            Tok::Num(n) if n.is_integer() => {
                num_traits::ToPrimitive::to_i64(&n.to_integer()).ok_or_else(|| self.err(pos, "integer too large"))
            }
            t => Err(self.err(pos, format!("expected an integer, found {}", t))),
        }
    }

    fn fresh(&self, pos: Pos, name: &str, taken: bool) -> Result<(), SpecError> {
        if taken {
            return Err(self.err(pos, format!("`{}` is defined twice", name)));
        }
        Ok(())
    }

    fn item(&mut self) -> Result<(), SpecError> {
        let pos = self.cur.pos();
        let (kw, _) = self.ident()?;
        match kw.as_str() {
            "vars" => self.vars(),
            "program" => self.program(pos),
            "group" => self.group_item(),
            "action" => self.action_item(),
            "hom" => self.hom_item(),
            "triple" => self.triple_item(pos),
            "annotate" => self.annotate_item(),
            "inverse" => self.inverse_item(),
            "synth" => self.synth_item(),
            other => Err(self.err(pos, format!("expected one of {}, found `{}`", KEYWORDS.join(", "), other))),
        }
    }

    fn vars(&mut self) -> Result<(), SpecError> {
        self.expect("{")?;
        while !self.cur.eat_sym("}") {
            let role = if self.cur.eat_kw("param") {
                Role::Param
            } else {
                self.cur.eat_kw("var");
                Role::Program
            };
            let pos = self.cur.pos();
            let group = {
                let mut pp = ProgramParser::new(&mut self.cur);
                pp.decl_group(role)
            }
            .map_err(|e| self.from_parse(e))?;
            for d in group {
                if self.spec.decls.iter().any(|x| x.name == d.name) {
                    return Err(self.err(pos, format!("variable `{}` declared twice", d.name)));
                }
                self.spec.decls.push(d);
            }
            self.expect(";")?;
        }
        Ok(())
    }

    fn declared(&self) -> BTreeSet<String> {
        self.spec.decls.iter().map(|d| d.name.clone()).collect()
    }

    fn program(&mut self, pos: Pos) -> Result<(), SpecError> {
        if self.program_seen {
            return Err(self.err(pos, "a file has at most one program"));
        }
        self.program_seen = true;
        self.expect("{")?;
        let declared = self.declared();
        let c = {
            let mut pp = ProgramParser::new(&mut self.cur);
            pp.statements().and_then(|c| pp.check_declared(&declared).map(|_| c))
        }
        .map_err(|e| self.from_parse(e))?;
        self.expect("}")?;
        self.spec.program = c;
        Ok(())
    }

    fn group_ref(&mut self) -> Result<(String, GroupPresentation), SpecError> {
        let (n, pos) = self.ident()?;
        match self.spec.group(&n) {
            Some(g) => Ok((n, g.clone())),
            None => Err(self.err(pos, format!("unknown group `{}`", n))),
        }
    }

    fn gens_list(&mut self, close: &str) -> Result<Vec<String>, SpecError> {
        let mut gens = Vec::new();
        while !self.cur.at_sym(close) && !self.cur.at_eof() {
            gens.push(self.ident()?.0);
            if !self.cur.eat_sym(",") {
                break;
            }
        }
        Ok(gens)
    }

    fn word(&mut self, gens: &BTreeSet<String>) -> Result<Word, SpecError> {
        parse_word(&mut self.cur, gens).map_err(|e| self.from_parse(e))
    }

    fn group_item(&mut self) -> Result<(), SpecError> {
        let (name, pos) = self.ident()?;
        self.fresh(pos, &name, self.spec.group(&name).is_some())?;
        self.expect("=")?;
        let gpos = self.cur.pos();
        let mut g = if self.cur.eat_sym("<") {
            let gens = self.gens_list("|")?;
            self.expect("|")?;
            let set: BTreeSet<String> = gens.iter().cloned().collect();
            let mut rels = Vec::new();
            while !self.cur.at_sym(">") && !self.cur.at_eof() {
                let l = self.word(&set)?;
                let r = if self.cur.eat_sym("=") { self.word(&set)? } else { Word::identity() };
                rels.push((l, r));
                if !self.cur.eat_sym(",") {
                    break;
                }
            }
            self.expect(">")?;
            let mut g = GroupPresentation::new(&name, gens, rels).map_err(|e| self.err(gpos, e.to_string()))?;
            if self.cur.eat_kw("in") {
                let (parent, pg) = self.group_ref()?;
                let pset: BTreeSet<String> = pg.generators.iter().cloned().collect();
                self.expect("{")?;
                let mut images = BTreeMap::new();
                while !self.cur.eat_sym("}") {
                    let (h, hp) = self.ident()?;
                    if !set.contains(&h) {
                        return Err(self.err(hp, format!("`{}` is not a generator of {}", h, name)));
                    }
                    self.expect("->")?;
                    images.insert(h, self.word(&pset)?);
                    self.cur.eat_sym(",");
                }
                g.embedding = Some(Embedding { parent, images });
            }
            g
        } else {
            let (kind, kpos) = self.ident()?;
            match kind.as_str() {
                "dihedral" | "symmetric" => {
                    self.expect("(")?;
                    let n = self.integer()?;
                    self.expect(")")?;
                    if n < 1 || (kind == "symmetric" && n > 64) {
                        return Err(self.err(kpos, format!("{}({}) is out of range", kind, n)));
                    }
                    if kind == "dihedral" {
                        GroupPresentation::dihedral(&name, n)
                    } else {
                        GroupPresentation::symmetric(&name, n as usize)
                    }
                }
                "cyclic" => {
                    self.expect("(")?;
                    let n = self.integer()?;
                    let gen = if self.cur.eat_sym(",") { self.ident()?.0 } else { "g".to_string() };
                    self.expect(")")?;
                    if n < 1 {
                        return Err(self.err(kpos, "cyclic order must be positive"));
                    }
                    GroupPresentation::cyclic(&name, &gen, n)
                }
                "free" => {
                    self.expect("(")?;
                    let gens = self.gens_list(")")?;
                    self.expect(")")?;
                    GroupPresentation::new(&name, gens, vec![]).map_err(|e| self.err(kpos, e.to_string()))?
                }
                "trivial" => GroupPresentation::new(&name, vec![], vec![]).expect("empty"),
                _ => {
                    let left = self.spec.group(&kind).cloned().ok_or_else(|| self.err(kpos, format!("unknown group `{}`", kind)))?;
                    let op = if self.cur.eat_kw("x") {
                        ProductKind::Direct
                    } else if self.cur.eat_sym("*") {
                        ProductKind::Free
                    } else {
                        return Err(self.err(self.cur.pos(), "expected `x` or `*` between product factors"));
                    };
                    let (_, right) = self.group_ref()?;
                    let mut p = GroupPresentation::product(op, &left, &right);
                    p.name = name.clone();
                    p
                }
            }
        };
        g.name = name.clone();
        self.expect(";")?;
        self.spec.groups.push((name, g));
        Ok(())
    }

    fn expr(&mut self) -> Result<SymbolicExpr, SpecError> {
        let declared = self.declared();
        let e = {
            let mut pp = ProgramParser::new(&mut self.cur);
            pp.expr().and_then(|e| pp.check_declared(&declared).map(|_| e))
        }
        .map_err(|e| self.from_parse(e))?;
        Ok(lift_program_expr(&e))
    }

    fn declared_var(&mut self) -> Result<String, SpecError> {
        let (v, pos) = self.ident()?;
        if !self.spec.decls.iter().any(|d| d.name == v) {
            return Err(self.err(pos, format!("undeclared variable `{}`", v)));
        }
        Ok(v)
    }

    fn action_ref(&mut self) -> Result<String, SpecError> {
        let (n, pos) = self.ident()?;
        if self.spec.action_decl(&n).is_none() {
            return Err(self.err(pos, format!("unknown action `{}`", n)));
        }
        Ok(n)
    }

    fn action_item(&mut self) -> Result<(), SpecError> {
        let (name, pos) = self.ident()?;
        self.fresh(pos, &name, self.spec.action_decl(&name).is_some())?;
        if self.cur.eat_sym("=") {
            let left = self.action_ref()?;
            let kind = if self.cur.eat_kw("x") {
                ProductKind::Direct
            } else if self.cur.eat_sym("*") {
                ProductKind::Free
            } else {
                return Err(self.err(self.cur.pos(), "expected `x` or `*` between product factors"));
            };
            let right = self.action_ref()?;
            self.expect(";")?;
            self.spec.actions.push((name, ActionDecl::Product { kind, left, right }));
            return Ok(());
        }
        self.expect(":")?;
        let (group, g) = self.group_ref()?;
        self.expect_kw("on")?;
        let mut vars = Vec::new();
        if !self.cur.at_sym("{") && !self.cur.at_kw("faithful") {
            loop {
                let vp = self.cur.pos();
                let v = self.declared_var()?;
                if vars.contains(&v) {
                    return Err(self.err(vp, format!("`{}` listed twice", v)));
                }
                vars.push(v);
                if !self.cur.eat_sym(",") {
                    break;
                }
            }
        }
        let faithful = self.cur.eat_kw("faithful");
        self.expect("{")?;
        let mut gens = BTreeMap::new();
        while !self.cur.eat_sym("}") {
            self.cur.eat_kw("act");
            let (gen, gp) = self.ident()?;
            if !g.has_generator(&gen) {
                return Err(self.err(gp, format!("`{}` is not a generator of {}", gen, group)));
            }
            if gens.contains_key(&gen) {
                return Err(self.err(gp, format!("generator `{}` has two equation lists", gen)));
            }
            self.expect(":")?;
            let mut m = BTreeMap::new();
            loop {
                let vp = self.cur.pos();
                let v = self.declared_var()?;
                if !vars.contains(&v) {
                    return Err(self.err(vp, format!("`{}` is not in the variable set of {}", v, name)));
                }
                self.expect("->")?;
                m.insert(v, self.expr()?);
                if !self.cur.eat_sym(",") {
                    break;
                }
            }
            self.expect(";")?;
            gens.insert(gen, m);
        }
        for gen in &g.generators {
            gens.entry(gen.clone()).or_default();
        }
        self.spec.actions.push((name, ActionDecl::Maps { group, vars, faithful, gens }));
        Ok(())
    }

    fn hom_item(&mut self) -> Result<(), SpecError> {
        let (name, pos) = self.ident()?;
        self.fresh(pos, &name, self.spec.hom_decl(&name).is_some() || builtin(&name).is_some())?;
        self.expect(":")?;
        let (source, sg) = self.group_ref()?;
        self.expect("->")?;
        let (target, tg) = self.group_ref()?;
        let tset: BTreeSet<String> = tg.generators.iter().cloned().collect();
        self.expect("{")?;
        let mut images = BTreeMap::new();
        while !self.cur.eat_sym("}") {
            let (g, gp) = self.ident()?;
            if !sg.has_generator(&g) {
                return Err(self.err(gp, format!("`{}` is not a generator of {}", g, source)));
            }
            self.expect("->")?;
            images.insert(g, self.word(&tset)?);
            if !self.cur.eat_sym(",") {
                self.cur.eat_sym(";");
            }
        }
        self.cur.eat_sym(";");
        self.spec.homs.push((name, HomDecl { source, target, images }));
        Ok(())
    }

    fn hom_ref(&mut self) -> Result<HomRef, SpecError> {
        let pos = self.cur.pos();
        let (n, _) = self.ident()?;
        if n == "e" {
            if self.cur.eat_sym("*") {
                return Ok(HomRef::Builtin(HomKind::EStar));
            }
            if self.cur.eat_sym("-") {
                return Ok(HomRef::Builtin(HomKind::EMinus));
            }
        }
        if let Some(k) = builtin(&n) {
            return Ok(HomRef::Builtin(k));
        }
        if self.spec.hom_decl(&n).is_none() {
            return Err(self.err(pos, format!("unknown homomorphism `{}`", n)));
        }
        Ok(HomRef::Named(n))
    }

    fn triple_item(&mut self, pos: Pos) -> Result<(), SpecError> {
        if self.spec.triple.is_some() {
            return Err(self.err(pos, "a file has at most one triple"));
        }
        let pre = self.action_ref()?;
        self.expect("->")?;
        let post = self.action_ref()?;
        self.expect_kw("by")?;
        let hom = self.hom_ref()?;
        self.expect(";")?;
        self.spec.triple = Some(TripleDecl { pre, post, hom });
        Ok(())
    }

    /// Segments are names or integers; `1.0` lexes as one number, so
    /// numeric runs are re-read from the source text.
    fn path(&mut self) -> Result<StmtPath, SpecError> {
        let pos = self.cur.pos();
        let mut segs: Vec<String> = Vec::new();
        loop {
            let p = self.cur.pos();
            match self.cur.next().tok {
                Tok::Ident(s) => segs.push(s),
                Tok::Num(_) => {
                    let line = self.src.lines().nth(p.line - 1).unwrap_or("");
                    let raw: String =
                        line.chars().skip(p.col - 1).take_while(|c| c.is_ascii_digit() || *c == '.').collect();
                    segs.extend(raw.split('.').filter(|s| !s.is_empty()).map(str::to_string));
                }
                t => return Err(self.err(p, format!("expected a statement path, found {}", t))),
            }
            if !self.cur.eat_sym(".") {
                break;
            }
        }
        let path = StmtPath(segs);
        if path.resolve(&self.spec.program).is_none() {
            return Err(self.err(pos, format!("path `{}` does not name a statement", path.0.join("."))));
        }
        Ok(path)
    }

    fn annotate_item(&mut self) -> Result<(), SpecError> {
        let path = self.path()?;
        self.expect(":")?;
        let action = self.action_ref()?;
        self.expect_kw("by")?;
        let hom = self.hom_ref()?;
        self.expect(";")?;
        self.spec.annotations.push(Annotation { path, action, hom });
        Ok(())
    }

    fn inverse_item(&mut self) -> Result<(), SpecError> {
        let pos = self.cur.pos();
        let path = self.path()?;
        if !matches!(path.resolve(&self.spec.program), Some(Command::Assign(..))) {
            return Err(self.err(pos, "an inverse must be attached to an assignment"));
        }
        self.expect("=")?;
        let e = self.expr()?;
        self.expect(";")?;
        self.spec.inverses.push((path, e));
        Ok(())
    }

    fn synth_item(&mut self) -> Result<(), SpecError> {
        let pos = self.cur.pos();
        let path = if self.cur.at_kw("against") { None } else { Some(self.path()?) };
        let target = match &path {
            Some(p) => p.resolve(&self.spec.program),
            None => Some(&self.spec.program),
        };
        if !matches!(target, Some(Command::Assign(..))) {
            return Err(self.err(pos, "a synthesis target must be a single assignment"));
        }
        self.expect_kw("against")?;
        let post = self.action_ref()?;
        self.expect(";")?;
        self.spec.synth.push(SynthTarget { path, post });
        Ok(())
    }
}

fn builtin(n: &str) -> Option<HomKind> {
    match n {
        "eq" => Some(HomKind::Eq),
        "proj1" => Some(HomKind::Proj1),
        "proj2" => Some(HomKind::Proj2),
        "inclusion" => Some(HomKind::Inclusion),
        _ => None,
    }
}
