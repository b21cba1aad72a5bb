//! Enumerative synthesis of finitely generated pre-conditions for a single
//! assignment.

use crate::expr::{affine_in, simplify, Arity, ConcState, Node, Op, Piecewise, Scalar, SymbolicExpr};
use crate::group::{GroupAction, GroupPresentation, Homomorphism, SymMap, Word};
use crate::lang::{store_value, Domain, ProgramExpr, VarTable};
use crate::logic::{assigned_expr, SymmetryTriple, Verdict, Verifier};
use crate::smt::{encode_sem_assign, values_equal, ObligationKind, Outcome};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::time::{Duration, Instant};
use thiserror::Error;

/// Concrete states used to prune candidates before any solver call.
pub const SAMPLES: usize = 32;
/// Largest order tried when certifying bijectivity through `g^k = id`.
const MAX_ORDER: u64 = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("synthesis timed out after {seconds:.1} s on generator `{generator}`")]
    SynthTimeout { generator: String, seconds: f64 },
    #[error("no candidate for generator `{generator}` within depth {depth}: {detail}")]
    NoCandidate { generator: String, depth: usize, detail: String },
    #[error("synthesized triple does not verify: {0}")]
    Unverified(String),
    #[error("ill-formed synthesis problem: {0}")]
    IllFormed(String),
}

#[derive(Clone, Debug)]
pub struct SynthBudget {
    pub depth: usize,
    /// Per post-condition generator.
    pub timeout: Duration,
    pub seed: u64,
}

impl Default for SynthBudget {
    fn default() -> Self {
        SynthBudget { depth: 3, timeout: Duration::from_secs(120), seed: 0 }
    }
}

/// Productions shared by every variable: the variables themselves, a pool
/// of constants, operators, and per-generator seed terms (the post-action's
/// images with the assignment substituted in).
#[derive(Clone, Debug, PartialEq)]
pub struct Grammar {
    pub variables: Vec<String>,
    pub constants: Vec<SymbolicExpr>,
    pub unary: Vec<Op>,
    pub binary: Vec<Op>,
    pub seeds: BTreeMap<String, Vec<SymbolicExpr>>,
    pub depth: usize,
}

impl Grammar {
    /// Terminals for `var`'s production set: the variable first, then its
    /// siblings, constants and the seeds of generator `gen`.
    pub fn terminals(&self, var: &str, gen: &str) -> Vec<SymbolicExpr> {
        let mut out = vec![SymbolicExpr::var(var)];
        out.extend(self.variables.iter().filter(|v| *v != var).map(|v| SymbolicExpr::var(v.clone())));
        out.extend(self.constants.iter().cloned());
        out.extend(self.seeds.get(gen).into_iter().flatten().cloned());
        out
    }

    /// Largest term size derivable within the depth bound.
    pub fn max_size(&self) -> usize {
        (1usize << self.depth.min(20)) - 1
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SynthStats {
    pub candidates: u64,
    pub solver_calls: u64,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct SynthResult {
    pub pre: GroupAction,
    pub hom: Homomorphism,
    pub stats: SynthStats,
    pub verdict: Verdict,
}

fn literals(e: &SymbolicExpr, out: &mut Vec<SymbolicExpr>) {
    match e.node() {
        Node::Int(_) | Node::Rat(_) | Node::Pi => {
            if !out.contains(e) {
                out.push(e.clone());
            }
        }
        Node::Apply(_, args) => args.iter().for_each(|a| literals(a, out)),
        Node::Var(_) => {}
    }
}

/// Solver-free inverse of `v ↦ f` when `f` is (piecewise) affine in `v`.
fn structural_inverse(fe: &SymbolicExpr, target: &str) -> Option<SymbolicExpr> {
    let k = SymbolicExpr::var(target);
    let split = |e: &SymbolicExpr| {
        let (c, d) = affine_in(e, target)?;
        if c.mentions(target) || d.mentions(target) || c.is_zero_literal() {
            return None;
        }
        Some((k.clone() - d) / c)
    };
    if let Some(i) = split(fe) {
        return Some(i);
    }
    let pw = Piecewise::of(fe);
    if pw.conditions().iter().any(|c| c.mentions(target)) {
        return None;
    }
    pw.map_leaves(&mut |leaf| split(leaf)).map(|p| p.to_expr())
}

/// The grammar for `target := f` against `post`. The constant pool is
/// {−2, −1, 0, 1, 2} followed by literals of the assignment and the action.
pub fn make_grammar(target: &str, f: &ProgramExpr, post: &GroupAction, depth: usize) -> Grammar {
    let fe = crate::expr::lift_program_expr(f);
    let mut vars: BTreeSet<String> = post.var_set();
    vars.extend(f.vars());
    vars.insert(target.to_string());
    let mut constants: Vec<SymbolicExpr> = (-2..=2).map(SymbolicExpr::int).collect();
    let mut ops = BTreeSet::new();
    literals(&fe, &mut constants);
    fe.opaque_ops(&mut ops);
    for m in post.gens.values() {
        for e in m.values() {
            literals(e, &mut constants);
            e.opaque_ops(&mut ops);
        }
    }
    let mut unary = vec![Op::Neg];
    unary.extend(ops.into_iter().filter(|o| o.arity() == Arity::Exactly(1) && *o != Op::Neg));
    let inv = structural_inverse(&simplify(&fe), target);
    let mut seeds = BTreeMap::new();
    for (h, m) in &post.gens {
        let mut at_c = BTreeMap::new();
        at_c.insert(target.to_string(), fe.clone());
        // b_h(⟦C⟧σ) as expressions over σ
        let after: SymMap = m.iter().map(|(u, e)| (u.clone(), simplify(&e.substitute(&at_c)))).collect();
        let mut list: Vec<SymbolicExpr> = Vec::new();
        let mut push = |e: SymbolicExpr| {
            if e.as_var().is_none() && !e.is_literal() && !list.contains(&e) {
                list.push(e);
            }
        };
        for (u, e) in &after {
            if u != target {
                push(e.clone());
            }
        }
        if let Some(i) = &inv {
            let mut at = after.clone();
            at.entry(target.to_string()).or_insert_with(|| fe.clone());
            push(simplify(&i.substitute(&at)));
        }
        seeds.insert(h.clone(), list);
    }
    Grammar { variables: vars.into_iter().collect(), constants, unary, binary: vec![Op::Add, Op::Sub, Op::Mul], seeds, depth }
}

struct Term {
    expr: SymbolicExpr,
    depth: usize,
    vals: Vec<Scalar>,
}

fn signature(vals: &[Scalar]) -> String {
    let parts: Vec<String> = vals
        .iter()
        .map(|v| match v {
            Scalar::Exact(_) => v.to_string(),
            Scalar::Approx(_) => format!("{:.9e}", v.to_f64()),
        })
        .collect();
    parts.join(",")
}

fn apply1(op: Op, a: &Scalar) -> Option<Scalar> {
    match op {
        Op::Neg => Some(a.neg()),
        Op::Abs => Some(a.abs()),
        Op::Sin => a.sin().ok(),
        Op::Cos => a.cos().ok(),
        Op::Tan => a.tan().ok(),
        _ => None,
    }
}

fn apply2(op: Op, a: &Scalar, b: &Scalar) -> Option<Scalar> {
    match op {
        Op::Add => a.add(b).ok(),
        Op::Sub => a.sub(b).ok(),
        Op::Mul => a.mul(b).ok(),
        _ => None,
    }
}

/// Terms of one production set, built lazily by size and deduplicated by
/// their values on the sample states.
struct Bank {
    terminals: Vec<SymbolicExpr>,
    unary: Vec<Op>,
    binary: Vec<Op>,
    depth: usize,
    max_size: usize,
    states: Vec<ConcState>,
    levels: Vec<Vec<Term>>,
    seen: HashSet<String>,
}

impl Bank {
    fn new(g: &Grammar, terminals: Vec<SymbolicExpr>, states: Vec<ConcState>) -> Bank {
        Bank {
            terminals,
            unary: g.unary.clone(),
            binary: g.binary.clone(),
            depth: g.depth,
            max_size: g.max_size(),
            states,
            levels: vec![Vec::new()],
            seen: HashSet::new(),
        }
    }

    fn admit(&mut self, expr: SymbolicExpr, depth: usize, vals: Option<Vec<Scalar>>, out: &mut Vec<Term>) {
        let Some(vals) = vals else { return };
        if self.seen.insert(signature(&vals)) {
            out.push(Term { expr, depth, vals });
        }
    }

    /// Terms of exactly `size`, or `None` past the size bound.
    fn level(&mut self, size: usize) -> Option<&[Term]> {
        if size == 0 || size > self.max_size {
            return None;
        }
        while self.levels.len() <= size {
            let s = self.levels.len();
            let mut out = Vec::new();
            if s == 1 {
                for t in self.terminals.clone() {
                    let vals = self.states.iter().map(|st| crate::expr::eval(&t, st).ok()).collect();
                    self.admit(t, 1, vals, &mut out);
                }
            } else {
                let mut fresh = Vec::new();
                for op in &self.unary {
                    for a in &self.levels[s - 1] {
                        if a.depth >= self.depth {
                            continue;
                        }
                        let vals = a.vals.iter().map(|x| apply1(*op, x)).collect();
                        fresh.push((SymbolicExpr::unary(*op, a.expr.clone()), a.depth + 1, vals));
                    }
                }
                for op in &self.binary {
                    let comm = matches!(op, Op::Add | Op::Mul);
                    for la in 1..s - 1 {
                        let lb = s - 1 - la;
                        if comm && la > lb {
                            continue;
                        }
                        for (i, a) in self.levels[la].iter().enumerate() {
                            if a.depth >= self.depth {
                                continue;
                            }
                            for (j, b) in self.levels[lb].iter().enumerate() {
                                if b.depth >= self.depth || (comm && la == lb && j < i) {
                                    continue;
                                }
                                let vals = a.vals.iter().zip(&b.vals).map(|(x, y)| apply2(*op, x, y)).collect();
                                let e = SymbolicExpr::binary(*op, a.expr.clone(), b.expr.clone());
                                fresh.push((e, a.depth.max(b.depth) + 1, vals));
                            }
                        }
                    }
                }
                for (e, d, vals) in fresh {
                    self.admit(e, d, vals, &mut out);
                }
            }
            self.levels.push(out);
        }
        Some(&self.levels[size])
    }
}

struct Problem<'a> {
    target: String,
    f: &'a ProgramExpr,
    fe: SymbolicExpr,
    post: &'a GroupAction,
    vars: Vec<String>,
    table: &'a VarTable,
    verifier: &'a Verifier,
    grammar: Grammar,
}

impl Problem<'_> {
    fn domain(&self, v: &str) -> Domain {
        self.verifier.checker.domain_of(v)
    }

    fn run_assign(&self, s: &ConcState) -> Option<ConcState> {
        let v = crate::expr::eval(&self.fe, s).ok()?;
        let v = store_value(self.table, &self.target, v).ok()?;
        let mut out = s.clone();
        out.insert(self.target.clone(), v);
        Some(out)
    }

    /// Sample states with the expected post-states `b_h(⟦C⟧σ)`.
    fn samples(&self, h: &str, seed: u64) -> Vec<(ConcState, ConcState)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let all: BTreeSet<String> = self.vars.iter().cloned().collect();
        let mut out = Vec::new();
        for _ in 0..SAMPLES * 20 {
            if out.len() == SAMPLES {
                break;
            }
            let s = self.verifier.checker.sample_env(&all, &mut rng);
            let expected = self
                .run_assign(&s)
                .and_then(|c| self.post.apply_conc(&Word::gen(h), &c, self.table, &self.verifier.ctx).ok());
            if let Some(e) = expected {
                out.push((s, e));
            }
        }
        out
    }

    fn same(&self, v: &str, a: &Scalar, b: &Scalar) -> bool {
        values_equal(a, b, &self.domain(v)) == Some(true)
    }
}

/// Odometer step over `idx`, last position fastest.
fn advance(idx: &mut [usize], lens: &[usize]) -> bool {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < lens[k] {
            return true;
        }
        idx[k] = 0;
    }
    false
}

/// Compositions of `total` into `parts` positive sizes, lexicographically.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 1..=total.saturating_sub(parts - 1) {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

struct GenSearch<'a, 'b> {
    p: &'b Problem<'a>,
    h: String,
    started: Instant,
    budget: &'b SynthBudget,
    candidates: u64,
}

impl GenSearch<'_, '_> {
    fn timed_out(&self) -> bool {
        self.started.elapsed() > self.budget.timeout
    }

    fn timeout(&self) -> SynthError {
        SynthError::SynthTimeout { generator: self.h.clone(), seconds: self.started.elapsed().as_secs_f64() }
    }

    fn no_candidate(&self, detail: impl Into<String>) -> SynthError {
        SynthError::NoCandidate { generator: self.h.clone(), depth: self.budget.depth, detail: detail.into() }
    }

    /// First term of the production set of `u` matching `want` on every sample.
    fn first_match(&mut self, u: &str, states: &[ConcState], want: &[Scalar]) -> Result<SymbolicExpr, SynthError> {
        let terminals = self.p.grammar.terminals(u, &self.h);
        let mut bank = Bank::new(&self.p.grammar, terminals, states.to_vec());
        let mut size = 1;
        while let Some(level) = bank.level(size) {
            for t in level {
                self.candidates += 1;
                if t.vals.iter().zip(want).all(|(a, b)| self.p.same(u, a, b)) {
                    return Ok(t.expr.clone());
                }
            }
            if self.timed_out() {
                return Err(self.timeout());
            }
            size += 1;
        }
        Err(self.no_candidate(format!("no term matches the required image of `{}`", u)))
    }

    fn run(&mut self) -> Result<SymMap, SynthError> {
        let p = self.p;
        let samples = p.samples(&self.h, self.budget.seed);
        if samples.is_empty() {
            return Err(self.no_candidate("no sample state evaluates"));
        }
        let states: Vec<ConcState> = samples.iter().map(|(s, _)| s.clone()).collect();
        let mut chosen: SymMap = BTreeMap::new();
        // variables other than the target keep their value through C, so
        // their images are determined by the post-state
        let mut free: Vec<String> = Vec::new();
        for u in &p.vars {
            if u != &p.target && p.post.vars.contains(u) {
                let want: Vec<Scalar> = samples.iter().map(|(_, e)| e[u].clone()).collect();
                let t = self.first_match(u, &states, &want)?;
                chosen.insert(u.clone(), t);
            } else if p.fe.mentions(u) || u == &p.target {
                free.push(u.clone());
            } else {
                chosen.insert(u.clone(), SymbolicExpr::var(u.clone()));
            }
        }
        if !p.post.vars.contains(&p.target) {
            // the assigned value is unobserved by the post-condition
            for u in free {
                chosen.insert(u.clone(), SymbolicExpr::var(u));
            }
            return match self.verify_candidate(&chosen) {
                Outcome::Proved(_) => Ok(chosen),
                Outcome::Unknown(r) if r.contains("timeout") => Err(self.timeout()),
                _ => Err(self.no_candidate("the determined images are refuted")),
            };
        }
        let fixed_vals: Vec<ConcState> = states
            .iter()
            .map(|s| {
                let mut m = s.clone();
                for (u, e) in &chosen {
                    if let Some(v) = crate::expr::eval(e, s).ok().and_then(|v| store_value(p.table, u, v).ok()) {
                        m.insert(u.clone(), v);
                    }
                }
                m
            })
            .collect();
        let want: Vec<Scalar> = samples.iter().map(|(_, e)| e[&p.target].clone()).collect();
        let mut banks: Vec<Bank> = free
            .iter()
            .map(|u| Bank::new(&p.grammar, p.grammar.terminals(u, &self.h), states.clone()))
            .collect();
        let mut refuted = 0usize;
        for total in free.len()..=p.grammar.max_size() * free.len() {
            for sizes in compositions(total, free.len()) {
                let mut levels: Vec<Vec<(SymbolicExpr, Vec<Scalar>)>> = Vec::new();
                for (b, s) in banks.iter_mut().zip(&sizes) {
                    let l = b.level(*s).unwrap_or(&[]);
                    levels.push(l.iter().map(|t| (t.expr.clone(), t.vals.clone())).collect());
                }
                if levels.iter().any(|l| l.is_empty()) {
                    continue;
                }
                let lens: Vec<usize> = levels.iter().map(Vec::len).collect();
                let mut idx = vec![0usize; levels.len()];
                loop {
                    self.candidates += 1;
                    if self.candidates % 512 == 0 && self.timed_out() {
                        return Err(self.timeout());
                    }
                    let passes = (0..states.len()).all(|j| {
                        let mut env = fixed_vals[j].clone();
                        for (k, u) in free.iter().enumerate() {
                            env.insert(u.clone(), levels[k][idx[k]].1[j].clone());
                        }
                        crate::expr::eval(&p.fe, &env)
                            .ok()
                            .and_then(|v| store_value(p.table, &p.target, v).ok())
                            .is_some_and(|v| p.same(&p.target, &v, &want[j]))
                    });
                    if passes {
                        let mut map = chosen.clone();
                        for (k, u) in free.iter().enumerate() {
                            map.insert(u.clone(), levels[k][idx[k]].0.clone());
                        }
                        match self.verify_candidate(&map) {
                            Outcome::Proved(_) => return Ok(map),
                            Outcome::Unknown(r) if r.contains("timeout") => return Err(self.timeout()),
                            _ => refuted += 1,
                        }
                    }
                    if !advance(&mut idx, &lens) {
                        break;
                    }
                }
            }
            if self.timed_out() {
                return Err(self.timeout());
            }
        }
        Err(self.no_candidate(format!("{} sample-consistent candidates refuted", refuted)))
    }

    fn single(&self, map: &SymMap) -> (GroupAction, Homomorphism) {
        let g = GroupPresentation::free("F1", &[self.h.as_str()]);
        let mut gens = BTreeMap::new();
        gens.insert(self.h.clone(), map.clone());
        let a = GroupAction::new("candidate", g.clone(), self.p.vars.clone(), gens, false).expect("well-formed");
        let mut images = BTreeMap::new();
        images.insert(self.h.clone(), Word::gen(&self.h));
        let hom = Homomorphism::new("ψ", g, self.p.post.group.clone(), images).expect("generator image");
        (a, hom)
    }

    fn verify_candidate(&self, map: &SymMap) -> Outcome {
        let (a, hom) = self.single(map);
        let v = self.p.verifier;
        v.checker.set_context("SYNTH", &self.h);
        match encode_sem_assign(&a, &self.p.target, self.p.f, self.p.post, Some(&hom), &v.checker, &v.ctx) {
            Ok(enc) => enc.discharge(&v.checker),
            Err(e) => Outcome::Unknown(e.to_string()),
        }
    }

    /// Two-sided inverse of `map`: solved when affine, searched per variable
    /// in the grammar, else a power `g^(k−1)` with `g^k = id`.
    fn certify_bijective(&mut self, map: &SymMap) -> Result<SymMap, SynthError> {
        let (a, _) = self.single(map);
        let ctx = &self.p.verifier.ctx;
        if let Ok(inv) = a.gen_map(&self.h, -1, ctx) {
            if self.two_sided(map, &inv) {
                return Ok(inv);
            }
        }
        if let Some(inv) = self.search_inverse(map)? {
            if self.two_sided(map, &inv) {
                return Ok(inv);
            }
        }
        for k in 2..=MAX_ORDER {
            let Ok(pk) = a.word_map(&Word::power(&self.h, k as i64), ctx) else { break };
            if pk.iter().all(|(u, e)| e.as_var() == Some(u.as_str())) || self.is_identity(&pk) {
                let inv = a.word_map(&Word::power(&self.h, k as i64 - 1), ctx).expect("smaller power");
                return Ok(inv);
            }
        }
        Err(self.no_candidate("candidate map is not certified bijective"))
    }

    fn search_inverse(&mut self, map: &SymMap) -> Result<Option<SymMap>, SynthError> {
        let p = self.p;
        let samples = p.samples(&self.h, self.budget.seed ^ 0x5eed);
        let mut moved = Vec::new();
        let mut orig = Vec::new();
        for (s, _) in &samples {
            let mut m = s.clone();
            let mut ok = true;
            for (u, e) in map {
                match crate::expr::eval(e, s).ok().and_then(|v| store_value(p.table, u, v).ok()) {
                    Some(v) => {
                        m.insert(u.clone(), v);
                    }
                    None => ok = false,
                }
            }
            if ok {
                moved.push(m);
                orig.push(s.clone());
            }
        }
        if moved.is_empty() {
            return Ok(None);
        }
        let mut inv = BTreeMap::new();
        for u in &p.vars {
            let want: Vec<Scalar> = orig.iter().map(|s| s[u].clone()).collect();
            match self.first_match(u, &moved, &want) {
                Ok(t) => {
                    inv.insert(u.clone(), t);
                }
                Err(e @ SynthError::SynthTimeout { .. }) => return Err(e),
                Err(_) => return Ok(None),
            }
        }
        Ok(Some(inv))
    }

    fn is_identity(&self, m: &SymMap) -> bool {
        let c = &self.p.verifier.checker;
        m.iter().all(|(u, e)| {
            let label = format!("{}: power of the candidate fixes {}", self.h, u);
            c.prove_equal(ObligationKind::ExprEquality, &label, e, &SymbolicExpr::var(u.clone()), &self.p.domain(u))
                .is_proved()
        })
    }

    fn two_sided(&self, g: &SymMap, inv: &SymMap) -> bool {
        let after = |outer: &SymMap, inner: &SymMap| -> SymMap {
            outer.iter().map(|(u, e)| (u.clone(), simplify(&e.substitute(inner)))).collect()
        };
        self.is_identity(&after(g, inv)) && self.is_identity(&after(inv, g))
    }
}

/// A pre-condition for `target := f` against `post`: the free group on the
/// post-condition's generator names, each acting by a synthesized state
/// bijection `g` with `b_h(⟦C⟧σ) = ⟦C⟧(g σ)`.
pub fn synthesize_pre(
    target: &str,
    f: &ProgramExpr,
    post: &GroupAction,
    budget: &SynthBudget,
    verifier: &Verifier,
) -> Result<SynthResult, SynthError> {
    let started = Instant::now();
    let calls0 = verifier.checker.solver_calls();
    let grammar = make_grammar(target, f, post, budget.depth);
    let fe = assigned_expr(f, target, &verifier.checker);
    let p = Problem {
        target: target.to_string(),
        f,
        fe,
        post,
        vars: grammar.variables.clone(),
        table: &verifier.vars,
        verifier,
        grammar,
    };
    let mut gens = BTreeMap::new();
    let mut candidates = 0;
    for h in &post.group.generators {
        let mut s = GenSearch { p: &p, h: h.clone(), started: Instant::now(), budget, candidates: 0 };
        let result = s.run().and_then(|m| {
            s.certify_bijective(&m)?;
            Ok(m)
        });
        candidates += s.candidates;
        gens.insert(h.clone(), result?);
    }
    let names: Vec<&str> = post.group.generators.iter().map(String::as_str).collect();
    let group = GroupPresentation::free(&format!("F{}", names.len()), &names);
    let pre = GroupAction::new("pre", group.clone(), p.vars.clone(), gens, false)
        .map_err(|e| SynthError::IllFormed(e.to_string()))?;
    let images = names.iter().map(|h| (h.to_string(), Word::gen(h))).collect();
    let hom =
        Homomorphism::new("ψ", group, post.group.clone(), images).map_err(|e| SynthError::IllFormed(e.to_string()))?;
    let program = crate::lang::Command::Assign(target.to_string(), f.clone());
    let triple = SymmetryTriple::new(pre.clone(), program, post.clone(), hom.clone())
        .map_err(|e| SynthError::IllFormed(e.to_string()))?;
    let verdict = verifier.verify(&triple);
    if !verdict.is_valid() {
        return Err(SynthError::Unverified(verdict.to_string()));
    }
    let stats = SynthStats {
        candidates,
        solver_calls: verifier.checker.solver_calls() - calls0,
        seconds: started.elapsed().as_secs_f64(),
    };
    Ok(SynthResult { pre, hom, stats, verdict })
}

#[cfg(test)]
mod tests;
