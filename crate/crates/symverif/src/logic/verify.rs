//! Syntax-directed proof search over the rule set.

use super::post::{build_post, injectivity_check, invert_assignment};
use super::{LogicError, ProofNode, ProofTrace, Rule, SymmetryTriple, UnknownReason, Verdict};
use crate::group::{
    check_action, entails, hom_check, hom_compose, lift, word_is_identity, Certificate, GroupAction, GroupContext,
    GroupError, GroupPresentation, HomKind, Homomorphism, ProductKind, Word, DEFAULT_MAX_ELEMS,
};
use crate::lang::{modified_vars, Command, LoopOperand, ProgramExpr, StmtPath, VarTable};
use crate::smt::{encode_sem_assign, extract_hom, Checker, EncodeError, ObligationKind, Outcome, SolverConfig};
use num_traits::{Signed, ToPrimitive, Zero};
use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub solver: SolverConfig,
    pub max_elems: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { solver: SolverConfig::default(), max_elems: DEFAULT_MAX_ELEMS }
    }
}

/// Solver, enumeration cache and variable table for one run.
pub struct Verifier {
    pub vars: VarTable,
    pub checker: Checker,
    pub ctx: GroupContext,
    fresh: Cell<usize>,
}

/// Verifies a triple with a fresh [`Verifier`].
pub fn verify(t: &SymmetryTriple, vars: &VarTable, cfg: &VerifyConfig) -> Verdict {
    Verifier::new(vars, cfg).verify(t)
}

#[derive(Debug)]
enum Failure {
    Invalid { rule: Rule, path: String, obligation: String, counterexample: String },
    Unknown { reason: UnknownReason, path: String, detail: String },
}

impl Failure {
    fn into_verdict(self) -> Verdict {
        match self {
            Failure::Invalid { rule, path, obligation, counterexample } => {
                Verdict::Invalid { rule, path, obligation, counterexample }
            }
            Failure::Unknown { reason, path, detail } => Verdict::Unknown { reason, path, detail },
        }
    }

    fn unsupported(path: &str, detail: impl Into<String>) -> Failure {
        Failure::Unknown { reason: UnknownReason::UnsupportedConstruct, path: path.to_string(), detail: detail.into() }
    }

    fn undecided(path: &str, detail: &str) -> Failure {
        let reason = if detail.contains("timeout") { UnknownReason::Timeout } else { UnknownReason::UnsupportedConstruct };
        Failure::Unknown { reason, path: path.to_string(), detail: detail.to_string() }
    }

    fn from_group(rule: Rule, path: &str, e: GroupError) -> Failure {
        let msg = e.to_string();
        match e {
            GroupError::NotAnAction { counterexample, .. } | GroupError::NotEntailed { counterexample, .. } => {
                Failure::Invalid {
                    rule,
                    path: path.to_string(),
                    obligation: msg,
                    counterexample: counterexample.unwrap_or_else(|| "relation check failed".into()),
                }
            }
            GroupError::NotAHomomorphism { .. } => Failure::Invalid {
                rule,
                path: path.to_string(),
                obligation: msg,
                counterexample: "relation check failed".into(),
            },
            GroupError::Undecided { reason, .. } => Failure::undecided(path, &format!("{}: {}", msg, reason)),
            _ => Failure::unsupported(path, msg),
        }
    }

    fn from_logic(rule: Rule, path: &str, e: LogicError) -> Failure {
        match e {
            LogicError::Group(g) => Failure::from_group(rule, path, g),
            LogicError::Encode(EncodeError::Group(g)) => Failure::from_group(rule, path, g),
            other => Failure::unsupported(path, other.to_string()),
        }
    }
}

struct Derived {
    action: GroupAction,
    /// From the statement's pre-condition group to `action.group`.
    hom: Homomorphism,
    node: ProofNode,
}

fn eq_hom(g: &GroupPresentation) -> Homomorphism {
    let images = g.generators.iter().map(|x| (x.clone(), Word::gen(x))).collect();
    let mut h = Homomorphism::new("eq", g.clone(), g.clone(), images).expect("identity images");
    h.kind = HomKind::Eq;
    h
}

fn estar(g: &GroupPresentation) -> Homomorphism {
    let mut h = Homomorphism::new("e*", g.clone(), GroupPresentation::trivial(), BTreeMap::new()).expect("trivial");
    h.kind = HomKind::EStar;
    h
}

/// Variables moved by some generator, together with the variables their
/// images read.
fn support(a: &GroupAction) -> BTreeSet<String> {
    let mut s = BTreeSet::new();
    for m in a.gens.values() {
        for (u, e) in m {
            if e.as_var() != Some(u.as_str()) {
                s.insert(u.clone());
                s.extend(e.free_vars());
            }
        }
    }
    s
}

fn short(c: &Command) -> String {
    let text = c.to_string();
    let first = text.lines().next().unwrap_or("").trim();
    let mut s: String = first.chars().take(60).collect();
    if first.chars().count() > 60 || text.lines().count() > 1 {
        s.push_str(" …");
    }
    s
}

fn judgment(pre: &GroupAction, c: &Command, post: &GroupAction, hom: &Homomorphism) -> String {
    format!("⦅{}⦆ {} ⦅{}⦆ {}", pre.name, short(c), post.name, hom.name)
}

fn compose(outer: &Homomorphism, inner: &Homomorphism) -> Homomorphism {
    if inner.is_identity_map() && inner.source.same_group(&inner.target) {
        return outer.clone();
    }
    if outer.is_identity_map() && outer.source.same_group(&outer.target) {
        return inner.clone();
    }
    let mut h = hom_compose(outer, inner).expect("composable by construction");
    if h.is_identity_map() && h.source.same_group(&h.target) {
        return eq_hom(&h.source);
    }
    if h.name.chars().count() > 24 {
        h.name = "φ".to_string();
    }
    h
}

/// Generator-wise equality of two homomorphisms with the same target.
fn same_images(a: &Homomorphism, b: &Homomorphism, ctx: &GroupContext) -> bool {
    a.source.generators.iter().all(|g| {
        let w = a.image(&Word::gen(g)).inverse().mul(&b.image(&Word::gen(g)));
        w.is_identity() || word_is_identity(&a.target, &w, ctx) == Some(true)
    })
}

impl Verifier {
    pub fn new(vars: &VarTable, cfg: &VerifyConfig) -> Self {
        Verifier {
            vars: vars.clone(),
            checker: Checker::new(vars, cfg.solver.clone()),
            ctx: GroupContext::new(cfg.max_elems),
            fresh: Cell::new(0),
        }
    }

    fn fresh_name(&self) -> String {
        let k = self.fresh.get() + 1;
        self.fresh.set(k);
        format!("P{}", k)
    }

    fn all_vars(&self, t: &SymmetryTriple) -> BTreeSet<String> {
        let mut all: BTreeSet<String> = self.vars.keys().cloned().collect();
        all.extend(t.pre.vars.iter().cloned());
        all.extend(t.post.vars.iter().cloned());
        all.extend(modified_vars(&t.program));
        all.extend(t.program.read_vars());
        all
    }

    pub fn verify(&self, t: &SymmetryTriple) -> Verdict {
        match self.verify_triple(t) {
            Ok(root) => Verdict::Valid(ProofTrace { root, obligations: self.checker.records() }),
            Err(f) => f.into_verdict(),
        }
    }

    fn certify(&self, t: &SymmetryTriple) -> Result<Vec<String>, Failure> {
        let mut side = Vec::new();
        let mut push = |c: Certificate| side.push(format!("{} ({} checks)", c.subject, c.entries.len()));
        self.checker.set_context("CERTIFY", "<root>");
        for a in [&t.pre, &t.post] {
            push(check_action(a, &self.checker, &self.ctx).map_err(|e| Failure::from_group(Rule::Lift, "<root>", e))?);
        }
        push(hom_check(&t.hom, &self.ctx).map_err(|e| Failure::from_group(Rule::Cons1, "<root>", e))?);
        Ok(side)
    }

    fn verify_triple(&self, t: &SymmetryTriple) -> Result<ProofNode, Failure> {
        let side = self.certify(t)?;
        if let Some(node) = self.try_free_product(t)? {
            return Ok(node);
        }
        let all = self.all_vars(t);
        let lifted = lift(&t.pre, &all);
        let d = match self.derive_block(t, &t.program, &StmtPath::root(), &lifted) {
            Ok(d) => d,
            Err(f) => match &t.program {
                Command::Assign(x, e) if t.annotations.is_empty() => {
                    return self.direct_sem_assign(t, x, e, &lifted, side).map_err(|g| match g {
                        Failure::Unknown { .. } => f,
                        g => g,
                    })
                }
                _ => return Err(f),
            },
        };
        let mut lift_node = ProofNode::new(Rule::Lift, "<root>", judgment(&lifted, &t.program, &d.action, &d.hom));
        lift_node.side.push(format!("{} lifted to {} variables", t.pre.name, all.len()));
        lift_node.children.push(d.node);
        let d = Derived { action: d.action, hom: d.hom, node: lift_node };
        let mut root = self.close(t, d, &t.post, &t.hom, "<root>")?;
        root.side.splice(0..0, side);
        Ok(root)
    }

    /// A single assignment checked against the declared post-condition
    /// and homomorphism in one SEM-ASSGN obligation.
    fn direct_sem_assign(
        &self,
        t: &SymmetryTriple,
        x: &str,
        e: &ProgramExpr,
        lifted: &GroupAction,
        side: Vec<String>,
    ) -> Result<ProofNode, Failure> {
        let shown = "0";
        self.checker.set_context("SEM-ASSGN", shown);
        let enc = encode_sem_assign(lifted, x, e, &t.post, Some(&t.hom), &self.checker, &self.ctx)
            .map_err(|err| Failure::from_logic(Rule::SemAssgn, shown, err.into()))?;
        let label = enc.label.clone();
        self.outcome(Rule::SemAssgn, shown, &label, enc.discharge(&self.checker))?;
        let mut node = ProofNode::new(Rule::SemAssgn, shown, judgment(lifted, &t.program, &t.post, &t.hom));
        node.side.push(format!("F⦅{}⦆ valid", label));
        let mut root = ProofNode::new(Rule::Lift, "<root>", judgment(&t.pre, &t.program, &t.post, &t.hom));
        root.side = side;
        root.side.push(format!("{} lifted to {} variables", t.pre.name, lifted.vars.len()));
        root.children.push(node);
        Ok(root)
    }

    /// FREE-PROD: both sides declared as free products whose homomorphism
    /// respects the factors; each factor triple is verified on its own.
    fn try_free_product(&self, t: &SymmetryTriple) -> Result<Option<ProofNode>, Failure> {
        let (Some(pf), Some(qf)) = (&t.pre.factors, &t.post.factors) else { return Ok(None) };
        let (Some(pc), Some(qc)) = (&t.pre.group.components, &t.post.group.components) else { return Ok(None) };
        if pc.kind != ProductKind::Free || qc.kind != ProductKind::Free {
            return Ok(None);
        }
        let restrict = |names: &BTreeMap<String, String>, tnames: &BTreeMap<String, String>, src, tgt| {
            let back: BTreeMap<String, String> = tnames.iter().map(|(a, b)| (b.clone(), a.clone())).collect();
            let mut images = BTreeMap::new();
            for (orig, new) in names {
                let w = t.hom.image(&Word::gen(new));
                if !w.generators().iter().all(|g| back.contains_key(g)) {
                    return None;
                }
                images.insert(orig.clone(), w.rename(&back));
            }
            Homomorphism::new(&format!("{}|", t.hom.name), src, tgt, images).ok()
        };
        let (Some(h1), Some(h2)) = (
            restrict(&pc.left_names, &qc.left_names, pc.left.clone(), qc.left.clone()),
            restrict(&pc.right_names, &qc.right_names, pc.right.clone(), qc.right.clone()),
        ) else {
            return Ok(None);
        };
        let mut node = ProofNode::new(Rule::FreeProd, "<root>", judgment(&t.pre, &t.program, &t.post, &t.hom));
        for (pre, post, h) in [(&pf.0, &qf.0, h1), (&pf.1, &qf.1, h2)] {
            let mut sub = SymmetryTriple::new(pre.clone(), t.program.clone(), post.clone(), h)
                .map_err(|e| Failure::unsupported("<root>", e.to_string()))?;
            sub.annotations = t.annotations.clone();
            sub.inverses = t.inverses.clone();
            node.children.push(self.verify_triple(&sub)?);
        }
        Ok(Some(node))
    }

    /// CONS-1 from the derived post-condition into `post` with a τ such
    /// that `τ ∘ derived = hom`; DIR-PROD when `post` is a direct product
    /// on disjoint variables.
    fn close(
        &self,
        t: &SymmetryTriple,
        d: Derived,
        post: &GroupAction,
        hom: &Homomorphism,
        path: &str,
    ) -> Result<ProofNode, Failure> {
        let tau = self.consequence_hom(&d, post, hom, path)?;
        if let (Some(f), Some(c)) = (&post.factors, &post.group.components) {
            let disjoint = f.0.vars.iter().all(|v| !f.1.vars.contains(v));
            if c.kind == ProductKind::Direct && disjoint {
                let mut node = ProofNode::new(Rule::DirProd, path, judgment(&t.pre, &t.program, post, hom));
                for (factor, kind) in [(&f.0, HomKind::Proj1), (&f.1, HomKind::Proj2)] {
                    let proj = crate::group::builtin_hom(kind, &post.group, &factor.group, &self.ctx)
                        .map_err(|e| Failure::from_group(Rule::DirProd, path, e))?;
                    let tau_i = compose(&proj, &tau);
                    let h_i = compose(&proj, hom);
                    let child = Derived { action: d.action.clone(), hom: d.hom.clone(), node: d.node.clone() };
                    node.children.push(self.cons1(child, factor, &tau_i, &h_i, &t.program, path)?);
                }
                return Ok(node);
            }
        }
        self.cons1(d, post, &tau, hom, &t.program, path)
    }

    fn consequence_hom(
        &self,
        d: &Derived,
        post: &GroupAction,
        hom: &Homomorphism,
        path: &str,
    ) -> Result<Homomorphism, Failure> {
        let src = &d.action.group;
        if post.group.generators.is_empty() {
            let mut h = estar(src);
            h.target = post.group.clone();
            return Ok(h);
        }
        if d.hom.is_identity_map() && src.same_group(&hom.source) {
            return Ok(hom.clone());
        }
        if src.same_group(&post.group) && same_images(&d.hom, hom, &self.ctx) {
            return Ok(eq_hom(src));
        }
        Err(Failure::unsupported(
            path,
            format!("no consequence homomorphism from {} relates {} to {}", src.name, d.hom.name, hom.name),
        ))
    }

    fn cons1(
        &self,
        d: Derived,
        post: &GroupAction,
        tau: &Homomorphism,
        hom: &Homomorphism,
        c: &Command,
        path: &str,
    ) -> Result<ProofNode, Failure> {
        self.checker.set_context("CONS-1", path);
        let cert = entails(&d.action, post, tau, &self.checker, &self.ctx)
            .map_err(|e| Failure::from_group(Rule::Cons1, path, e))?;
        let composite = compose(tau, &d.hom);
        if !same_images(&composite, hom, &self.ctx) {
            return Err(Failure::unsupported(
                path,
                format!("{} ∘ {} differs from {} on generators", tau.name, d.hom.name, hom.name),
            ));
        }
        let mut node = ProofNode::new(Rule::Cons1, path, format!("⦅…⦆ {} ⦅{}⦆ {}", short(c), post.name, hom.name));
        node.side.push(format!("{} ({} checks)", cert.subject, cert.entries.len()));
        node.children.push(d.node);
        Ok(node)
    }

    fn display_path(&self, t: &SymmetryTriple, p: &StmtPath) -> String {
        p.display_for(&t.program)
    }

    fn derive_block(
        &self,
        t: &SymmetryTriple,
        c: &Command,
        prefix: &StmtPath,
        pre: &GroupAction,
    ) -> Result<Derived, Failure> {
        let stmts = c.statements();
        if stmts.len() == 1 && !prefix.0.is_empty() {
            return self.derive_stmt(t, stmts[0], &prefix.child("0"), pre);
        }
        let mut cur = pre.clone();
        let mut hom = eq_hom(&pre.group);
        let mut children = Vec::new();
        for (i, s) in stmts.iter().enumerate() {
            let d = self.derive_stmt(t, s, &prefix.child(i.to_string()), &cur)?;
            hom = compose(&d.hom, &hom);
            cur = d.action;
            children.push(d.node);
        }
        if children.len() == 1 {
            let node = children.pop().unwrap();
            return Ok(Derived { action: cur, hom, node });
        }
        let shown = if prefix.0.is_empty() { "<root>".to_string() } else { self.display_path(t, prefix) };
        let mut node = ProofNode::new(Rule::Seq, &shown, judgment(pre, c, &cur, &hom));
        node.children = children;
        Ok(Derived { action: cur, hom, node })
    }

    fn derive_stmt(
        &self,
        t: &SymmetryTriple,
        c: &Command,
        path: &StmtPath,
        pre: &GroupAction,
    ) -> Result<Derived, Failure> {
        let shown = self.display_path(t, path);
        let annotation = t.annotations.get(path);
        if let (Command::Assign(x, e), Some((act, h))) = (c, annotation) {
            return self.sem_assign_annotated(x, e, act, h, &shown, pre);
        }
        let d = self.derive_plain(t, c, path, &shown, pre)?;
        match annotation {
            Some((act, h)) => {
                let lifted = lift(act, &pre.var_set());
                let tau = self.consequence_hom(&d, &lifted, h, &shown)?;
                let node = self.cons1(d, &lifted, &tau, h, c, &shown)?;
                Ok(Derived { action: lifted, hom: h.clone(), node })
            }
            None => Ok(d),
        }
    }

    fn derive_plain(
        &self,
        t: &SymmetryTriple,
        c: &Command,
        path: &StmtPath,
        shown: &str,
        pre: &GroupAction,
    ) -> Result<Derived, Failure> {
        let mut touched = modified_vars(c);
        touched.extend(c.read_vars());
        let sup = support(pre);
        // injective assignments go through ASSGN even when the action ignores them
        let assgn_applies = match c {
            Command::Assign(x, e) => injectivity_check(e, x, &self.checker),
            _ => false,
        };
        if !matches!(c, Command::Skip | Command::Seq(..)) && !assgn_applies && touched.iter().all(|v| !sup.contains(v)) {
            let hom = eq_hom(&pre.group);
            let mut node = ProofNode::new(Rule::Const, shown, judgment(pre, c, pre, &hom));
            node.side.push("no variable moved or read by the action is touched; LIFT to Vars".into());
            return Ok(Derived { action: pre.clone(), hom, node });
        }
        match c {
            Command::Skip => {
                let hom = eq_hom(&pre.group);
                let node = ProofNode::new(Rule::Skip, shown, judgment(pre, c, pre, &hom));
                Ok(Derived { action: pre.clone(), hom, node })
            }
            Command::Seq(..) => self.derive_block(t, c, path, pre),
            Command::Assign(x, e) => self.derive_assign(t, x, e, path, shown, pre),
            Command::If(x, a, b) => self.derive_if(t, c, x, a, b, path, shown, pre),
            Command::For { counter, bound, step, body } => {
                self.derive_for(t, c, counter, bound, step, body, path, shown, pre)
            }
            Command::While(x, body) => self.derive_while(t, c, x, body, path, shown, pre),
        }
    }

    fn sem_assign_annotated(
        &self,
        x: &str,
        e: &ProgramExpr,
        act: &GroupAction,
        h: &Homomorphism,
        shown: &str,
        pre: &GroupAction,
    ) -> Result<Derived, Failure> {
        self.checker.set_context("SEM-ASSGN", shown);
        if !h.source.same_group(&pre.group) {
            return Err(Failure::unsupported(
                shown,
                format!("annotation homomorphism {} starts at {}, not {}", h.name, h.source.name, pre.group.name),
            ));
        }
        let cert = check_action(act, &self.checker, &self.ctx).map_err(|e| Failure::from_group(Rule::SemAssgn, shown, e))?;
        hom_check(h, &self.ctx).map_err(|e| Failure::from_group(Rule::SemAssgn, shown, e))?;
        let post = lift(act, &pre.var_set());
        let c = Command::Assign(x.to_string(), e.clone());
        let enc = encode_sem_assign(pre, x, e, &post, Some(h), &self.checker, &self.ctx)
            .map_err(|err| Failure::from_logic(Rule::SemAssgn, shown, err.into()))?;
        let label = enc.label.clone();
        self.outcome(Rule::SemAssgn, shown, &label, enc.discharge(&self.checker))?;
        let mut node = ProofNode::new(Rule::SemAssgn, shown, judgment(pre, &c, &post, h));
        node.side.push(format!("annotation certified: {} ({} checks)", cert.subject, cert.entries.len()));
        node.side.push(format!("F⦅{}⦆ valid", label));
        Ok(Derived { action: post, hom: h.clone(), node })
    }

    fn outcome(&self, rule: Rule, path: &str, label: &str, o: Outcome) -> Result<(), Failure> {
        match o {
            Outcome::Proved(_) => Ok(()),
            Outcome::Refuted(c) => Err(Failure::Invalid {
                rule,
                path: path.to_string(),
                obligation: label.to_string(),
                counterexample: c.to_string(),
            }),
            Outcome::Unknown(r) => Err(Failure::undecided(path, &format!("{}: {}", label, r))),
        }
    }

    fn derive_assign(
        &self,
        t: &SymmetryTriple,
        x: &str,
        e: &ProgramExpr,
        path: &StmtPath,
        shown: &str,
        pre: &GroupAction,
    ) -> Result<Derived, Failure> {
        let c = Command::Assign(x.to_string(), e.clone());
        self.checker.set_context("ASSGN", shown);
        let user_inverse = t.inverses.get(path);
        let injective = injectivity_check(e, x, &self.checker);
        if injective || user_inverse.is_some() {
            match invert_assignment(e, x, user_inverse, &self.checker) {
                Ok(inv) => return self.assign_via_post(x, e, &inv, shown, pre, &c),
                Err(LogicError::InverseUnverified { reason, .. }) if user_inverse.is_some() => {
                    return Err(Failure::Invalid {
                        rule: Rule::Assgn,
                        path: shown.to_string(),
                        obligation: format!("inverse annotation for {}", x),
                        counterexample: reason,
                    })
                }
                Err(_) => {}
            }
        }
        // SEM-ASSGN with the pre-condition as post-condition and eq
        self.checker.set_context("SEM-ASSGN", shown);
        let eq = eq_hom(&pre.group);
        let enc = encode_sem_assign(pre, x, e, pre, Some(&eq), &self.checker, &self.ctx)
            .map_err(|err| Failure::from_logic(Rule::SemAssgn, shown, err.into()))?;
        let first = enc.discharge(&self.checker);
        if first.is_proved() {
            let mut node = ProofNode::new(Rule::SemAssgn, shown, judgment(pre, &c, pre, &eq));
            node.side.push(format!("F⦅{}⦆ valid", enc.label));
            return Ok(Derived { action: pre.clone(), hom: eq, node });
        }
        if let Some(table) = self.ctx.table(&pre.group) {
            if table.size() > 1 {
                let all = encode_sem_assign(pre, x, e, pre, None, &self.checker, &self.ctx)
                    .map_err(|err| Failure::from_logic(Rule::SemAssgn, shown, err.into()))?;
                if let Ok(tau) = extract_hom(&all, &self.checker, &self.ctx) {
                    let mut node = ProofNode::new(Rule::SemAssgn, shown, judgment(pre, &c, pre, &tau));
                    node.side.push(format!("F⦅{}⦆ valid with extracted {}", all.label, tau));
                    return Ok(Derived { action: pre.clone(), hom: tau, node });
                }
            }
        }
        match first {
            Outcome::Refuted(cex) => Err(Failure::Invalid {
                rule: Rule::SemAssgn,
                path: shown.to_string(),
                obligation: enc.label,
                counterexample: cex.to_string(),
            }),
            Outcome::Unknown(r) if r.contains("timeout") => Err(Failure::undecided(shown, &r)),
            _ => Err(Failure::Unknown {
                reason: UnknownReason::MissingAnnotation,
                path: shown.to_string(),
                detail: format!("{} := {} is not invertible and needs an intermediate annotation", x, e),
            }),
        }
    }

    /// ASSGN through POST; when the transformed maps agree with the
    /// pre-condition's, the pre-condition is kept (CONS-1 with eq).
    fn assign_via_post(
        &self,
        x: &str,
        e: &ProgramExpr,
        inv: &crate::expr::SymbolicExpr,
        shown: &str,
        pre: &GroupAction,
        c: &Command,
    ) -> Result<Derived, Failure> {
        let name = self.fresh_name();
        let (post, unchanged) =
            build_post(pre, x, e, inv, &self.checker, &name).map_err(|err| Failure::from_logic(Rule::Assgn, shown, err))?;
        let eq = eq_hom(&pre.group);
        let mut node = ProofNode::new(Rule::Assgn, shown, judgment(pre, c, &post, &eq));
        node.side.push(format!("{} injective, inverse {}", x, inv));
        if unchanged {
            node.judgment = judgment(pre, c, pre, &eq);
            node.side.push(format!("POST({}) has the same generator maps", pre.name));
            return Ok(Derived { action: pre.clone(), hom: eq, node });
        }
        if self.maps_agree(&post, pre) {
            let mut cons = ProofNode::new(Rule::Cons1, shown, judgment(pre, c, pre, &eq));
            cons.side.push(format!("{} entails {} via eq", post.name, pre.name));
            cons.children.push(node);
            return Ok(Derived { action: pre.clone(), hom: eq, node: cons });
        }
        check_action(&post, &self.checker, &self.ctx).map_err(|err| Failure::from_group(Rule::Assgn, shown, err))?;
        node.side.push(format!("{} is an action of {}", post.name, post.group.name));
        Ok(Derived { action: post, hom: eq, node })
    }

    fn maps_agree(&self, a: &GroupAction, b: &GroupAction) -> bool {
        a.gens.iter().all(|(g, m)| {
            m.iter().all(|(u, ex)| {
                let other = &b.gens[g][u];
                ex == other || {
                    let label = format!("{} agrees with {}: {} on {}", a.name, b.name, g, u);
                    self.checker
                        .prove_equal(ObligationKind::ExprEquality, &label, ex, other, &self.checker.domain_of(u))
                        .is_proved()
                }
            })
        })
    }

    /// `(G, a) →^{e*} (E, e_X)`: the action fixes every variable in `xs`.
    fn fixes(&self, pre: &GroupAction, xs: &[String], rule: Rule, shown: &str) -> Result<String, Failure> {
        let target = GroupAction::identity(&format!("E_{}", xs.join("_")), GroupPresentation::trivial(), xs.to_vec());
        self.checker.set_context(rule.name(), shown);
        let cert = entails(pre, &target, &estar(&pre.group), &self.checker, &self.ctx)
            .map_err(|e| Failure::from_group(rule, shown, e))?;
        Ok(format!("{} →e* (E, e_{{{}}}) ({} checks)", pre.name, xs.join(", "), cert.entries.len()))
    }

    /// Brings a derivation back to `pre` with eq when its post-condition
    /// differs.
    fn back_to(&self, d: Derived, pre: &GroupAction, c: &Command, shown: &str, rule: Rule) -> Result<Derived, Failure> {
        if d.action.gens == pre.gens && d.action.group.same_group(&pre.group) {
            return Ok(Derived { action: pre.clone(), hom: d.hom, node: d.node });
        }
        if !d.action.group.same_group(&pre.group) {
            return Err(Failure::unsupported(
                shown,
                format!("{} needs the body to preserve {}, but it derives an action of {}", rule, pre.name, d.action.group.name),
            ));
        }
        let eq = eq_hom(&pre.group);
        let hom = d.hom.clone();
        let node = self.cons1(d, pre, &eq, &hom, c, shown)?;
        Ok(Derived { action: pre.clone(), hom, node })
    }

    #[allow(clippy::too_many_arguments)]
    fn derive_if(
        &self,
        t: &SymmetryTriple,
        c: &Command,
        x: &str,
        a: &Command,
        b: &Command,
        path: &StmtPath,
        shown: &str,
        pre: &GroupAction,
    ) -> Result<Derived, Failure> {
        let guard = self.fixes(pre, &[x.to_string()], Rule::If, shown)?;
        let da = self.derive_block(t, a, &path.child("then"), pre)?;
        let db = self.derive_block(t, b, &path.child("else"), pre)?;
        let same_post = da.action.group.same_group(&db.action.group) && da.action.gens == db.action.gens;
        let (da, db) = if same_post && da.hom.images == db.hom.images {
            (da, db)
        } else {
            (self.back_to(da, pre, a, shown, Rule::If)?, self.back_to(db, pre, b, shown, Rule::If)?)
        };
        if !same_images(&da.hom, &db.hom, &self.ctx) {
            return Err(Failure::unsupported(shown, "the branches derive different homomorphisms"));
        }
        let mut node = ProofNode::new(Rule::If, shown, judgment(pre, c, &da.action, &da.hom));
        node.side.push(guard);
        node.children.push(da.node);
        node.children.push(db.node);
        Ok(Derived { action: da.action, hom: da.hom, node })
    }

    #[allow(clippy::too_many_arguments)]
    fn derive_for(
        &self,
        t: &SymmetryTriple,
        c: &Command,
        counter: &str,
        bound: &LoopOperand,
        step: &LoopOperand,
        body: &Command,
        path: &StmtPath,
        shown: &str,
        pre: &GroupAction,
    ) -> Result<Derived, Failure> {
        let mut fixed = vec![counter.to_string()];
        for op in [bound, step] {
            if let LoopOperand::Var(v) = op {
                fixed.push(v.clone());
            }
        }
        let loop_vars = self.fixes(pre, &fixed, Rule::For, shown)?;
        let d = self.derive_block(t, body, &path.child("body"), pre)?;
        let d = self.back_to(d, pre, body, shown, Rule::For)?;
        let phi = d.hom.clone();
        let power = match (bound, step) {
            (LoopOperand::Lit(b), LoopOperand::Lit(s)) if s.is_positive() => {
                let n = if b.is_positive() { (b / s).ceil().to_integer() } else { Zero::zero() };
                n.to_u64().map(|n| (n, crate::group::hom_power(&phi, n)))
            }
            _ => None,
        };
        let hom = match power {
            Some((_, Ok(h))) if h.is_identity_map() && h.source.same_group(&h.target) => eq_hom(&pre.group),
            Some((_, Ok(h))) => h,
            _ => {
                let sq = compose(&phi, &phi);
                if !same_images(&sq, &phi, &self.ctx) {
                    return Err(Failure::unsupported(
                        shown,
                        format!("loop bound is symbolic and {} is not idempotent", phi.name),
                    ));
                }
                phi.clone()
            }
        };
        let mut node = ProofNode::new(Rule::For, shown, judgment(pre, c, pre, &hom));
        node.side.push(loop_vars);
        node.side.push(format!("VARS(C) ⊆ V: {} acts on all {} variables", pre.name, pre.vars.len()));
        node.side.push(format!("hom power resolved: {}", hom.name));
        node.children.push(d.node);
        Ok(Derived { action: pre.clone(), hom, node })
    }

    #[allow(clippy::too_many_arguments)]
    fn derive_while(
        &self,
        t: &SymmetryTriple,
        c: &Command,
        x: &str,
        body: &Command,
        path: &StmtPath,
        shown: &str,
        pre: &GroupAction,
    ) -> Result<Derived, Failure> {
        let guard = self.fixes(pre, &[x.to_string()], Rule::While, shown)?;
        let d = self.derive_block(t, body, &path.child("body"), pre)?;
        let d = self.back_to(d, pre, body, shown, Rule::While)?;
        if !(d.hom.is_identity_map() && d.hom.source.same_group(&d.hom.target)) {
            return Err(Failure::unsupported(shown, format!("WHILE needs the body homomorphism eq, found {}", d.hom.name)));
        }
        let eq = eq_hom(&pre.group);
        let mut node = ProofNode::new(Rule::While, shown, judgment(pre, c, pre, &eq));
        node.side.push(guard);
        node.side.push(format!("VARS(C) ⊆ V: {} acts on all {} variables", pre.name, pre.vars.len()));
        node.children.push(d.node);
        Ok(Derived { action: pre.clone(), hom: eq, node })
    }
}
