//! Group actions on program states: generator maps, word application,
//! validity, lifting, products and entailment.

use super::{
    hom_check, Certificate, GroupContext, GroupError, GroupPresentation, Homomorphism, ProductKind, Word,
};
use crate::expr::{affine_in, eval, simplify, ConcState, Node, Op, SymState, SymbolicExpr};
use crate::lang::{store_value, Domain, VarTable};
use crate::smt::{Checker, ObligationKind, Outcome};
use std::collections::{BTreeMap, BTreeSet};

/// Per-variable target expressions over the logical variables named after
/// the acted-on program variables.
pub type SymMap = BTreeMap<String, SymbolicExpr>;

#[derive(Clone, Debug, PartialEq)]
pub struct GroupAction {
    pub name: String,
    pub group: GroupPresentation,
    pub vars: Vec<String>,
    pub gens: BTreeMap<String, SymMap>,
    /// Declared, never verified.
    pub faithful: bool,
    /// Symbolic inverses of affine generator maps.
    inverses: BTreeMap<String, SymMap>,
    /// Factor actions when built as a product.
    pub factors: Option<Box<(GroupAction, GroupAction)>>,
}

fn identity_map(vars: &[String]) -> SymMap {
    vars.iter().map(|v| (v.clone(), SymbolicExpr::var(v.clone()))).collect()
}

/// `outer ∘ inner`: first `inner`, then `outer`.
fn compose(outer: &SymMap, inner: &SymMap) -> SymMap {
    outer.iter().map(|(v, e)| (v.clone(), simplify(&e.substitute(inner)))).collect()
}

fn power(m: &SymMap, vars: &[String], k: u64) -> SymMap {
    let mut result = identity_map(vars);
    let mut base = m.clone();
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            result = compose(&result, &base);
        }
        k >>= 1;
        if k > 0 {
            base = compose(&base, &base);
        }
    }
    result
}

fn strip_mod(e: &SymbolicExpr) -> (SymbolicExpr, Option<SymbolicExpr>) {
    if let Node::Apply(Op::Mod, args) = e.node() {
        if args[1].as_rational().is_some() {
            return (args[0].clone(), Some(args[1].clone()));
        }
    }
    (e.clone(), None)
}

fn nonzero_constant(e: &SymbolicExpr) -> bool {
    if !e.free_vars().is_empty() {
        return false;
    }
    match eval(e, &BTreeMap::new()) {
        Ok(v) => !v.approx_eq(&crate::expr::Scalar::int(0), 1e-12),
        Err(_) => false,
    }
}

fn mod_equal(a: &SymbolicExpr, b: &SymbolicExpr, n: Option<&SymbolicExpr>) -> bool {
    let d = simplify(&(a.clone() - b.clone()));
    d.is_zero_literal() || n.is_some_and(|n| simplify(&SymbolicExpr::modulo(d, n.clone())).is_zero_literal())
}

/// Laplace expansion; fine for the few variables a generator moves.
fn determinant(m: &[Vec<SymbolicExpr>]) -> SymbolicExpr {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = SymbolicExpr::zero();
    for j in 0..n {
        if m[0][j].is_zero_literal() {
            continue;
        }
        let term = m[0][j].clone() * determinant(&minor(m, 0, j));
        acc = if j % 2 == 0 { acc + term } else { acc - term };
    }
    simplify(&acc)
}

fn minor(m: &[Vec<SymbolicExpr>], r: usize, c: usize) -> Vec<Vec<SymbolicExpr>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != r)
        .map(|(_, row)| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, x)| x.clone()).collect())
        .collect()
}

/// `1/d` for a nonzero closed constant, rationalized when `d²` is rational.
fn reciprocal(d: &SymbolicExpr) -> Option<SymbolicExpr> {
    if !nonzero_constant(d) {
        return None;
    }
    if let Some(q) = d.as_rational() {
        return Some(SymbolicExpr::rat(num_traits::Inv::inv(q)));
    }
    let sq = simplify(&(d.clone() * d.clone()));
    Some(match sq.as_rational() {
        Some(q) => simplify(&(d.clone() * SymbolicExpr::rat(num_traits::Inv::inv(q)))),
        None => SymbolicExpr::one() / d.clone(),
    })
}

const ADJUGATE_MAX: usize = 6;

/// Inverse of a matrix of closed constants: adjugate over determinant for
/// small sizes, Gauss-Jordan otherwise.
fn matrix_inverse(m: Vec<Vec<SymbolicExpr>>) -> Option<Vec<Vec<SymbolicExpr>>> {
    let n = m.len();
    if n <= ADJUGATE_MAX {
        let rd = reciprocal(&determinant(&m))?;
        return Some(
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let cof = if n == 1 { SymbolicExpr::one() } else { determinant(&minor(&m, j, i)) };
                            let cof = if (i + j) % 2 == 0 { cof } else { -cof };
                            simplify(&(cof * rd.clone()))
                        })
                        .collect()
                })
                .collect(),
        );
    }
    let mut aug: Vec<Vec<SymbolicExpr>> = m
        .into_iter()
        .enumerate()
        .map(|(i, mut row)| {
            row.extend((0..n).map(|j| if i == j { SymbolicExpr::one() } else { SymbolicExpr::zero() }));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| nonzero_constant(&aug[r][col]))?;
        aug.swap(col, piv);
        let p = reciprocal(&aug[col][col])?;
        aug[col] = aug[col].iter().map(|x| simplify(&(x.clone() * p.clone()))).collect();
        for r in 0..n {
            if r == col || aug[r][col].is_zero_literal() {
                continue;
            }
            let f = aug[r][col].clone();
            let pivot_row = aug[col].clone();
            aug[r] = aug[r].iter().zip(&pivot_row).map(|(x, y)| simplify(&(x.clone() - f.clone() * y.clone()))).collect();
        }
    }
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Inverse of a generator map whose moved variables transform affinely
/// with constant coefficients (targets may be reduced `mod n`).
fn affine_inverse(map: &SymMap) -> Option<SymMap> {
    let moved: Vec<String> = map.iter().filter(|(v, e)| e.as_var() != Some(v.as_str())).map(|(v, _)| v.clone()).collect();
    let mut inv: SymMap = map.keys().map(|v| (v.clone(), SymbolicExpr::var(v.clone()))).collect();
    if moved.is_empty() {
        return Some(inv);
    }
    let mut moduli = Vec::new();
    // rows: coefficients over the moved variables, then the constant part
    let mut coef: Vec<Vec<SymbolicExpr>> = Vec::new();
    let mut consts = Vec::new();
    for v in &moved {
        let (mut rest, m) = strip_mod(&map[v]);
        moduli.push(m);
        let mut row = Vec::new();
        for u in &moved {
            let (c, d) = affine_in(&rest, u)?;
            if moved.iter().any(|w| c.mentions(w)) {
                return None;
            }
            row.push(simplify(&c));
            rest = d;
        }
        if moved.iter().any(|w| rest.mentions(w)) {
            return None;
        }
        coef.push(row);
        consts.push(rest);
    }
    let cinv = matrix_inverse(coef)?;
    // α_u = Σ_v Cinv[u][v] (β_v - d_v)
    for (ui, u) in moved.iter().enumerate() {
        let mut e = SymbolicExpr::zero();
        for (vi, v) in moved.iter().enumerate() {
            let c = &cinv[ui][vi];
            if !c.is_zero_literal() {
                e = e + c.clone() * (SymbolicExpr::var(v.clone()) - consts[vi].clone());
            }
        }
        let mut e = simplify(&e);
        if let Some(m) = &moduli[ui] {
            e = SymbolicExpr::modulo(e, m.clone());
        }
        inv.insert(u.clone(), e);
    }
    // both compositions must be the identity
    for (a, b) in [(map, &inv), (&inv, map)] {
        let c = compose(a, b);
        for (i, v) in moved.iter().enumerate() {
            if !mod_equal(&c[v], &SymbolicExpr::var(v.clone()), moduli[i].as_ref()) {
                return None;
            }
        }
    }
    Some(inv)
}

impl GroupAction {
    pub fn new(
        name: &str,
        group: GroupPresentation,
        vars: Vec<String>,
        gens: BTreeMap<String, SymMap>,
        faithful: bool,
    ) -> Result<Self, GroupError> {
        let bad = |msg: String| GroupError::InvalidAction { action: name.to_string(), msg };
        let vset: BTreeSet<&String> = vars.iter().collect();
        if vset.len() != vars.len() {
            return Err(bad("duplicate variable".into()));
        }
        for g in &group.generators {
            let m = gens.get(g).ok_or_else(|| bad(format!("no equation for generator `{}`", g)))?;
            if let Some(v) = m.keys().find(|v| !vset.contains(v)) {
                return Err(bad(format!("generator `{}` maps `{}`, which is not in the variable set", g, v)));
            }
        }
        if let Some(g) = gens.keys().find(|g| !group.has_generator(g)) {
            return Err(bad(format!("`{}` is not a generator of {}", g, group.name)));
        }
        // unmentioned variables are fixed
        let gens: BTreeMap<String, SymMap> = gens
            .into_iter()
            .map(|(g, mut m)| {
                for v in &vars {
                    m.entry(v.clone()).or_insert_with(|| SymbolicExpr::var(v.clone()));
                }
                (g, m)
            })
            .collect();
        let inverses = gens.iter().filter_map(|(g, m)| affine_inverse(m).map(|i| (g.clone(), i))).collect();
        Ok(GroupAction { name: name.to_string(), group, vars, gens, faithful, inverses, factors: None })
    }

    /// The action of a group on the empty variable set... or any set, by
    /// the identity.
    pub fn identity(name: &str, group: GroupPresentation, vars: Vec<String>) -> Self {
        let gens = group.generators.iter().map(|g| (g.clone(), identity_map(&vars))).collect();
        GroupAction::new(name, group, vars, gens, false).expect("identity maps are well formed")
    }

    pub fn var_set(&self) -> BTreeSet<String> {
        self.vars.iter().cloned().collect()
    }

    /// Generator map, or its inverse when `sign < 0`.
    pub fn gen_map(&self, g: &str, sign: i64, ctx: &GroupContext) -> Result<SymMap, GroupError> {
        let m = self.gens.get(g).ok_or_else(|| GroupError::InvalidAction {
            action: self.name.clone(),
            msg: format!("unknown generator `{}`", g),
        })?;
        if sign > 0 {
            return Ok(m.clone());
        }
        if let Some(i) = self.inverses.get(g) {
            return Ok(i.clone());
        }
        // g^-1 = g^(k-1) for a generator of order k
        if let Some(t) = ctx.table(&self.group) {
            let i = self.group.generators.iter().position(|x| x == g).expect("generator");
            let k = t.order(t.generator(i, 1)) as u64;
            return Ok(power(m, &self.vars, k - 1));
        }
        Err(GroupError::NoInverse { action: self.name.clone(), generator: g.to_string() })
    }

    /// Map of a word: `a_{w1 w2} = a_{w1} ∘ a_{w2}`.
    pub fn word_map(&self, w: &Word, ctx: &GroupContext) -> Result<SymMap, GroupError> {
        let mut acc = identity_map(&self.vars);
        for (g, k) in w.syllables().iter().rev() {
            let base = self.gen_map(g, k.signum(), ctx)?;
            acc = compose(&power(&base, &self.vars, k.unsigned_abs()), &acc);
        }
        Ok(acc)
    }

    /// Applies a word to a symbolic state; variables outside V are kept.
    pub fn apply_sym(&self, w: &Word, s: &SymState, ctx: &GroupContext) -> Result<SymState, GroupError> {
        let m = self.word_map(w, ctx)?;
        let mut out = s.clone();
        for (v, e) in m {
            let r = e.substitute(s);
            out.insert(v, if e.as_var().is_some() { r } else { simplify(&r) });
        }
        Ok(out)
    }

    /// Applies a word to a concrete state letter by letter, rightmost first.
    /// Values are stored in their variable's domain.
    pub fn apply_conc(
        &self,
        w: &Word,
        s: &ConcState,
        vars: &VarTable,
        ctx: &GroupContext,
    ) -> Result<ConcState, GroupError> {
        let mut cur = s.clone();
        for (g, e) in w.letters().into_iter().rev() {
            let m = self.gen_map(g, e, ctx)?;
            let mut next = cur.clone();
            for (v, ex) in &m {
                let val = eval(ex, &cur).map_err(|err| GroupError::InvalidAction {
                    action: self.name.clone(),
                    msg: format!("evaluating `{}` for `{}`: {}", ex, v, err),
                })?;
                let val = store_value(vars, v, val).map_err(|err| GroupError::InvalidAction {
                    action: self.name.clone(),
                    msg: err.to_string(),
                })?;
                next.insert(v.clone(), val);
            }
            cur = next;
        }
        Ok(cur)
    }

    pub fn rename(&self, name: &str) -> Self {
        let mut a = self.clone();
        a.name = name.to_string();
        a
    }
}

fn domain_of(checker: &Checker, v: &str) -> Domain {
    checker.domain_of(v)
}

fn undecided(what: String, reason: String) -> GroupError {
    GroupError::Undecided { what, reason }
}

/// Proves every relation of the presentation holds under the action.
pub fn check_action(a: &GroupAction, checker: &Checker, ctx: &GroupContext) -> Result<Certificate, GroupError> {
    let mut cert = Certificate::new(format!("{} is an action of {}", a.name, a.group.name));
    for (l, r) in &a.group.relations {
        let ml = a.word_map(l, ctx)?;
        let mr = a.word_map(r, ctx)?;
        for v in &a.vars {
            let label = format!("action {}: {} = {} on {}", a.name, l, r, v);
            match checker.prove_equal(ObligationKind::ActionRelation, &label, &ml[v], &mr[v], &domain_of(checker, v)) {
                Outcome::Proved(m) => cert.push(format!("{} = {} on {} ({})", l, r, v, m)),
                Outcome::Refuted(c) => {
                    return Err(GroupError::NotAnAction {
                        action: a.name.clone(),
                        relation: format!("{} = {}", l, r),
                        variable: v.clone(),
                        lhs: ml[v].to_string(),
                        rhs: mr[v].to_string(),
                        counterexample: Some(c.to_string()),
                    })
                }
                Outcome::Unknown(reason) => return Err(undecided(label, reason)),
            }
        }
    }
    Ok(cert)
}

/// ā: the action on `all_vars`, identity outside V.
pub fn lift(a: &GroupAction, all_vars: &BTreeSet<String>) -> GroupAction {
    let mut vars = a.vars.clone();
    vars.extend(all_vars.iter().filter(|v| !a.vars.contains(v)).cloned());
    let extend = |m: &SymMap| {
        let mut m = m.clone();
        for v in &vars {
            m.entry(v.clone()).or_insert_with(|| SymbolicExpr::var(v.clone()));
        }
        m
    };
    let mut out = a.clone();
    out.gens = a.gens.iter().map(|(g, m)| (g.clone(), extend(m))).collect();
    out.inverses = a.inverses.iter().map(|(g, m)| (g.clone(), extend(m))).collect();
    out.vars = vars;
    out
}

fn combine(kind: ProductKind, a: &GroupAction, b: &GroupAction) -> GroupAction {
    let group = GroupPresentation::product(kind, &a.group, &b.group);
    let comps = group.components.as_ref().expect("product components");
    let mut vars = a.vars.clone();
    vars.extend(b.vars.iter().filter(|v| !a.vars.contains(v)).cloned());
    let all: BTreeSet<String> = vars.iter().cloned().collect();
    let la = lift(a, &all);
    let lb = lift(b, &all);
    let mut gens = BTreeMap::new();
    let mut inverses = BTreeMap::new();
    for (side, names) in [(&la, &comps.left_names), (&lb, &comps.right_names)] {
        for (g, m) in &side.gens {
            gens.insert(names[g].clone(), m.clone());
        }
        for (g, m) in &side.inverses {
            inverses.insert(names[g].clone(), m.clone());
        }
    }
    let disjoint = a.vars.iter().all(|v| !b.vars.contains(v));
    let faithful = match kind {
        ProductKind::Direct => a.faithful && b.faithful && disjoint,
        ProductKind::Free => {
            (a.group.generators.is_empty() && b.faithful) || (b.group.generators.is_empty() && a.faithful)
        }
    };
    let name = format!("{}{}{}", a.name, if kind == ProductKind::Direct { "×" } else { "*" }, b.name);
    GroupAction {
        name,
        group,
        vars,
        gens,
        faithful,
        inverses,
        factors: Some(Box::new((a.clone(), b.clone()))),
    }
}

/// Direct product of two actions. When the variable sets overlap, every
/// pair of generators must commute on all states.
pub fn direct_product(
    a: &GroupAction,
    b: &GroupAction,
    checker: &Checker,
    ctx: &GroupContext,
) -> Result<GroupAction, GroupError> {
    let p = combine(ProductKind::Direct, a, b);
    if a.vars.iter().any(|v| b.vars.contains(v)) {
        let all = p.var_set();
        let (la, lb) = (lift(a, &all), lift(b, &all));
        for g in &a.group.generators {
            for h in &b.group.generators {
                let ag = la.gen_map(g, 1, ctx)?;
                let bh = lb.gen_map(h, 1, ctx)?;
                let gh = compose(&ag, &bh);
                let hg = compose(&bh, &ag);
                for v in &p.vars {
                    let label = format!("commutation {} {} on {}", g, h, v);
                    if !checker
                        .prove_equal(ObligationKind::ActionRelation, &label, &gh[v], &hg[v], &domain_of(checker, v))
                        .is_proved()
                    {
                        return Err(GroupError::NonCommutingActions {
                            g: g.clone(),
                            h: h.clone(),
                            variable: v.clone(),
                        });
                    }
                }
            }
        }
    }
    Ok(p)
}

/// Free product of two actions; words act by interleaved composition.
pub fn free_product(a: &GroupAction, b: &GroupAction) -> GroupAction {
    combine(ProductKind::Free, a, b)
}

/// `(G, a) →φ (H, b)`: for every generator g of G and every v in b's
/// variables, `ā_g(σ)(v) = b̄_φ(g)(σ)(v)`.
///
/// The generator-only check is complete when the source's maps on b's
/// variables read only b's variables, or when b is faithful; otherwise a
/// finite source group is checked element by element.
pub fn entails(
    a: &GroupAction,
    b: &GroupAction,
    phi: &Homomorphism,
    checker: &Checker,
    ctx: &GroupContext,
) -> Result<Certificate, GroupError> {
    let missing: Vec<String> = b.vars.iter().filter(|v| !a.vars.contains(v)).cloned().collect();
    if !missing.is_empty() {
        return Err(GroupError::VarsNotSubset { missing });
    }
    if !phi.source.same_group(&a.group) || !phi.target.same_group(&b.group) {
        return Err(GroupError::DomainMismatch(format!(
            "{} maps {} to {}, but the actions are of {} and {}",
            phi.name, phi.source.name, phi.target.name, a.group.name, b.group.name
        )));
    }
    let mut cert = hom_check(phi, ctx)?;
    cert.subject = format!("{} entails {} via {}", a.name, b.name, phi.name);
    let v2 = b.var_set();
    let closed = a.group.generators.iter().all(|g| {
        b.vars.iter().all(|v| a.gens[g][v].free_vars().iter().all(|x| v2.contains(x) || !a.vars.contains(x)))
    });
    let words: Vec<Word> = if closed || b.faithful || a.group.generators.is_empty() {
        a.group.generators.iter().map(|g| Word::gen(g)).collect()
    } else if let Some(t) = ctx.table(&a.group) {
        t.elements().iter().skip(1).cloned().collect()
    } else {
        return Err(undecided(
            format!("entailment {} → {}", a.name, b.name),
            "target action is not faithful, source maps read other variables, and the source group is infinite".into(),
        ));
    };
    for w in &words {
        let ma = a.word_map(w, ctx)?;
        let img = phi.image(w);
        let mb = b.word_map(&img, ctx)?;
        for v in &b.vars {
            let label = format!("entail {} → {} via {}: {} ↦ {} on {}", a.name, b.name, phi.name, w, img, v);
            match checker.prove_equal(ObligationKind::Entailment, &label, &ma[v], &mb[v], &domain_of(checker, v)) {
                Outcome::Proved(m) => cert.push(format!("{} ↦ {} on {} ({})", w, img, v, m)),
                Outcome::Refuted(c) => {
                    return Err(GroupError::NotEntailed {
                        generator: w.to_string(),
                        variable: v.clone(),
                        counterexample: Some(c.to_string()),
                    })
                }
                Outcome::Unknown(r) => return Err(undecided(label, r)),
            }
        }
    }
    Ok(cert)
}
