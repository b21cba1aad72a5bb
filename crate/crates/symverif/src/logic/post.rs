//! Injectivity, inversion of assignments, and the POST transformer.

use super::LogicError;
use crate::expr::{affine_in, lift_program_expr, simplify, Op, Piecewise, SymbolicExpr};
use crate::group::{check_action, GroupAction, GroupContext, SymMap};
use crate::lang::{Domain, ProgramExpr};
use crate::smt::{Checker, ObligationKind, Outcome};
use std::collections::BTreeMap;

/// The right-hand side as a symbolic expression over the pre-state, wrapped
/// in `mod n` when the target is an `intmod n` variable.
pub fn assigned_expr(f: &ProgramExpr, target: &str, checker: &Checker) -> SymbolicExpr {
    wrap_domain(lift_program_expr(f), &checker.domain_of(target))
}

fn wrap_domain(e: SymbolicExpr, d: &Domain) -> SymbolicExpr {
    match d {
        Domain::IntMod(n) => SymbolicExpr::modulo(e, SymbolicExpr::int(n.clone())),
        _ => e,
    }
}

fn strip_mod(e: &SymbolicExpr, d: &Domain) -> SymbolicExpr {
    if let (Domain::IntMod(_), crate::expr::Node::Apply(Op::Mod, args)) = (d, e.node()) {
        return args[0].clone();
    }
    e.clone()
}

/// `c ≠ 0` under the domain assumptions: a nonzero literal, or proved.
fn nonzero(c: &SymbolicExpr, target: &str, checker: &Checker) -> bool {
    let c = simplify(c);
    if let Some(v) = c.as_rational() {
        return v != num_rational::BigRational::from_integer(0.into());
    }
    let body = SymbolicExpr::unary(Op::Not, SymbolicExpr::eq(c.clone(), SymbolicExpr::zero()));
    let label = format!("coefficient of {} is nonzero: {}", target, c);
    checker.prove_valid(checker.obligation(ObligationKind::Injectivity, &label, body)).is_proved()
}

/// `(c, d)` with `e = c·target + d`, `c` nonzero and free of `target`.
fn affine_parts(e: &SymbolicExpr, target: &str, checker: &Checker) -> Option<(SymbolicExpr, SymbolicExpr)> {
    let (c, d) = affine_in(e, target)?;
    if c.mentions(target) || d.mentions(target) || !nonzero(&c, target, checker) {
        return None;
    }
    Some((c, d))
}

fn piecewise_affine(e: &SymbolicExpr, target: &str, checker: &Checker) -> Option<Piecewise> {
    let pw = Piecewise::of(e);
    if pw.conditions().iter().any(|c| c.mentions(target)) {
        return None;
    }
    let k = SymbolicExpr::var(target);
    pw.map_leaves(&mut |leaf| {
        let (c, d) = affine_parts(leaf, target, checker)?;
        Some((k.clone() - d) / c)
    })
}

/// Whether `v ↦ f(v, z)` is injective for every `z`.
pub fn injectivity_check(f: &ProgramExpr, target: &str, checker: &Checker) -> bool {
    let d = checker.domain_of(target);
    let e = simplify(&strip_mod(&assigned_expr(f, target, checker), &d));
    if !e.mentions(target) {
        return false;
    }
    if affine_parts(&e, target, checker).is_some() || piecewise_affine(&e, target, checker).is_some() {
        return true;
    }
    let primed = format!("{}'", target);
    let mut m = BTreeMap::new();
    m.insert(target.to_string(), SymbolicExpr::var(primed.clone()));
    let full = assigned_expr(f, target, checker);
    let body = SymbolicExpr::binary(
        Op::Or,
        SymbolicExpr::unary(Op::Not, SymbolicExpr::eq(full.clone(), full.substitute(&m))),
        SymbolicExpr::eq(SymbolicExpr::var(target), SymbolicExpr::var(primed)),
    );
    let label = format!("{} := {} is injective", target, f);
    checker.prove_valid(checker.obligation(ObligationKind::Injectivity, &label, body)).is_proved()
}

/// `f̂` with `f̂(f(σ), …) = σ(target)`, expressed over the post-state with
/// `target` standing for the assigned value.
pub fn invert_assignment(
    f: &ProgramExpr,
    target: &str,
    annotation: Option<&SymbolicExpr>,
    checker: &Checker,
) -> Result<SymbolicExpr, LogicError> {
    let d = checker.domain_of(target);
    let full = assigned_expr(f, target, checker);
    let e = simplify(&strip_mod(&full, &d));
    let derived = affine_parts(&e, target, checker)
        .map(|(c, dd)| (SymbolicExpr::var(target) - dd) / c)
        .or_else(|| piecewise_affine(&e, target, checker).map(|p| p.to_expr()))
        .map(|x| wrap_domain(x, &d));
    let candidate = match (derived, annotation) {
        (Some(x), _) => x,
        (None, Some(a)) => a.clone(),
        (None, None) => return Err(LogicError::NoInverseFound { var: target.to_string() }),
    };
    let mut m = BTreeMap::new();
    m.insert(target.to_string(), full);
    let round = candidate.substitute(&m);
    let label = format!("inverse of {} := {}", target, f);
    match checker.prove_equal(ObligationKind::InverseIdentity, &label, &round, &SymbolicExpr::var(target), &d) {
        Outcome::Proved(_) => Ok(simplify(&candidate)),
        Outcome::Refuted(c) => {
            Err(LogicError::InverseUnverified { var: target.to_string(), reason: format!("counterexample {}", c) })
        }
        Outcome::Unknown(r) => Err(LogicError::InverseUnverified { var: target.to_string(), reason: r }),
    }
}

/// POST((G, a), v := f): per generator, `C ∘ a_g ∘ C⁻¹`. Generators that
/// neither move nor read `v` and the variables of `f` keep their map.
/// The result is re-checked as an action unless every map is unchanged.
pub fn post_transform(
    a: &GroupAction,
    target: &str,
    f: &ProgramExpr,
    inverse: &SymbolicExpr,
    checker: &Checker,
    ctx: &GroupContext,
    name: &str,
) -> Result<GroupAction, LogicError> {
    let (out, unchanged) = build_post(a, target, f, inverse, checker, name)?;
    if !unchanged {
        check_action(&out, checker, ctx)?;
    }
    Ok(out)
}

/// The POST action without the action check, and whether every generator
/// map came out unchanged.
pub(crate) fn build_post(
    a: &GroupAction,
    target: &str,
    f: &ProgramExpr,
    inverse: &SymbolicExpr,
    checker: &Checker,
    name: &str,
) -> Result<(GroupAction, bool), LogicError> {
    let fe = assigned_expr(f, target, checker);
    let mut touched = f.vars();
    touched.insert(target.to_string());
    let mut cinv: SymMap = BTreeMap::new();
    cinv.insert(target.to_string(), inverse.clone());
    let mut gens = BTreeMap::new();
    for (g, m) in &a.gens {
        let moves = touched.iter().any(|v| m.get(v).is_some_and(|e| e.as_var() != Some(v.as_str())));
        let reads = m.values().any(|e| e.mentions(target) && e.as_var() != Some(target));
        if !moves && !reads {
            gens.insert(g.clone(), m.clone());
            continue;
        }
        let moved: SymMap = m.iter().map(|(u, e)| (u.clone(), e.substitute(&cinv))).collect();
        let mut new: SymMap =
            m.iter().map(|(u, e)| (u.clone(), if e.mentions(target) { simplify(&moved[u]) } else { e.clone() })).collect();
        new.insert(target.to_string(), simplify(&fe.substitute(&moved)));
        gens.insert(g.clone(), new);
    }
    let unchanged = gens == a.gens;
    let out = GroupAction::new(name, a.group.clone(), a.vars.clone(), gens, a.faithful)?;
    Ok((out, unchanged))
}
