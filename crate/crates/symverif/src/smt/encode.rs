//! Semantic obligations of single assignments under group actions.

use super::{Checker, Obligation, ObligationKind, Outcome};
use crate::expr::{fresh_state, gamma, ExprError, SymState, SymbolicExpr};
use crate::group::{
    hom_check, GroupAction, GroupContext, GroupError, GroupPresentation, Homomorphism, Word,
};
use crate::lang::{Domain, ProgramExpr, Role, VarDecl, VarTable};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncodeError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("no element of the post-condition group witnesses generator `{0}`")]
    NoWitness(String),
    #[error("generator `{generator}` has several witnesses ({witnesses}); the post-condition action is not faithful")]
    MultipleWitnesses { generator: String, witnesses: String },
    #[error("could not decide the witness for generator `{generator}`: {reason}")]
    Undecided { generator: String, reason: String },
}

/// One equation `lhs = rhs` on a post-condition variable.
#[derive(Clone, Debug, PartialEq)]
pub struct Conjunct {
    pub var: String,
    pub domain: Domain,
    pub lhs: SymbolicExpr,
    pub rhs: SymbolicExpr,
}

impl Conjunct {
    fn body(&self) -> SymbolicExpr {
        match &self.domain {
            Domain::IntMod(n) => SymbolicExpr::eq(
                SymbolicExpr::modulo(self.lhs.clone() - self.rhs.clone(), SymbolicExpr::int(n.clone())),
                SymbolicExpr::zero(),
            ),
            _ => SymbolicExpr::eq(self.lhs.clone(), self.rhs.clone()),
        }
    }
}

/// Candidate image `h` of a pre-condition generator with its equations.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub image: Word,
    pub conjuncts: Vec<Conjunct>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorCase {
    pub generator: String,
    pub candidates: Vec<Candidate>,
}

/// `F⦅{(G,a)} v := exp {(H,b)}⦆` split by generator and candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct SemAssignEncoding {
    pub label: String,
    pub source: GroupPresentation,
    pub target: GroupPresentation,
    pub cases: Vec<GeneratorCase>,
    /// The whole formula as one obligation.
    pub obligation: Obligation,
}

fn and_all(es: impl IntoIterator<Item = SymbolicExpr>) -> SymbolicExpr {
    es.into_iter().reduce(|a, b| SymbolicExpr::binary(crate::expr::Op::And, a, b)).unwrap_or_else(SymbolicExpr::one)
}

fn or_all(es: impl IntoIterator<Item = SymbolicExpr>) -> SymbolicExpr {
    es.into_iter().reduce(|a, b| SymbolicExpr::binary(crate::expr::Op::Or, a, b)).unwrap_or_else(SymbolicExpr::zero)
}

fn candidate_body(c: &Candidate) -> SymbolicExpr {
    and_all(c.conjuncts.iter().map(Conjunct::body))
}

impl SemAssignEncoding {
    /// Proves every generator case: equations one by one for a single
    /// candidate, one disjunctive query otherwise.
    pub fn discharge(&self, checker: &Checker) -> Outcome {
        let mut last = None;
        for case in &self.cases {
            let out = match case.candidates.as_slice() {
                [c] => {
                    let mut out = None;
                    for q in &c.conjuncts {
                        let label =
                            format!("{}: {} ↦ {} on {}", self.label, case.generator, c.image, q.var);
                        let o = checker.prove_equal(ObligationKind::SemAssign, &label, &q.lhs, &q.rhs, &q.domain);
                        if !o.is_proved() {
                            return o;
                        }
                        out = Some(o);
                    }
                    out
                }
                cs => {
                    let label = format!("{}: {}", self.label, case.generator);
                    let body = or_all(cs.iter().map(candidate_body));
                    let o = checker.prove_valid(checker.obligation(ObligationKind::SemAssign, &label, body));
                    if !o.is_proved() {
                        return o;
                    }
                    Some(o)
                }
            };
            if out.is_some() {
                last = out;
            }
        }
        last.unwrap_or(Outcome::Proved(super::Method::Structural))
    }
}

/// Builds the obligation for `v := exp`. Equations range over the
/// post-condition's variables; without `hom`, every element of the
/// (enumerated) post-condition group is a candidate.
#[allow(clippy::too_many_arguments)]
pub fn encode_sem_assign(
    pre: &GroupAction,
    var: &str,
    exp: &ProgramExpr,
    post: &GroupAction,
    hom: Option<&Homomorphism>,
    checker: &Checker,
    ctx: &GroupContext,
) -> Result<SemAssignEncoding, EncodeError> {
    let mut all: BTreeSet<String> = pre.var_set();
    all.extend(post.vars.iter().cloned());
    all.extend(exp.vars());
    all.insert(var.to_string());
    let sigma: SymState = fresh_state(all.iter());
    // σ'[v ↦ Γ(exp)_σ']
    let wrap = |e: SymbolicExpr| match checker.domain_of(var) {
        Domain::IntMod(n) => SymbolicExpr::modulo(e, SymbolicExpr::int(n)),
        _ => e,
    };
    let mut assigned = sigma.clone();
    assigned.insert(var.to_string(), wrap(gamma(exp, &sigma)?));
    let images: Vec<Word> = match hom {
        Some(_) => Vec::new(),
        None => {
            let t = ctx
                .table(&post.group)
                .ok_or(GroupError::BoundExceeded { group: post.group.name.clone(), bound: ctx.max_elems })?;
            t.elements().to_vec()
        }
    };
    let mut cases = Vec::new();
    for g in &pre.group.generators {
        let pre_state = pre.apply_sym(&Word::gen(g), &sigma, ctx)?;
        let lhs_v = wrap(gamma(exp, &pre_state)?);
        let candidates: Vec<Word> = match hom {
            Some(h) => vec![h.image(&Word::gen(g))],
            None => images.clone(),
        };
        let mut cs = Vec::new();
        for h in candidates {
            let post_state = post.apply_sym(&h, &assigned, ctx)?;
            let conjuncts = post
                .vars
                .iter()
                .map(|u| Conjunct {
                    var: u.clone(),
                    domain: checker.domain_of(u),
                    lhs: if u == var { lhs_v.clone() } else { pre_state[u].clone() },
                    rhs: post_state[u].clone(),
                })
                .collect();
            cs.push(Candidate { image: h, conjuncts });
        }
        cases.push(GeneratorCase { generator: g.clone(), candidates: cs });
    }
    let label = format!("{} := {} under {} / {}", var, exp_display(exp), pre.name, post.name);
    let body = and_all(cases.iter().map(|c| or_all(c.candidates.iter().map(candidate_body))));
    let obligation = checker.obligation(ObligationKind::SemAssign, &label, body);
    Ok(SemAssignEncoding { label, source: pre.group.clone(), target: post.group.clone(), cases, obligation })
}

fn exp_display(e: &ProgramExpr) -> String {
    crate::expr::lift_program_expr(e).to_string()
}

/// The homomorphism τ witnessed generator by generator: each candidate
/// is checked separately and exactly one must hold.
pub fn extract_hom(enc: &SemAssignEncoding, checker: &Checker, ctx: &GroupContext) -> Result<Homomorphism, EncodeError> {
    let mut images = BTreeMap::new();
    for case in &enc.cases {
        let mut witnesses = Vec::new();
        let mut undecided = None;
        for c in &case.candidates {
            let label = format!("{}: {} ↦ {}", enc.label, case.generator, c.image);
            match checker.prove_valid(checker.obligation(ObligationKind::SemAssign, &label, candidate_body(c))) {
                Outcome::Proved(_) => witnesses.push(c.image.clone()),
                Outcome::Refuted(_) => {}
                Outcome::Unknown(r) => undecided = Some(r),
            }
        }
        match witnesses.len() {
            1 => {
                images.insert(case.generator.clone(), witnesses.pop().unwrap());
            }
            0 => {
                return Err(match undecided {
                    Some(reason) => EncodeError::Undecided { generator: case.generator.clone(), reason },
                    None => EncodeError::NoWitness(case.generator.clone()),
                })
            }
            _ => {
                let ws: Vec<String> = witnesses.iter().map(|w| w.to_string()).collect();
                return Err(EncodeError::MultipleWitnesses { generator: case.generator.clone(), witnesses: ws.join(", ") });
            }
        }
    }
    let h = Homomorphism::new("τ", enc.source.clone(), enc.target.clone(), images)?;
    hom_check(&h, ctx)?;
    Ok(h)
}

/// `m := x > y ? x : y` with the swap action of S₂ on {x, y} before and the
/// trivial group acting on {m} after.
pub fn max_example(checker_cfg: super::SolverConfig) -> (SemAssignEncoding, Checker) {
    let decls: VarTable = ["x", "y", "m"]
        .iter()
        .map(|n| (n.to_string(), VarDecl { name: n.to_string(), domain: Domain::Int, role: Role::Program }))
        .collect();
    let checker = Checker::new(&decls, checker_cfg);
    let ctx = GroupContext::default();
    let s2 = GroupPresentation::cyclic("S2", "g", 2);
    let swap: BTreeMap<String, SymbolicExpr> =
        [("x".to_string(), SymbolicExpr::var("y")), ("y".to_string(), SymbolicExpr::var("x"))].into_iter().collect();
    let pre = GroupAction::new("swap", s2, vec!["x".into(), "y".into()], [("g".to_string(), swap)].into_iter().collect(), true)
        .expect("swap action");
    let post = GroupAction::identity("trivial", GroupPresentation::trivial(), vec!["m".into()]);
    let exp = crate::lang::parse_expr("x > y ? x : y").expect("max expression");
    let enc = encode_sem_assign(&pre, "m", &exp, &post, None, &checker, &ctx).expect("encodable");
    (enc, checker)
}
