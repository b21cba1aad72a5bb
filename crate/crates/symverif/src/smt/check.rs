//! Discharge pipeline shared by every caller: canonical forms first, then a
//! cheap numeric search for a concrete counterexample, then the solver.
//! Solver models are only reported after they falsify the claim under the
//! real semantics.

use super::{run_solver, Obligation, ObligationKind, SolverConfig, SolverResult, Sort, Universal};
use crate::expr::{eval, pi_multiple, simplify, ConcState, Op, Scalar, SymbolicExpr};
use crate::lang::{Domain, VarTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Instant;

const QUICK_SAMPLES: usize = 24;
const SEARCH_SAMPLES: usize = 256;
const TOL: f64 = 1e-9;
/// Differences above this are treated as genuine when refuting.
const REFUTE_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Canonical forms coincide.
    Structural,
    /// Difference is a multiple of 2π on an angle.
    Periodic,
    /// Difference vanishes modulo the variable's modulus.
    Modular,
    Solver,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Structural => "structural",
            Method::Periodic => "periodic",
            Method::Modular => "modular",
            Method::Solver => "solver",
        })
    }
}

/// A concrete assignment of the universals that falsifies an obligation.
#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    pub model: BTreeMap<String, Scalar>,
    /// `true` when the model came from the solver, `false` when from
    /// random search.
    pub from_solver: bool,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.model.iter().map(|(k, v)| format!("{} = {}", k, v)).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Proved(Method),
    Refuted(Counterexample),
    Unknown(String),
}

impl Outcome {
    pub fn is_proved(&self) -> bool {
        matches!(self, Outcome::Proved(_))
    }
}

/// One discharged obligation, as reported.
#[derive(Clone, Debug, Serialize)]
pub struct ObligationRecord {
    pub kind: ObligationKind,
    pub rule: String,
    pub path: String,
    pub label: String,
    pub method: String,
    pub result: String,
    pub solver_ms: f64,
}

/// SMT sort of a domain.
pub fn sort_of(d: &Domain) -> Sort {
    if d.is_integral() {
        Sort::Int
    } else {
        Sort::Real
    }
}

/// Range constraint of a logical variable ranging over `d`.
pub fn domain_constraint(name: &str, d: &Domain) -> Option<SymbolicExpr> {
    let v = SymbolicExpr::var(name);
    let within = |lo: SymbolicExpr, lo_op: Op, hi: SymbolicExpr, hi_op: Op| {
        SymbolicExpr::binary(Op::And, SymbolicExpr::binary(lo_op, lo, v.clone()), SymbolicExpr::binary(hi_op, v.clone(), hi))
    };
    match d {
        Domain::Bool => Some(within(SymbolicExpr::zero(), Op::Le, SymbolicExpr::one(), Op::Le)),
        Domain::IntMod(n) => Some(within(SymbolicExpr::zero(), Op::Le, SymbolicExpr::int(n.clone()), Op::Lt)),
        Domain::RealOpen01 => Some(within(SymbolicExpr::zero(), Op::Lt, SymbolicExpr::one(), Op::Lt)),
        Domain::Int | Domain::Real | Domain::Angle => None,
    }
}

/// Logical variables derived from a program variable (`x'`, `x#2`) share its
/// domain.
fn base_name(n: &str) -> &str {
    n.split(['\'', '#']).next().unwrap_or(n)
}

fn sample(d: &Domain, rng: &mut ChaCha8Rng) -> Scalar {
    match d {
        Domain::Int => Scalar::int(rng.gen_range(-5..=5)),
        Domain::Bool => Scalar::int(rng.gen_range(0..=1)),
        Domain::IntMod(n) => {
            let n = n.clone();
            let k: i64 = rng.gen_range(0..1_000_000);
            Scalar::from_bigint(num_bigint::BigInt::from(k) % n)
        }
        Domain::Real => Scalar::ratio(rng.gen_range(-32..=32), 8),
        Domain::RealOpen01 => Scalar::ratio(rng.gen_range(1..=15), 16),
        Domain::Angle => Scalar::ratio(rng.gen_range(-64..=64), 16),
    }
}

fn fnv(s: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x100000001b3);
    }
    h
}

/// Three-valued equality of two values in a domain. `None` when rounding
/// makes the answer uncertain.
pub fn values_equal(a: &Scalar, b: &Scalar, d: &Domain) -> Option<bool> {
    let (a, b) = match d {
        Domain::IntMod(n) => {
            let n = Scalar::from_bigint(n.clone());
            (a.modulo(&n).ok()?, b.modulo(&n).ok()?)
        }
        _ => (a.clone(), b.clone()),
    };
    if a.is_exact() && b.is_exact() {
        return Some(a == b);
    }
    if *d == Domain::Angle {
        let two_pi = Scalar::pi().mul(&Scalar::int(2)).ok()?;
        if a.approx_eq_mod(&b, &two_pi, TOL) {
            return Some(true);
        }
        return if a.approx_eq_mod(&b, &two_pi, REFUTE_TOL) { None } else { Some(false) };
    }
    if a.approx_eq(&b, TOL) {
        Some(true)
    } else if a.approx_eq(&b, REFUTE_TOL) {
        None
    } else {
        Some(false)
    }
}

/// Truth of a Boolean expression at a point, tolerant of rounding in
/// approximate comparisons.
pub fn truth(e: &SymbolicExpr, env: &ConcState) -> Option<bool> {
    use crate::expr::Node;
    if let Node::Apply(op, args) = e.node() {
        match op {
            Op::And => {
                let mut all = Some(true);
                for a in args {
                    match truth(a, env) {
                        Some(false) => return Some(false),
                        None => all = None,
                        _ => {}
                    }
                }
                return all;
            }
            Op::Or => {
                let mut any = Some(false);
                for a in args {
                    match truth(a, env) {
                        Some(true) => return Some(true),
                        None => any = None,
                        _ => {}
                    }
                }
                return any;
            }
            Op::Not => return truth(&args[0], env).map(|b| !b),
            Op::Ite => {
                return match truth(&args[0], env)? {
                    true => truth(&args[1], env),
                    false => truth(&args[2], env),
                }
            }
            Op::Eq | Op::Ne => {
                let a = eval(&args[0], env).ok()?;
                let b = eval(&args[1], env).ok()?;
                let eq = values_equal(&a, &b, &Domain::Real)?;
                return Some(eq == (*op == Op::Eq));
            }
            Op::Lt | Op::Le | Op::Gt | Op::Ge => {
                let a = eval(&args[0], env).ok()?;
                let b = eval(&args[1], env).ok()?;
                if !(a.is_exact() && b.is_exact()) && a.approx_eq(&b, REFUTE_TOL) {
                    return None;
                }
                let c = a.cmp_value(&b);
                return Some(match op {
                    Op::Lt => c.is_lt(),
                    Op::Le => c.is_le(),
                    Op::Gt => c.is_gt(),
                    _ => c.is_ge(),
                });
            }
            _ => {}
        }
    }
    let v = eval(e, env).ok()?;
    if !v.is_exact() && v.approx_eq(&Scalar::int(0), REFUTE_TOL) {
        return None;
    }
    Some(v.truthy())
}

/// Discharges obligations for one verification run. Logical variables are
/// typed by the program's declarations; unknown names are reals.
pub struct Checker {
    domains: BTreeMap<String, Domain>,
    pub cfg: SolverConfig,
    solver_calls: AtomicU64,
    solver_nanos: AtomicU64,
    log: Mutex<Vec<ObligationRecord>>,
    context: Mutex<(String, String)>,
    cache: Mutex<HashMap<String, Outcome>>,
}

impl Checker {
    pub fn new(vars: &VarTable, cfg: SolverConfig) -> Checker {
        Checker {
            domains: vars.iter().map(|(k, d)| (k.clone(), d.domain.clone())).collect(),
            cfg,
            solver_calls: AtomicU64::new(0),
            solver_nanos: AtomicU64::new(0),
            log: Mutex::new(Vec::new()),
            context: Mutex::new((String::new(), String::new())),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn domain_of(&self, name: &str) -> Domain {
        self.domains
            .get(name)
            .or_else(|| self.domains.get(base_name(name)))
            .cloned()
            .unwrap_or(Domain::Real)
    }

    pub fn domains(&self) -> &BTreeMap<String, Domain> {
        &self.domains
    }

    /// Rule name and statement path attached to subsequent records.
    pub fn set_context(&self, rule: &str, path: &str) {
        *self.context.lock().unwrap() = (rule.to_string(), path.to_string());
    }

    pub fn solver_calls(&self) -> u64 {
        self.solver_calls.load(Ordering::Relaxed)
    }

    pub fn solver_seconds(&self) -> f64 {
        self.solver_nanos.load(Ordering::Relaxed) as f64 / 1e9
    }

    pub fn records(&self) -> Vec<ObligationRecord> {
        self.log.lock().unwrap().clone()
    }

    pub fn universals(&self, vars: &BTreeSet<String>) -> Vec<Universal> {
        vars.iter()
            .map(|v| {
                let d = self.domain_of(v);
                Universal { name: v.clone(), sort: sort_of(&d), constraint: domain_constraint(v, &d) }
            })
            .collect()
    }

    /// Wraps a Boolean body as an obligation over its free variables.
    pub fn obligation(&self, kind: ObligationKind, label: &str, body: SymbolicExpr) -> Obligation {
        Obligation { kind, label: label.to_string(), universals: self.universals(&body.free_vars()), body }
    }

    pub fn sample_env(&self, vars: &BTreeSet<String>, rng: &mut ChaCha8Rng) -> ConcState {
        vars.iter().map(|v| (v.clone(), sample(&self.domain_of(v), rng))).collect()
    }

    fn record(&self, ob: &Obligation, outcome: &Outcome, ms: f64) {
        let (rule, path) = self.context.lock().unwrap().clone();
        let (method, result) = match outcome {
            Outcome::Proved(m) => (m.to_string(), "valid".to_string()),
            Outcome::Refuted(c) => (
                if c.from_solver { "solver" } else { "sampling" }.to_string(),
                format!("counterexample {}", c),
            ),
            Outcome::Unknown(r) => ("solver".to_string(), format!("unknown: {}", r)),
        };
        self.log.lock().unwrap().push(ObligationRecord {
            kind: ob.kind,
            rule,
            path,
            label: ob.label.clone(),
            method,
            result,
            solver_ms: ms,
        });
    }

    /// Proves `lhs = rhs` where both denote values of domain `d`.
    pub fn prove_equal(
        &self,
        kind: ObligationKind,
        label: &str,
        lhs: &SymbolicExpr,
        rhs: &SymbolicExpr,
        d: &Domain,
    ) -> Outcome {
        let (l, r) = (simplify(lhs), simplify(rhs));
        let body = match d {
            Domain::IntMod(n) => SymbolicExpr::eq(
                SymbolicExpr::modulo(l.clone() - r.clone(), SymbolicExpr::int(n.clone())),
                SymbolicExpr::zero(),
            ),
            _ => SymbolicExpr::eq(l.clone(), r.clone()),
        };
        let ob = self.obligation(kind, label, body);
        if let Some(m) = self.structural_equal(&l, &r, d) {
            let out = Outcome::Proved(m);
            self.record(&ob, &out, 0.0);
            return out;
        }
        let dd = d.clone();
        let check = move |env: &ConcState| -> Option<bool> {
            let a = eval(&l, env).ok()?;
            let b = eval(&r, env).ok()?;
            values_equal(&a, &b, &dd)
        };
        self.discharge(ob, &check)
    }

    fn structural_equal(&self, l: &SymbolicExpr, r: &SymbolicExpr, d: &Domain) -> Option<Method> {
        if l == r {
            return Some(Method::Structural);
        }
        let diff = simplify(&(l.clone() - r.clone()));
        if diff.is_zero_literal() {
            return Some(Method::Structural);
        }
        match d {
            Domain::Angle => {
                let q = pi_multiple(&diff)?;
                let half = q / num_rational::BigRational::from_integer(2.into());
                half.is_integer().then_some(Method::Periodic)
            }
            Domain::IntMod(n) => {
                simplify(&SymbolicExpr::modulo(diff, SymbolicExpr::int(n.clone()))).is_zero_literal().then_some(Method::Modular)
            }
            _ => None,
        }
    }

    /// Proves a Boolean obligation valid.
    pub fn prove_valid(&self, ob: Obligation) -> Outcome {
        let s = simplify(&ob.body);
        if s.as_rational().is_some_and(|v| v != num_rational::BigRational::from_integer(0.into())) {
            let out = Outcome::Proved(Method::Structural);
            self.record(&ob, &out, 0.0);
            return out;
        }
        let body = ob.body.clone();
        let check = move |env: &ConcState| truth(&body, env);
        self.discharge(ob, &check)
    }

    fn search(&self, ob: &Obligation, check: &dyn Fn(&ConcState) -> Option<bool>, n: usize, salt: u64) -> Option<ConcState> {
        let vars: BTreeSet<String> = ob.universals.iter().map(|u| u.name.clone()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(fnv(&ob.label) ^ fnv(&ob.body.to_string()) ^ salt);
        (0..n).map(|_| self.sample_env(&vars, &mut rng)).find(|env| check(env) == Some(false))
    }

    fn discharge(&self, ob: Obligation, check: &dyn Fn(&ConcState) -> Option<bool>) -> Outcome {
        let key = format!("{}\u{0}{}", ob.kind, emit_key(&ob));
        if let Some(o) = self.cache.lock().unwrap().get(&key).cloned() {
            self.record(&ob, &o, 0.0);
            return o;
        }
        if let Some(env) = self.search(&ob, check, QUICK_SAMPLES, 0) {
            let out = Outcome::Refuted(Counterexample { model: env, from_solver: false });
            self.record(&ob, &out, 0.0);
            return out;
        }
        let t0 = Instant::now();
        self.solver_calls.fetch_add(1, Ordering::Relaxed);
        let res = run_solver(&ob, &self.cfg);
        let dt = t0.elapsed();
        self.solver_nanos.fetch_add(dt.as_nanos() as u64, Ordering::Relaxed);
        let out = match res {
            SolverResult::Valid => Outcome::Proved(Method::Solver),
            SolverResult::CounterModel(m) => {
                let mut env: ConcState = m.into_iter().map(|(k, v)| (k, Scalar::from(v))).collect();
                for u in &ob.universals {
                    env.entry(u.name.clone()).or_insert_with(|| Scalar::int(0));
                }
                if check(&env) == Some(false) {
                    Outcome::Refuted(Counterexample { model: env, from_solver: true })
                } else if let Some(env) = self.search(&ob, check, SEARCH_SAMPLES, 1) {
                    Outcome::Refuted(Counterexample { model: env, from_solver: false })
                } else {
                    Outcome::Unknown("solver model does not falsify the claim under the real semantics".into())
                }
            }
            SolverResult::Timeout => Outcome::Unknown("timeout".into()),
            SolverResult::Unknown(r) => Outcome::Unknown(r),
            SolverResult::SolverError(e) => Outcome::Unknown(format!("solver error: {}", e)),
        };
        self.record(&ob, &out, dt.as_secs_f64() * 1e3);
        self.cache.lock().unwrap().insert(key, out.clone());
        out
    }
}

fn emit_key(ob: &Obligation) -> String {
    let mut s = ob.body.to_string();
    for u in &ob.universals {
        s.push_str(&format!("|{}:{:?}", u.name, u.sort));
        if let Some(c) = &u.constraint {
            s.push_str(&c.to_string());
        }
    }
    s
}
