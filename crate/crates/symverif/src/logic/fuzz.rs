//! Randomized testing of the validity equation at concrete points.

use super::SymmetryTriple;
use crate::expr::ConcState;
use crate::group::{lift, GroupContext, Word};
use crate::lang::{interpret, VarTable};
use crate::smt::{values_equal, Checker, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeSet;

/// Loop iterations allowed per run of the program.
const FUEL: u64 = 100_000;
const MAX_WORD: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Discrepancy {
    pub trial: usize,
    pub element: String,
    pub variable: String,
    /// `b̄_φ(g)(⟦C⟧σ)(v)`
    pub expected: String,
    /// `⟦C⟧(ā_g σ)(v)`
    pub actual: String,
    pub state: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FuzzReport {
    pub trials: usize,
    pub passed: usize,
    /// Trials where the interpreter or an action failed to evaluate.
    pub skipped: usize,
    pub first_discrepancy: Option<Discrepancy>,
}

impl FuzzReport {
    pub fn ok(&self) -> bool {
        self.first_discrepancy.is_none()
    }
}

fn random_word(gens: &[String], rng: &mut ChaCha8Rng) -> Word {
    if gens.is_empty() {
        return Word::identity();
    }
    let len = rng.gen_range(0..=MAX_WORD);
    let letters: Vec<(&str, i64)> = (0..len)
        .map(|_| (gens[rng.gen_range(0..gens.len())].as_str(), if rng.gen_bool(0.5) { 1 } else { -1 }))
        .collect();
    Word::from_letters(letters)
}

fn show(s: &ConcState) -> String {
    let parts: Vec<String> = s.iter().map(|(k, v)| format!("{} = {}", k, v)).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Runs `n_trials` random `(σ, g)` pairs through the interpreter and
/// compares `b̄_φ(g)(⟦C⟧σ)` with `⟦C⟧(ā_g σ)` on the post-condition's
/// variables. Group elements are drawn uniformly from an enumerable
/// pre-condition group, else as random words of length at most 5.
pub fn fuzz_soundness(t: &SymmetryTriple, vars: &VarTable, n_trials: usize, seed: u64, ctx: &GroupContext) -> FuzzReport {
    let sampler = Checker::new(vars, SolverConfig::default());
    let mut all: BTreeSet<String> = vars.keys().cloned().collect();
    all.extend(t.pre.vars.iter().cloned());
    all.extend(t.post.vars.iter().cloned());
    let pre = lift(&t.pre, &all);
    let table = ctx.table(&t.pre.group);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = FuzzReport { trials: n_trials, passed: 0, skipped: 0, first_discrepancy: None };
    for trial in 0..n_trials {
        let sigma = sampler.sample_env(&all, &mut rng);
        let g = match &table {
            Some(tb) => tb.word(rng.gen_range(0..tb.size())).clone(),
            None => random_word(&t.pre.group.generators, &mut rng),
        };
        let h = t.hom.image(&g);
        let run = || -> Option<(ConcState, ConcState)> {
            let out = interpret(&t.program, vars, &sigma, FUEL).ok()?;
            let expected = t.post.apply_conc(&h, &out, vars, ctx).ok()?;
            let moved = pre.apply_conc(&g, &sigma, vars, ctx).ok()?;
            let actual = interpret(&t.program, vars, &moved, FUEL).ok()?;
            Some((expected, actual))
        };
        let Some((expected, actual)) = run() else {
            report.skipped += 1;
            continue;
        };
        let bad = t.post.vars.iter().find(|v| {
            let d = sampler.domain_of(v);
            match (expected.get(*v), actual.get(*v)) {
                (Some(a), Some(b)) => values_equal(a, b, &d) != Some(true),
                _ => true,
            }
        });
        match bad {
            None => report.passed += 1,
            Some(v) => {
                if report.first_discrepancy.is_none() {
                    report.first_discrepancy = Some(Discrepancy {
                        trial,
                        element: g.to_string(),
                        variable: v.clone(),
                        expected: expected.get(v).map(|x| x.to_string()).unwrap_or_default(),
                        actual: actual.get(v).map(|x| x.to_string()).unwrap_or_default(),
                        state: show(&sigma),
                    });
                }
            }
        }
    }
    report
}
