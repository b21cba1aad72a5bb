use super::*;
use crate::lang::{eval_program_expr, parse_expr};
use proptest::prelude::*;

fn v(n: &str) -> SymbolicExpr {
    SymbolicExpr::var(n)
}

fn i(n: i64) -> SymbolicExpr {
    SymbolicExpr::int(n)
}

fn env(pairs: &[(&str, Scalar)]) -> BTreeMap<String, Scalar> {
    pairs.iter().map(|(k, s)| (k.to_string(), s.clone())).collect()
}

fn state(pairs: &[(&str, &str)]) -> SymState {
    pairs.iter().map(|(k, s)| (k.to_string(), v(s))).collect()
}

#[test]
fn substitute_replaces_bound_vars_only() {
    let e = v("a") + i(1);
    let m: BTreeMap<_, _> = [("a".to_string(), v("b") - i(1))].into();
    assert_eq!(e.substitute(&m), (v("b") - i(1)) + i(1));
    assert_eq!(v("a").substitute(&BTreeMap::new()), v("a"));
    let f = SymbolicExpr::unary(Op::Sin, v("a")) * i(5);
    let id: BTreeMap<_, _> = [("a".to_string(), v("a"))].into();
    assert_eq!(f.substitute(&id), f);
}

#[test]
fn substitution_is_simultaneous() {
    let m: BTreeMap<_, _> = [("x".to_string(), v("y")), ("y".to_string(), v("x"))].into();
    assert_eq!((v("x") - v("y")).substitute(&m), v("y") - v("x"));
}

#[test]
fn gamma_translates_program_expressions() {
    let e = parse_expr("x + 5").unwrap();
    assert_eq!(gamma(&e, &state(&[("x", "a")])).unwrap(), v("a") + i(5));
    assert_eq!(gamma(&parse_expr("7").unwrap(), &SymState::new()).unwrap(), i(7));
    let m = parse_expr("x > y ? x : y").unwrap();
    let got = gamma(&m, &state(&[("x", "ax"), ("y", "ay")])).unwrap();
    let want = SymbolicExpr::ite(SymbolicExpr::binary(Op::Gt, v("ax"), v("ay")), v("ax"), v("ay"));
    assert_eq!(got, want);
}

#[test]
fn gamma_reports_unknown_variables() {
    let e = parse_expr("z * 2").unwrap();
    assert_eq!(gamma(&e, &SymState::new()), Err(ExprError::UnboundVar("z".into())));
}

#[test]
fn simplify_cancels_car_terms() {
    let vcd = v("v") * SymbolicExpr::unary(Op::Cos, v("theta")) * v("dt");
    let e = (vcd.clone() + (v("a") - vcd)) + i(1);
    assert_eq!(simplify(&e), simplify(&(v("a") + i(1))));
}

#[test]
fn simplify_applies_trig_pack() {
    let a = v("a");
    let pi = SymbolicExpr::pi();
    let cos = |e| SymbolicExpr::unary(Op::Cos, e);
    let sin = |e| SymbolicExpr::unary(Op::Sin, e);
    let tan = |e| SymbolicExpr::unary(Op::Tan, e);
    assert_eq!(simplify(&cos(pi.clone() - a.clone())), simplify(&-cos(a.clone())));
    assert_eq!(simplify(&sin(pi.clone() - a.clone())), simplify(&sin(a.clone())));
    assert_eq!(simplify(&sin(-a.clone())), simplify(&-sin(a.clone())));
    assert_eq!(simplify(&cos(-a.clone())), simplify(&cos(a.clone())));
    assert_eq!(simplify(&tan(-a.clone())), simplify(&-tan(a.clone())));
}

#[test]
fn simplify_folds_literal_conditions() {
    let e = SymbolicExpr::ite(i(1), v("a"), v("b"));
    assert_eq!(simplify(&e), v("a"));
    let e = SymbolicExpr::ite(SymbolicExpr::binary(Op::Lt, i(2), i(1)), v("a"), v("b"));
    assert_eq!(simplify(&e), v("b"));
}

#[test]
fn simplify_keeps_pi_symbolic() {
    let e = SymbolicExpr::pi() + SymbolicExpr::pi();
    let s = simplify(&e);
    assert!(s.mentions_pi());
    assert!(s.free_vars().is_empty());
}

#[test]
fn eval_examples() {
    assert_eq!(eval(&(v("a") + i(1)), &env(&[("a", Scalar::int(41))])).unwrap(), Scalar::int(42));
    let m = SymbolicExpr::ite(SymbolicExpr::binary(Op::Gt, v("ax"), v("ay")), v("ax"), v("ay"));
    let e = env(&[("ax", Scalar::int(3)), ("ay", Scalar::int(7))]);
    assert_eq!(eval(&m, &e).unwrap(), Scalar::int(7));
    // the same value through the interpreter
    let p = parse_expr("x > y ? x : y").unwrap();
    let s = env(&[("x", Scalar::int(3)), ("y", Scalar::int(7))]);
    assert_eq!(eval_program_expr(&p, &s).unwrap(), Scalar::int(7));
}

#[test]
fn eval_opaque_against_unsimplified_form() {
    let e = SymbolicExpr::unary(Op::Cos, SymbolicExpr::pi() - v("a"));
    let s = simplify(&e);
    let en = env(&[("a", Scalar::ratio(1, 2))]);
    let want = -(0.5f64).cos();
    assert!((eval(&e, &en).unwrap().to_f64() - want).abs() < 1e-9);
    assert!((eval(&s, &en).unwrap().to_f64() - want).abs() < 1e-9);
}

#[test]
fn eval_errors() {
    assert_eq!(eval(&v("q"), &BTreeMap::new()), Err(ExprError::UnboundVar("q".into())));
    let e = v("a") / (v("a") - v("a"));
    assert_eq!(eval(&e, &env(&[("a", Scalar::int(2))])), Err(ExprError::DivByZero));
}

#[test]
fn arity_is_checked() {
    assert!(SymbolicExpr::try_apply(Op::Sin, vec![v("a"), v("b")]).is_err());
    assert!(SymbolicExpr::try_apply(Op::Add, vec![v("a")]).is_err());
    assert!(SymbolicExpr::try_apply(Op::Add, vec![v("a"), v("b"), v("c")]).is_ok());
}

#[test]
fn affine_decomposition() {
    // Lorenz: (-p*a + p*y)*dt + a
    let e = (-(v("p") * v("a")) + v("p") * v("y")) * v("dt") + v("a");
    let (c, d) = affine_in(&e, "a").unwrap();
    assert_eq!(simplify(&c), simplify(&(i(1) - v("p") * v("dt"))));
    assert_eq!(simplify(&d), simplify(&(v("p") * v("y") * v("dt"))));
    assert!(affine_in(&(v("a") * v("a")), "a").is_none());
}

#[test]
fn display_round_trips_through_parser() {
    let e = parse_expr("x - (y - 3) * 2 / z + (a > b ? -c : c^2)").unwrap();
    let s = lift_program_expr(&e);
    let back = lift_program_expr(&parse_expr(&s.to_string()).unwrap());
    assert_eq!(simplify(&s), simplify(&back));
}

const VARS: [&str; 3] = ["a", "b", "c"];

/// Trig-free expressions: safe inside comparisons and `mod`, where rounding
/// of approximate values could otherwise flip a branch.
fn poly_expr() -> impl Strategy<Value = SymbolicExpr> {
    let leaf = prop_oneof![(0..3usize).prop_map(|k| v(VARS[k])), (-3i64..=3).prop_map(i),];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            inner.clone().prop_map(|a| -a),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / b),
        ]
    })
}

fn full_expr() -> impl Strategy<Value = SymbolicExpr> {
    let leaf = prop_oneof![
        (0..3usize).prop_map(|k| v(VARS[k])),
        (-3i64..=3).prop_map(i),
        Just(SymbolicExpr::pi()),
    ];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            inner.clone().prop_map(|a| -a),
            inner.clone().prop_map(|a| SymbolicExpr::unary(Op::Sin, a)),
            inner.clone().prop_map(|a| SymbolicExpr::unary(Op::Cos, a)),
            inner.clone().prop_map(|a| SymbolicExpr::unary(Op::Abs, a)),
            (poly_expr(), poly_expr(), inner.clone(), inner.clone())
                .prop_map(|(p, q, a, b)| SymbolicExpr::ite(SymbolicExpr::binary(Op::Lt, p, q), a, b)),
            (poly_expr(), 2i64..=5).prop_map(|(p, n)| SymbolicExpr::modulo(p, i(n))),
        ]
    })
}

fn random_env(seed: u64) -> BTreeMap<String, Scalar> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    VARS.iter().map(|n| (n.to_string(), Scalar::ratio(rng.gen_range(-40..=40), rng.gen_range(1..=8)))).collect()
}

fn agree(a: &Scalar, b: &Scalar) -> bool {
    a.approx_eq(b, 1e-9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simplify_is_idempotent(e in full_expr()) {
        let s = simplify(&e);
        prop_assert_eq!(simplify(&s), s);
    }

    #[test]
    fn simplify_preserves_eval(e in full_expr(), seed in any::<u64>()) {
        let s = simplify(&e);
        for k in 0..100u64 {
            let en = random_env(seed.wrapping_add(k));
            if let Ok(x) = eval(&e, &en) {
                let y = eval(&s, &en);
                prop_assert!(y.is_ok(), "{} defined at {:?} but {} is not", e, en, s);
                let y = y.unwrap();
                prop_assert!(agree(&x, &y), "{} = {} but {} = {}", e, x, s, y);
            }
        }
    }

    #[test]
    fn gamma_agrees_with_interpreter(e in full_expr(), seed in any::<u64>()) {
        // Read the generated expression back as a program expression.
        let p = parse_expr(&e.to_string()).unwrap();
        let g = gamma(&p, &fresh_state(&VARS.iter().map(|s| s.to_string()).collect::<Vec<_>>())).unwrap();
        let en = random_env(seed);
        match (eval(&g, &en), eval_program_expr(&p, &en)) {
            (Ok(x), Ok(y)) => prop_assert!(agree(&x, &y)),
            (Err(_), Err(_)) => {}
            (x, y) => prop_assert!(false, "{:?} vs {:?}", x, y),
        }
    }
}
