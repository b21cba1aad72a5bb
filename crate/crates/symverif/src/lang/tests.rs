use super::*;
use crate::expr::{ConcState, Scalar};
use proptest::prelude::*;

const CAR: &str = "
var t, x, y, v, phi, theta: real;
param a, u, L, T, dt: real;
for (t := 0; t < T; t := t + dt) {
  x := v * cos(theta) * dt + x;
  y := v * sin(theta) * dt + y;
  v := a * dt + v;
  phi := u * dt + phi;
  theta := v / L * tan(phi) * dt + theta
}
";

const VOTING: &str = "
var v1, v2, count1, count2, b, winner: int;
count1 := v1 == 0 ? count1 + 1 : count1;
count1 := v2 == 0 ? count1 + 1 : count1;
count2 := v1 == 1 ? count2 + 1 : count2;
count2 := v2 == 1 ? count2 + 1 : count2;
b := count1 > count2;
if b then { winner := 0 } else { winner := 1 }
";

fn st(pairs: &[(&str, i64)]) -> ConcState {
    pairs.iter().map(|(k, v)| (k.to_string(), Scalar::int(*v))).collect()
}

fn with_t(decls: &[VarDecl]) -> VarTable {
    let mut vt = var_table(decls);
    vt.insert("t".into(), VarDecl { name: "t".into(), domain: Domain::Real, role: Role::Program });
    vt
}

#[test]
fn parses_the_car_program() {
    let (decls, c) = parse_program(CAR).unwrap();
    assert_eq!(decls.len(), 11);
    let Command::For { counter, bound, step, body } = &c else { panic!("expected a loop, got {c}") };
    assert_eq!(counter, "t");
    assert_eq!(bound, &LoopOperand::Var("T".into()));
    assert_eq!(step, &LoopOperand::Var("dt".into()));
    let stmts = body.statements();
    assert_eq!(stmts.len(), 5);
    assert!(stmts.iter().all(|s| matches!(s, Command::Assign(..))));
    assert_eq!(c.count_assignments(), 5);
    let names: BTreeSet<String> = ["x", "y", "v", "phi", "theta"].iter().map(|s| s.to_string()).collect();
    assert_eq!(modified_vars(body), names);
}

#[test]
fn skip_and_modified_vars() {
    assert_eq!(parse_statements("skip", &[]).unwrap(), Command::Skip);
    assert!(modified_vars(&Command::Skip).is_empty());
    let d = [VarDecl { name: "x".into(), domain: Domain::Int, role: Role::Program }];
    let c = parse_statements("x := x + 5", &d).unwrap();
    assert_eq!(modified_vars(&c), ["x".to_string()].into());
}

#[test]
fn guards_must_be_variables() {
    let err = parse_program("var x: int;\nif x + 1 then { skip }").unwrap_err();
    assert!(matches!(err, ParseError::NonVariableGuard { pos } if pos.line == 2 && pos.col == 4), "{err:?}");
    let err = parse_program("var x: int;\nwhile x > 0 { x := x - 1 }").unwrap_err();
    assert!(matches!(err, ParseError::NonVariableGuard { .. }));
}

#[test]
fn reports_undeclared_variables_with_position() {
    let err = parse_program("var x: int;\nx := y + 1").unwrap_err();
    assert_eq!(err, ParseError::UndeclaredVariable { name: "y".into(), pos: lexer::Pos { line: 2, col: 6 } });
}

#[test]
fn reports_syntax_errors_with_position() {
    let err = parse_program("var x: int;\nx := (x + 1").unwrap_err();
    assert!(matches!(err, ParseError::Syntax { pos, .. } if pos.line == 2), "{err:?}");
    assert!(parse_program("var x: int;\nx := foo(x)").is_err());
    assert!(parse_program("var x: int;\nx := x $ 1").is_err());
}

#[test]
fn loop_parameters_cannot_be_assigned() {
    let err = parse_program("var t, x, T: int;\nfor (t := 0; t < T; t := t + 1) { T := T + 1 }").unwrap_err();
    assert!(matches!(&err, ParseError::Syntax { msg, .. } if msg.contains("assigned")), "{err:?}");
    assert!(parse_program("var t, T: int;\nfor (t := 0; t < t; t := t + 1) { skip }").is_err());
}

#[test]
fn interprets_assignment() {
    let (decls, c) = parse_program("var x: int; x := x + 5").unwrap();
    let out = interpret(&c, &var_table(&decls), &st(&[("x", 0)]), DEFAULT_FUEL).unwrap();
    assert_eq!(out["x"], Scalar::int(5));
}

#[test]
fn voting_majority_with_ties_to_candidate_one() {
    let (decls, c) = parse_program(VOTING).unwrap();
    let vt = var_table(&decls);
    for v1 in 0..2 {
        for v2 in 0..2 {
            let s = st(&[("v1", v1), ("v2", v2), ("count1", 0), ("count2", 0), ("b", 0), ("winner", 0)]);
            let out = interpret(&c, &vt, &s, DEFAULT_FUEL).unwrap();
            let zeros = (v1 == 0) as i64 + (v2 == 0) as i64;
            let want = if zeros > 2 - zeros { 0 } else { 1 };
            assert_eq!(out["winner"], Scalar::int(want), "votes {v1},{v2}");
        }
    }
}

#[test]
fn car_translation_at_one_point() {
    let (decls, c) = parse_program(CAR).unwrap();
    let vt = var_table(&decls);
    let base: ConcState = decls
        .iter()
        .map(|d| (d.name.clone(), Scalar::int(0)))
        .chain([("T".to_string(), Scalar::int(2)), ("dt".to_string(), Scalar::int(1))])
        .chain([("v".to_string(), Scalar::int(1)), ("L".to_string(), Scalar::int(1)), ("a".to_string(), Scalar::int(1))])
        .collect();
    let mut shifted = base.clone();
    shifted.insert("x".into(), Scalar::int(3));
    shifted.insert("y".into(), Scalar::int(3));
    let o1 = interpret(&c, &vt, &base, DEFAULT_FUEL).unwrap();
    let o2 = interpret(&c, &vt, &shifted, DEFAULT_FUEL).unwrap();
    for var in ["x", "y"] {
        let d = o2[var].sub(&o1[var]).unwrap();
        assert!(d.approx_eq(&Scalar::int(3), 1e-9), "{var}: {d}");
    }
}

#[test]
fn fuel_exhaustion_is_reported() {
    let (decls, c) = parse_program("var b, x: int; while b { x := x + 1 }").unwrap();
    let err = interpret(&c, &var_table(&decls), &st(&[("b", 1), ("x", 0)]), 50).unwrap_err();
    assert_eq!(err, InterpError::FuelExhausted(50));
}

#[test]
fn division_by_zero_is_reported() {
    let (decls, c) = parse_program("var x: real; x := 1 / x").unwrap();
    let err = interpret(&c, &var_table(&decls), &st(&[("x", 0)]), 10).unwrap_err();
    assert_eq!(err, InterpError::DivByZero);
}

#[test]
fn intmod_values_wrap_on_store() {
    let (decls, c) = parse_program("var th: intmod 360; th := th + 90").unwrap();
    let out = interpret(&c, &var_table(&decls), &st(&[("th", 300)]), 10).unwrap();
    assert_eq!(out["th"], Scalar::int(30));
}

#[test]
fn statement_paths_resolve() {
    let (_, c) = parse_program(CAR).unwrap();
    let p = StmtPath::parse("body.2");
    assert_eq!(p.normalize(&c), StmtPath::parse("0.body.2"));
    match p.resolve(&c) {
        Some(Command::Assign(x, _)) => assert_eq!(x, "v"),
        other => panic!("{other:?}"),
    }
    assert_eq!(StmtPath::parse("0.body.2").display_for(&c), "body.2");
    assert!(StmtPath::parse("body.9").resolve(&c).is_none());
    let (_, v) = parse_program(VOTING).unwrap();
    assert!(matches!(StmtPath::parse("5.else.0").resolve(&v), Some(Command::Assign(w, _)) if w == "winner"));
}

#[test]
fn display_reparses_to_the_same_ast() {
    let (decls, c) = parse_program(VOTING).unwrap();
    assert_eq!(parse_statements(&c.to_string(), &decls).unwrap(), c);
    let (decls, c) = parse_program(CAR).unwrap();
    let again = parse_statements(&c.to_string(), &decls).unwrap();
    assert_eq!(again.to_string(), c.to_string());
}

fn int_decls() -> Vec<VarDecl> {
    ["x", "y", "z", "b"].iter().map(|n| VarDecl { name: n.to_string(), domain: Domain::Int, role: Role::Program }).collect()
}

fn arb_expr() -> impl Strategy<Value = ProgramExpr> {
    let leaf = prop_oneof![
        prop::sample::select(vec!["x", "y", "z", "b"]).prop_map(|v| ProgramExpr::Var(v.into())),
        (-3i64..=3).prop_map(|k| ProgramExpr::Int(k.into())),
    ];
    leaf.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ProgramExpr::Apply(crate::expr::Op::Add, vec![a, b])),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ProgramExpr::Apply(crate::expr::Op::Sub, vec![a, b])),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ProgramExpr::Apply(crate::expr::Op::Mul, vec![a, b])),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ProgramExpr::Apply(crate::expr::Op::Lt, vec![a, b])),
        ]
    })
}

fn arb_command() -> impl Strategy<Value = Command> {
    let assign = (prop::sample::select(vec!["x", "y", "z", "b"]), arb_expr())
        .prop_map(|(x, e)| Command::Assign(x.to_string(), e));
    let leaf = prop_oneof![Just(Command::Skip), assign];
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Command::Seq(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Command::If("b".into(), Box::new(a), Box::new(b))),
        ]
    })
}

fn arb_state() -> impl Strategy<Value = ConcState> {
    prop::collection::vec(-5i64..=5, 4).prop_map(|v| {
        ["x", "y", "z", "b"].iter().zip(v).map(|(n, k)| (n.to_string(), Scalar::int(k))).collect()
    })
}

proptest! {
    #[test]
    fn seq_composes(a in arb_command(), b in arb_command(), s in arb_state()) {
        let vt = var_table(&int_decls());
        let whole = interpret(&Command::Seq(Box::new(a.clone()), Box::new(b.clone())), &vt, &s, 100).unwrap();
        let mid = interpret(&a, &vt, &s, 100).unwrap();
        prop_assert_eq!(whole, interpret(&b, &vt, &mid, 100).unwrap());
    }

    #[test]
    fn skip_is_identity(s in arb_state()) {
        prop_assert_eq!(interpret(&Command::Skip, &var_table(&int_decls()), &s, 1).unwrap(), s);
    }

    #[test]
    fn unmodified_vars_are_unchanged(c in arb_command(), s in arb_state()) {
        let out = interpret(&c, &var_table(&int_decls()), &s, 100).unwrap();
        let m = modified_vars(&c);
        for (k, v) in &s {
            if !m.contains(k) {
                prop_assert_eq!(&out[k], v);
            }
        }
    }

    #[test]
    fn for_loop_runs_body_n_times(n in 0i64..40) {
        let mut decls = int_decls();
        decls.push(VarDecl { name: "N".into(), domain: Domain::Int, role: Role::Param });
        let c = parse_statements("for (t := 0; t < N; t := t + 1) { x := x + 1 }", &with_t(&decls).into_values().collect::<Vec<_>>()).unwrap();
        let mut s = st(&[("x", 0), ("y", 0), ("z", 0), ("b", 0), ("t", 0)]);
        s.insert("N".into(), Scalar::int(n));
        let (out, count) = interpret_counting(&c, &with_t(&decls), &s, DEFAULT_FUEL).unwrap();
        prop_assert_eq!(count, n as u64);
        prop_assert_eq!(&out["x"], &Scalar::int(n));
    }

    #[test]
    fn printed_commands_reparse(c in arb_command(), s in arb_state()) {
        let back = parse_statements(&c.to_string(), &int_decls()).unwrap();
        let vt = var_table(&int_decls());
        prop_assert_eq!(interpret(&back, &vt, &s, 100).unwrap(), interpret(&c, &vt, &s, 100).unwrap());
    }
}
