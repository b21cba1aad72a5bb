use super::*;
use crate::expr::lift_program_expr;
use crate::group::{GroupContext, GroupPresentation};
use crate::lang::{parse_expr, parse_program, var_table};
use crate::logic::{fuzz_soundness, injectivity_check, invert_assignment, post_transform, VerifyConfig};

fn e(s: &str) -> SymbolicExpr {
    lift_program_expr(&parse_expr(s).unwrap())
}

fn action(g: GroupPresentation, vars: &[&str], maps: &[(&str, &[(&str, &str)])]) -> GroupAction {
    let gens: BTreeMap<String, SymMap> = maps
        .iter()
        .map(|(g, m)| (g.to_string(), m.iter().map(|(v, x)| (v.to_string(), e(x))).collect()))
        .collect();
    GroupAction::new("post", g, vars.iter().map(|s| s.to_string()).collect(), gens, true).unwrap()
}

fn setup(decls: &str) -> Verifier {
    let (d, _) = parse_program(&format!("{}\nskip", decls)).unwrap();
    Verifier::new(&var_table(&d), &VerifyConfig::default())
}

fn translation() -> GroupAction {
    action(GroupPresentation::free("Z", &["g"]), &["x", "y"], &[("g", &[("x", "x + 1"), ("y", "y + 1")])])
}

fn budget() -> SynthBudget {
    SynthBudget { depth: 3, timeout: Duration::from_secs(120), seed: 7 }
}

fn simplify_equal(a: &SymbolicExpr, b: &SymbolicExpr) -> bool {
    simplify(a) == simplify(b) || simplify(&(a.clone() - b.clone())).is_zero_literal()
}

const CAR_VARS: &str = "var x, y, v, theta: real;\nparam dt: real01;";

#[test]
fn grammar_covers_constant_offsets() {
    let g = make_grammar("x", &parse_expr("x + 5").unwrap(), &translation(), 3);
    assert!(g.constants.contains(&SymbolicExpr::int(5)));
    assert_eq!(g.unary, vec![Op::Neg]);
    assert_eq!(g.binary, vec![Op::Add, Op::Sub, Op::Mul]);
    assert_eq!(g.terminals("x", "g")[0], SymbolicExpr::var("x"));
    assert_eq!(g.terminals("y", "g")[0], SymbolicExpr::var("y"));
}

#[test]
fn grammar_includes_opaque_ops_of_the_assignment() {
    let g = make_grammar("x", &parse_expr("v * cos(theta) * dt + x").unwrap(), &translation(), 3);
    assert!(g.unary.contains(&Op::Cos));
    assert!(!g.unary.contains(&Op::Sin));
    assert!(g.variables.contains(&"theta".to_string()));
}

#[test]
fn grammar_for_identity_assignment_has_identity_term() {
    let g = make_grammar("x", &parse_expr("x").unwrap(), &translation(), 3);
    assert!(g.terminals("x", "g").contains(&SymbolicExpr::var("x")));
    assert_eq!(g.max_size(), 7);
}

#[test]
fn car_translation_recovers_the_translation() {
    let v = setup(CAR_VARS);
    let f = parse_expr("v * cos(theta) * dt + x").unwrap();
    let post = translation();
    let r = synthesize_pre("x", &f, &post, &budget(), &v).unwrap();
    let m = &r.pre.gens["g"];
    assert!(simplify_equal(&m["x"], &e("x + 1")), "{}", m["x"]);
    assert!(simplify_equal(&m["y"], &e("y + 1")), "{}", m["y"]);
    assert!(r.verdict.is_valid());
    assert!(r.stats.candidates > 0);
    // the weakest pre-condition through POST agrees
    assert!(injectivity_check(&f, "x", &v.checker));
    let inv = invert_assignment(&f, "x", None, &v.checker).unwrap();
    let wp = post_transform(&r.pre, "x", &f, &inv, &v.checker, &v.ctx, "wp").unwrap();
    for (u, x) in &post.gens["g"] {
        assert!(simplify_equal(&wp.gens["g"][u], x));
    }
}

#[test]
fn identity_assignment_keeps_the_post_condition() {
    let v = setup("var x, y: int;");
    let r = synthesize_pre("x", &parse_expr("x").unwrap(), &translation(), &budget(), &v).unwrap();
    assert_eq!(r.pre.gens["g"]["x"], e("x + 1"));
    assert_eq!(r.pre.gens["g"]["y"], e("y + 1"));
}

#[test]
fn gravity_force_synthesizes_the_swap() {
    let v = setup("var x1, x2, v1, v2, F1: real;\nparam G, m1, m2: real;");
    let post = action(
        GroupPresentation::free("S", &["s"]),
        &["x1", "x2", "m1", "m2", "v1", "v2", "F1"],
        &[("s", &[("x1", "x2"), ("x2", "x1"), ("m1", "m2"), ("m2", "m1"), ("v1", "v2"), ("v2", "v1"), ("F1", "-F1")])],
    );
    let f = parse_expr("G * m1 * m2 * (x1 - x2) / abs(x1 - x2) ^ 3").unwrap();
    assert!(!injectivity_check(&f, "F1", &v.checker));
    let r = synthesize_pre("F1", &f, &post, &budget(), &v).unwrap();
    let m = &r.pre.gens["s"];
    for (a, b) in [("x1", "x2"), ("m1", "m2"), ("v1", "v2")] {
        assert_eq!(m[a], SymbolicExpr::var(b));
        assert_eq!(m[b], SymbolicExpr::var(a));
    }
    assert_eq!(m["F1"], SymbolicExpr::var("F1"));
    assert_eq!(m["G"], SymbolicExpr::var("G"));
}

#[test]
fn result_is_deterministic_and_fuzzes_clean() {
    let v1 = setup(CAR_VARS);
    let v2 = setup(CAR_VARS);
    let f = parse_expr("v * cos(theta) * dt + x").unwrap();
    let a = synthesize_pre("x", &f, &translation(), &budget(), &v1).unwrap();
    let b = synthesize_pre("x", &f, &translation(), &budget(), &v2).unwrap();
    assert_eq!(a.pre.gens, b.pre.gens);
    assert_eq!(a.stats.candidates, b.stats.candidates);
    let t = SymmetryTriple::new(a.pre, crate::lang::Command::Assign("x".into(), f), translation(), a.hom).unwrap();
    let report = fuzz_soundness(&t, &v1.vars, 100, 3, &GroupContext::new(64));
    assert!(report.ok(), "{:?}", report.first_discrepancy);
}

#[test]
fn exhausted_grammar_reports_no_candidate() {
    let v = setup("var x, y: int;");
    // no state bijection makes x := 0 observe a shift of x
    let post = action(GroupPresentation::free("Z", &["g"]), &["x"], &[("g", &[("x", "x + 1")])]);
    let small = SynthBudget { depth: 2, ..budget() };
    match synthesize_pre("x", &parse_expr("0").unwrap(), &post, &small, &v) {
        Err(SynthError::NoCandidate { generator, .. }) => assert_eq!(generator, "g"),
        other => panic!("{:?}", other.map(|r| r.pre)),
    }
}

#[test]
fn straight_car_rotation_is_found() {
    let v = setup("var x, y: real;\nvar theta: angle;\nparam v: real;\nparam dt: real01;");
    let post = action(
        GroupPresentation::dihedral("D4", 4),
        &["x", "y", "theta"],
        &[
            ("r", &[("x", "-y"), ("y", "x"), ("theta", "theta + pi / 2")]),
            ("s", &[("y", "-y"), ("theta", "-theta")]),
        ],
    );
    let f = parse_expr("x + v * cos(theta) * dt").unwrap();
    let r = synthesize_pre("x", &f, &post, &budget(), &v).unwrap();
    assert_eq!(r.pre.group.generators, vec!["r".to_string(), "s".to_string()]);
    assert!(r.verdict.is_valid());
}
