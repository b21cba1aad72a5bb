use super::*;
use crate::expr::SymbolicExpr;
use crate::lang::{Domain, Role, VarDecl, VarTable};
use crate::smt::{Checker, SolverConfig};
use proptest::prelude::*;

fn vars(names: &[(&str, Domain)]) -> VarTable {
    names
        .iter()
        .map(|(n, d)| (n.to_string(), VarDecl { name: n.to_string(), domain: d.clone(), role: Role::Program }))
        .collect()
}

fn checker(names: &[(&str, Domain)]) -> Checker {
    Checker::new(&vars(names), SolverConfig::default())
}

fn map(pairs: &[(&str, SymbolicExpr)]) -> SymMap {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn v(n: &str) -> SymbolicExpr {
    SymbolicExpr::var(n)
}

fn swap_action(name: &str, a: &str, b: &str) -> GroupAction {
    let g = GroupPresentation::cyclic("S2", "g", 2);
    GroupAction::new(name, g, vec![a.into(), b.into()], [("g".to_string(), map(&[(a, v(b)), (b, v(a))]))].into(), true)
        .unwrap()
}

/// Dihedral oracle: (k, f) is r^k s^f with s r = r^-1 s.
fn dihedral_oracle(n: i64, w: &Word) -> (i64, i64) {
    let (mut k, mut f) = (0i64, 0i64);
    for (g, e) in w.letters() {
        match g {
            "r" => k = (k + if f == 0 { e } else { -e }).rem_euclid(n),
            "s" => f ^= 1,
            _ => unreachable!(),
        }
    }
    (k, f)
}

/// Permutation oracle for S_n: s_i swaps positions i-1 and i; words act
/// left to right on the arrangement.
fn perm_oracle(n: usize, w: &Word) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for (g, _) in w.letters() {
        let i: usize = g[1..].parse().unwrap();
        p.swap(i - 1, i);
    }
    p
}

#[test]
fn enumerates_small_groups() {
    let cases = [
        (GroupPresentation::trivial(), 1),
        (GroupPresentation::cyclic("C7", "g", 7), 7),
        (GroupPresentation::symmetric("S2", 2), 2),
        (GroupPresentation::symmetric("S3", 3), 6),
        (GroupPresentation::symmetric("S4", 4), 24),
        (GroupPresentation::dihedral("D4", 4), 8),
        (GroupPresentation::dihedral("D6", 6), 12),
    ];
    for (g, n) in cases {
        let t = enumerate(&g, DEFAULT_MAX_ELEMS).unwrap();
        assert_eq!(t.size(), n, "{}", g.name);
        assert!(t.check_unit_and_inverse());
        assert!(t.check_associativity(64, 2000, 1));
    }
}

#[test]
fn enumerates_d1024() {
    let t = enumerate(&GroupPresentation::dihedral("D1024", 1024), DEFAULT_MAX_ELEMS).unwrap();
    assert_eq!(t.size(), 2048);
    assert!(t.check_unit_and_inverse());
    assert!(t.check_associativity(0, 5000, 7));
}

#[test]
fn bound_exceeded_for_large_and_infinite_groups() {
    let s8 = GroupPresentation::symmetric("S8", 8);
    assert!(matches!(enumerate(&s8, DEFAULT_MAX_ELEMS), Err(GroupError::BoundExceeded { .. })));
    let z = GroupPresentation::free("Z", &["t"]);
    assert!(matches!(enumerate(&z, 100), Err(GroupError::BoundExceeded { .. })));
    let d4 = GroupPresentation::dihedral("D4", 4);
    assert!(matches!(enumerate(&d4, 7), Err(GroupError::BoundExceeded { .. })));
    assert_eq!(enumerate(&d4, 8).unwrap().size(), 8);
}

#[test]
fn dihedral_table_matches_oracle() {
    for n in [3i64, 4, 5, 8] {
        let t = enumerate(&GroupPresentation::dihedral("D", n), DEFAULT_MAX_ELEMS).unwrap();
        let img: Vec<(i64, i64)> = t.elements().iter().map(|w| dihedral_oracle(n, w)).collect();
        let distinct: std::collections::BTreeSet<_> = img.iter().collect();
        assert_eq!(distinct.len(), t.size());
        for a in 0..t.size() {
            for b in 0..t.size() {
                let prod = t.word(a).mul(t.word(b));
                assert_eq!(img[t.mul(a, b)], dihedral_oracle(n, &prod));
            }
        }
    }
}

#[test]
fn symmetric_table_matches_oracle() {
    let t = enumerate(&GroupPresentation::symmetric("S4", 4), DEFAULT_MAX_ELEMS).unwrap();
    let img: Vec<Vec<usize>> = t.elements().iter().map(|w| perm_oracle(4, w)).collect();
    let distinct: std::collections::BTreeSet<_> = img.iter().collect();
    assert_eq!(distinct.len(), 24);
    for a in 0..24 {
        for b in 0..24 {
            assert_eq!(img[t.mul(a, b)], perm_oracle(4, &t.word(a).mul(t.word(b))));
        }
    }
}

#[test]
fn element_words_are_shortlex_and_round_trip() {
    let t = enumerate(&GroupPresentation::dihedral("D4", 4), DEFAULT_MAX_ELEMS).unwrap();
    for i in 0..t.size() {
        assert_eq!(t.index_of(t.word(i)), Some(i));
        if i > 0 {
            assert!(t.word(i - 1).len() <= t.word(i).len());
        }
    }
    assert!(t.word(0).is_identity());
    assert_eq!(t.order(t.generator(0, 1)), 4);
    assert_eq!(t.order(t.generator(1, 1)), 2);
}

#[test]
fn context_caches_and_logs_requests() {
    let ctx = GroupContext::default();
    let d4 = GroupPresentation::dihedral("D4", 4);
    assert_eq!(ctx.table(&d4).unwrap().size(), 8);
    assert_eq!(ctx.table(&d4).unwrap().size(), 8);
    assert_eq!(ctx.enumeration_requests(), vec!["D4".to_string(), "D4".to_string()]);
}

#[test]
fn presentation_validation() {
    assert!(GroupPresentation::new("G", vec!["e".into()], vec![]).is_err());
    assert!(GroupPresentation::new("G", vec!["a".into(), "a".into()], vec![]).is_err());
    assert!(GroupPresentation::new("G", vec!["a".into()], vec![(Word::gen("b"), Word::identity())]).is_err());
}

#[test]
fn parses_words() {
    let gens: std::collections::BTreeSet<String> = ["r".to_string(), "s".to_string()].into();
    let parse = |s: &str| {
        let toks = crate::lang::lexer::tokenize(s).unwrap();
        let mut cur = crate::lang::lexer::Cursor::new(toks);
        parse_word(&mut cur, &gens).unwrap()
    };
    assert_eq!(parse("r^4"), Word::power("r", 4));
    assert_eq!(parse("r s"), Word::gen("r").mul(&Word::gen("s")));
    assert_eq!(parse("s * r^-1"), Word::gen("s").mul(&Word::power("r", -1)));
    assert_eq!(parse("(r s)^2"), Word::from_syllables([("r", 1), ("s", 1), ("r", 1), ("s", 1)]));
    assert_eq!(parse("r r^-1"), Word::identity());
    assert_eq!(parse("e"), Word::identity());
}

#[test]
fn swap_is_an_action() {
    let c = checker(&[("x", Domain::Int), ("y", Domain::Int)]);
    let ctx = GroupContext::default();
    assert!(check_action(&swap_action("swap", "x", "y"), &c, &ctx).is_ok());
}

#[test]
fn translation_under_involution_is_not_an_action() {
    let c = checker(&[("x", Domain::Int)]);
    let ctx = GroupContext::default();
    let g = GroupPresentation::cyclic("S2", "g", 2);
    let a = GroupAction::new("shift", g, vec!["x".into()], [("g".into(), map(&[("x", v("x") + SymbolicExpr::one())]))].into(), false)
        .unwrap();
    match check_action(&a, &c, &ctx) {
        Err(GroupError::NotAnAction { variable, counterexample, .. }) => {
            assert_eq!(variable, "x");
            assert!(counterexample.is_some());
        }
        other => panic!("{:?}", other),
    }
}

fn rotation_action(n: i64) -> GroupAction {
    use crate::expr::Op;
    let q = SymbolicExpr::ratio(2, n) * SymbolicExpr::pi();
    let (c, s) = (SymbolicExpr::unary(Op::Cos, q.clone()), SymbolicExpr::unary(Op::Sin, q.clone()));
    let r = map(&[
        ("x", c.clone() * v("x") - s.clone() * v("y")),
        ("y", s * v("x") + c * v("y")),
        ("th", v("th") + q),
    ]);
    let sm = map(&[("y", -v("y")), ("th", -v("th"))]);
    GroupAction::new(
        "rot",
        GroupPresentation::dihedral(&format!("D{}", n), n),
        vec!["x".into(), "y".into(), "th".into()],
        [("r".into(), r), ("s".into(), sm)].into(),
        true,
    )
    .unwrap()
}

#[test]
fn dihedral_rotation_actions_are_valid() {
    let c = checker(&[("x", Domain::Real), ("y", Domain::Real), ("th", Domain::Angle)]);
    let ctx = GroupContext::default();
    for n in [4, 8, 32] {
        let r = check_action(&rotation_action(n), &c, &ctx); assert!(r.is_ok(), "D{} {:?}", n, r);
    }
}

#[test]
fn affine_inverses_are_derived() {
    let ctx = GroupContext::default();
    let a = rotation_action(4);
    let inv = a.gen_map("r", -1, &ctx).unwrap();
    let id = a.word_map(&Word::gen("r").mul(&Word::power("r", -1)), &ctx).unwrap();
    for x in ["x", "y", "th"] {
        assert_eq!(id[x], v(x));
    }
    assert_eq!(inv["y"], crate::expr::simplify(&-v("x")));
}

#[test]
fn modular_inverse_wraps() {
    let c = checker(&[("h", Domain::IntMod(360.into()))]);
    let ctx = GroupContext::default();
    let g = GroupPresentation::cyclic("C4", "q", 4);
    let m = map(&[("h", SymbolicExpr::modulo(v("h") + SymbolicExpr::int(90), SymbolicExpr::int(360)))]);
    let a = GroupAction::new("quarter", g, vec!["h".into()], [("q".into(), m)].into(), true).unwrap();
    assert!(check_action(&a, &c, &ctx).is_ok());
    let inv = a.gen_map("q", -1, &ctx).unwrap();
    let vars = vars(&[("h", Domain::IntMod(360.into()))]);
    let s: crate::expr::ConcState = [("h".to_string(), crate::expr::Scalar::int(30))].into();
    let out = a.apply_conc(&Word::power("q", -1), &s, &vars, &ctx).unwrap();
    assert_eq!(out["h"], crate::expr::Scalar::int(300));
    assert!(inv["h"].to_string().contains("mod"));
}

#[test]
fn nonaffine_inverse_uses_group_order() {
    use crate::expr::Op;
    let ctx = GroupContext::default();
    let g = GroupPresentation::cyclic("S2", "g", 2);
    let m = map(&[("x", SymbolicExpr::unary(Op::Abs, v("x")))]);
    let a = GroupAction::new("abs", g, vec!["x".into()], [("g".into(), m.clone())].into(), false).unwrap();
    assert_eq!(a.gen_map("g", -1, &ctx).unwrap(), m);
    let z = GroupPresentation::free("Z", &["g"]);
    let b = GroupAction::new("abs", z, vec!["x".into()], [("g".into(), m)].into(), false).unwrap();
    assert!(matches!(b.gen_map("g", -1, &ctx), Err(GroupError::NoInverse { .. })));
}

#[test]
fn lifting_fixes_other_variables() {
    let a = swap_action("swap", "x", "y");
    let all: std::collections::BTreeSet<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
    let l = lift(&a, &all);
    assert_eq!(l.gens["g"]["z"], v("z"));
    assert_eq!(l.gens["g"]["x"], v("y"));
}

#[test]
fn products_of_actions() {
    let c = checker(&[("a", Domain::Int), ("b", Domain::Int), ("c", Domain::Int), ("d", Domain::Int)]);
    let ctx = GroupContext::default();
    let p = direct_product(&swap_action("ab", "a", "b"), &swap_action("cd", "c", "d"), &c, &ctx).unwrap();
    assert_eq!(p.group.generators, vec!["g_1".to_string(), "g_2".to_string()]);
    assert!(check_action(&p, &c, &ctx).is_ok());
    assert_eq!(ctx.table(&p.group).unwrap().size(), 4);
    // overlapping swaps (a b) and (b c) do not commute
    let e = direct_product(&swap_action("ab", "a", "b"), &swap_action("bc", "b", "c"), &c, &ctx);
    assert!(matches!(e, Err(GroupError::NonCommutingActions { .. })));
    let f = free_product(&swap_action("ab", "a", "b"), &swap_action("bc", "b", "c"));
    assert!(check_action(&f, &c, &ctx).is_ok());
    assert!(f.factors.is_some());
}

#[test]
fn hom_checks() {
    let ctx = GroupContext::default();
    let d4 = GroupPresentation::dihedral("D4", 4);
    let eq = builtin_hom(HomKind::Eq, &d4, &d4, &ctx).unwrap();
    assert!(eq.is_identity_map());
    assert!(builtin_hom(HomKind::EStar, &d4, &GroupPresentation::trivial(), &ctx).is_ok());
    let imgs = |r: Word, s: Word| -> std::collections::BTreeMap<String, Word> { [("r".into(), r), ("s".into(), s)].into() };
    // r ↦ r, s ↦ r sends s^2 to r^2
    let bad = Homomorphism::new("bad", d4.clone(), d4.clone(), imgs(Word::gen("r"), Word::gen("r"))).unwrap();
    assert!(matches!(hom_check(&bad, &ctx), Err(GroupError::NotAHomomorphism { .. })));
    // r ↦ s, s ↦ s respects every relation
    let ss = Homomorphism::new("ss", d4.clone(), d4.clone(), imgs(Word::gen("s"), Word::gen("s"))).unwrap();
    assert!(hom_check(&ss, &ctx).is_ok());
    // r ↦ r^-1, s ↦ s is an automorphism
    let auto = Homomorphism::new("inv", d4.clone(), d4.clone(), imgs(Word::power("r", -1), Word::gen("s"))).unwrap();
    assert!(hom_check(&auto, &ctx).is_ok());
}

#[test]
fn hom_into_infinite_targets() {
    let ctx = GroupContext::default();
    let c2 = GroupPresentation::cyclic("C2", "g", 2);
    let z = GroupPresentation::free("Z", &["t"]);
    let h = Homomorphism::new("h", c2.clone(), z.clone(), [("g".into(), Word::gen("t"))].into()).unwrap();
    assert!(matches!(hom_check(&h, &ctx), Err(GroupError::NotAHomomorphism { .. })));
    let z2 = GroupPresentation::product(ProductKind::Direct, &z, &GroupPresentation::free("Z'", &["u"]));
    // Z×Z is free abelian: commutators vanish
    let sw = Homomorphism::new("sw", z2.clone(), z2.clone(), [("t".into(), Word::gen("u")), ("u".into(), Word::gen("t"))].into())
        .unwrap();
    assert!(hom_check(&sw, &ctx).is_ok());
    assert_eq!(word_is_identity(&z2, &Word::from_syllables([("t", 1), ("u", 1), ("t", -1)]), &ctx), Some(false));
}

#[test]
fn hom_constructions() {
    let ctx = GroupContext::default();
    let d4 = GroupPresentation::dihedral("D4", 4);
    let c2 = GroupPresentation::cyclic("C2", "g", 2);
    let p = GroupPresentation::product(ProductKind::Direct, &d4, &c2);
    let p1 = builtin_hom(HomKind::Proj1, &p, &d4, &ctx).unwrap();
    assert_eq!(p1.images["g"], Word::identity());
    let p2 = builtin_hom(HomKind::Proj2, &p, &c2, &ctx).unwrap();
    assert_eq!(p2.images["r"], Word::identity());
    assert!(builtin_hom(HomKind::Proj1, &d4, &d4, &ctx).is_err());
    let eq = builtin_hom(HomKind::Eq, &d4, &d4, &ctx).unwrap();
    let comp = hom_compose(&eq, &p1).unwrap();
    assert_eq!(comp.images, p1.images);
    assert!(hom_compose(&p1, &eq).is_err());
    let pair = hom_product(&eq, &eq).unwrap();
    assert!(hom_check(&pair, &ctx).is_ok());
    assert_eq!(hom_power(&eq, 1000).unwrap().images, eq.images);
    let auto = Homomorphism::new("inv", d4.clone(), d4.clone(), [("r".into(), Word::power("r", -1)), ("s".into(), Word::gen("s"))].into())
        .unwrap();
    let sq = hom_power(&auto, 2).unwrap();
    assert_eq!(sq.images["r"], Word::gen("r"));
    let fp = hom_free_product(&eq, &builtin_hom(HomKind::Eq, &c2, &c2, &ctx).unwrap()).unwrap();
    assert!(hom_check(&fp, &ctx).is_ok());
    let e = builtin_hom(HomKind::EMinus, &GroupPresentation::trivial(), &d4, &ctx).unwrap();
    assert!(e.images.is_empty());
    assert!(builtin_hom(HomKind::EMinus, &c2, &d4, &ctx).is_err());
}

#[test]
fn entailment() {
    let c = checker(&[("x", Domain::Int), ("y", Domain::Int), ("z", Domain::Int)]);
    let ctx = GroupContext::default();
    let s2 = GroupPresentation::cyclic("S2", "g", 2);
    let swap_xy = swap_action("xy", "x", "y");
    let eq = builtin_hom(HomKind::Eq, &s2, &s2, &ctx).unwrap();
    // swapping x,y while negating z entails the swap on {x, y}
    let m = map(&[("x", v("y")), ("y", v("x")), ("z", -v("z"))]);
    let big = GroupAction::new("big", s2.clone(), vec!["x".into(), "y".into(), "z".into()], [("g".into(), m)].into(), true).unwrap();
    assert!(entails(&big, &swap_xy, &eq, &c, &ctx).is_ok());
    // but not the other way round
    assert!(matches!(entails(&swap_xy, &big, &eq, &c, &ctx), Err(GroupError::VarsNotSubset { .. })));
    // the swap on {y, z} is not implied
    let swap_yz = swap_action("yz", "y", "z");
    assert!(matches!(entails(&big, &swap_yz, &eq, &c, &ctx), Err(GroupError::NotEntailed { .. })));
    // anything entails the trivial action through e*
    let triv = GroupAction::identity("triv", GroupPresentation::trivial(), vec!["x".into()]);
    let es = builtin_hom(HomKind::EStar, &s2, &GroupPresentation::trivial(), &ctx).unwrap();
    assert!(entails(&swap_xy, &triv, &es, &c, &ctx).is_err());
    let triv_z = GroupAction::identity("triv", GroupPresentation::trivial(), vec!["z".into()]);
    assert!(entails(&swap_xy, &triv_z, &es, &c, &ctx).is_err());
    let triv_z = GroupAction::identity("triv", GroupPresentation::trivial(), vec![]);
    assert!(entails(&swap_xy, &triv_z, &es, &c, &ctx).is_ok());
}

fn word_strategy() -> impl Strategy<Value = Word> {
    prop::collection::vec((prop::sample::select(vec!["r", "s"]), -3i64..=3), 0..8).prop_map(|v| Word::from_syllables(v))
}

proptest! {
    #[test]
    fn word_group_laws(a in word_strategy(), b in word_strategy(), c in word_strategy()) {
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert!(a.mul(&a.inverse()).is_identity());
        prop_assert_eq!(a.mul(&b).inverse(), b.inverse().mul(&a.inverse()));
        prop_assert_eq!(Word::from_letters(a.letters()), a.clone());
    }

    #[test]
    fn dihedral_orders(n in 1i64..40) {
        let t = enumerate(&GroupPresentation::dihedral("D", n), DEFAULT_MAX_ELEMS).unwrap();
        prop_assert_eq!(t.size() as i64, 2 * n);
    }

    #[test]
    fn identity_decision_agrees_with_oracle(w in word_strategy()) {
        let ctx = GroupContext::default();
        let d5 = GroupPresentation::dihedral("D5", 5);
        let expect = dihedral_oracle(5, &w) == (0, 0);
        prop_assert_eq!(word_is_identity(&d5, &w, &ctx), Some(expect));
        prop_assert_eq!(word_is_identity(&d5, &w.mul(&w.inverse()), &ctx), Some(true));
    }

    #[test]
    fn rotation_action_matches_concrete_composition(w in word_strategy(), x in -20i64..20, y in -20i64..20) {
        use crate::expr::Scalar;
        let ctx = GroupContext::default();
        let a = rotation_action(4);
        let vt = vars(&[("x", Domain::Real), ("y", Domain::Real), ("th", Domain::Angle)]);
        let s: crate::expr::ConcState = [("x".to_string(), Scalar::int(x)), ("y".to_string(), Scalar::int(y)), ("th".to_string(), Scalar::int(0))].into();
        let conc = a.apply_conc(&w, &s, &vt, &ctx).unwrap();
        let sym = a.word_map(&w, &ctx).unwrap();
        for var in ["x", "y"] {
            let e = crate::expr::eval(&sym[var], &s).unwrap();
            prop_assert!(e.approx_eq(&conc[var], 1e-9));
        }
    }
}

