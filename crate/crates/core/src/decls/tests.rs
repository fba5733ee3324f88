use super::*;
use crate::calculus::{name, normalize, Outcome, Strategy};
use crate::shapes::SubShape;

fn fixture(file: &str) -> String {
    std::fs::read_to_string(format!("{}/fixtures/{file}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn check(text: &str) -> (Decls, Vec<CheckReport>) {
    let env = parse_decls(text).unwrap();
    let reports = check_decls(&env).unwrap();
    (env, reports)
}

fn verdict<'a>(reports: &'a [CheckReport], t: &str) -> &'a Verdict {
    &reports.iter().find(|r| &*r.decl == t).unwrap().verdict
}

fn int_shape() -> HeadShape {
    HeadShape::new(SubShape::Top, SubShape::empty())
}

#[test]
fn parses_zarith_and_id() {
    let env = parse_decls(&fixture("zarith.decl")).unwrap();
    assert_eq!(env.len(), 2);
    assert_eq!(
        env.get("gmp").unwrap().body,
        DeclBody::Abstract(Some(HeadShape::block([255])))
    );
    let env = parse_decls("type ('a) id = Id of 'a [@unboxed]").unwrap();
    let DeclBody::Variant(cs) = &env.get("id").unwrap().body else {
        panic!()
    };
    assert_eq!(cs.len(), 1);
    assert!(cs[0].unboxed);
    assert_eq!(env.get("id").unwrap().params, vec![name("'a")]);
}

#[test]
fn parse_errors() {
    assert!(matches!(
        parse_decls("type t = Foo of int of int"),
        Err(DeclError::Syntax { .. })
    ));
    assert!(matches!(
        parse_decls("type t = A\ntype t = B"),
        Err(DeclError::DuplicateTypeName { .. })
    ));
    assert!(matches!(
        parse_decls("type t = A | A"),
        Err(DeclError::DuplicateCtor { .. })
    ));
    let err = parse_decls("type t = A of nope").unwrap_err();
    let DeclError::UnboundTypeName { name, pos } = err else {
        panic!("{err:?}")
    };
    assert_eq!((name.as_str(), pos.line, pos.col), ("nope", 1, 15));
    assert!(matches!(
        parse_decls("type 'a id = Id of 'a\ntype t = A of id"),
        Err(DeclError::ArityMismatch { expected: 1, found: 0, .. })
    ));
    assert!(matches!(
        parse_decls("type t = A of 'b"),
        Err(DeclError::UnboundTypeVariable { .. })
    ));
    assert!(matches!(
        parse_decls("type t = A of int * int [@unboxed]"),
        Err(DeclError::UnboxedArity { .. })
    ));
    assert!(matches!(
        parse_decls("type t [@shape (imm: {}; block: {300})]"),
        Err(DeclError::Shape { .. })
    ));
    assert!(matches!(parse_decls("type t = (* open"), Err(DeclError::Syntax { .. })));
}

#[test]
fn declared_names_shadow_primitives() {
    let env = parse_decls("type int = I\ntype t = A of int [@unboxed] | B").unwrap();
    let DeclBody::Variant(cs) = &env.get("t").unwrap().body else {
        panic!()
    };
    assert!(matches!(cs[0].args[0], TypeExpr::App(..)));
    let (_, reports) = check("type int = I\ntype t = A of int [@unboxed] | B");
    assert!(matches!(verdict(&reports, "t"), Verdict::RejectedConflict(_)));
}

#[test]
fn qualified_type_names() {
    let (_, reports) = check("type Gmp.t [@shape (imm: {}; block: {255})]\ntype z = S of int [@unboxed] | B of Gmp.t [@unboxed]");
    assert!(verdict(&reports, "z").is_accepted());
}

#[test]
fn zarith_is_accepted() {
    let (env, reports) = check(&fixture("zarith.decl"));
    assert_eq!(
        verdict(&reports, "zarith"),
        &Verdict::Accepted {
            shape: HeadShape::new(SubShape::Top, SubShape::of([255])),
            unboxed: vec![(name("Small"), int_shape()), (name("Big"), HeadShape::block([255]))],
        }
    );
    let small = match_plan(&env, &reports, "zarith", "Small").unwrap();
    assert!(small.matches(crate::shapes::Head::Imm(5)));
    assert!(!small.matches(crate::shapes::Head::Block(255)));
    let big = match_plan(&env, &reports, "zarith", "Big").unwrap();
    assert_eq!(big.test, HeadShape::block([255]));
}

#[test]
fn clash_is_rejected_with_imm_witness() {
    let (env, reports) = check(&fixture("clash.decl"));
    let Verdict::RejectedConflict(w) = verdict(&reports, "clash") else {
        panic!()
    };
    assert_eq!(w.side, Side::Imm);
    assert_eq!(w.value, Overlap::Top);
    assert_eq!(w.left.ctor.as_deref(), Some("Int"));
    assert_eq!(w.right.ctor.as_deref(), Some("Also_int"));
    assert!(render_reports(&reports).contains("overlapping representations"));
    assert!(matches!(
        match_plan(&env, &reports, "clash", "Int"),
        Err(DeclError::DeclNotAccepted(_))
    ));
}

#[test]
fn cycles_are_rejected() {
    let (_, reports) = check(&fixture("loop.decl"));
    let Verdict::RejectedCycle(c) = verdict(&reports, "loop") else {
        panic!()
    };
    assert_eq!(&*c.name, "loop");
    assert_eq!(c.trace.to_string(), "[loop]");
    let path: Vec<&str> = c.path.iter().map(|n| &**n).collect();
    assert_eq!(path, ["loop", "id", "loop"]);
    assert!(verdict(&reports, "id").is_accepted());
    for f in ["harmful.decl", "harmless.decl"] {
        let (_, reports) = check(&fixture(f));
        assert!(matches!(reports[0].verdict, Verdict::RejectedCycle(_)), "{f}");
    }
}

#[test]
fn rope_is_accepted() {
    let (env, reports) = check(&fixture("rope.decl"));
    assert_eq!(
        verdict(&reports, "rope"),
        &Verdict::Accepted {
            shape: HeadShape::block([0, 252]),
            unboxed: vec![(name("Leaf"), HeadShape::block([252]))],
        }
    );
    let branch = match_plan(&env, &reports, "rope", "Branch").unwrap();
    assert_eq!(branch.test, HeadShape::block([0]));
}

#[test]
fn handle_normal_form() {
    let (env, reports) = check(&fixture("handle.decl"));
    let snf = normalize_type(&TypeExpr::App(name("handle"), vec![]), &env).unwrap();
    assert_eq!(snf.to_string(), "int + string + Opaque of string");
    assert_eq!(
        verdict(&reports, "handle"),
        &Verdict::Accepted {
            shape: HeadShape::new(SubShape::Top, SubShape::of([0, 252])),
            unboxed: vec![(name("By_number"), int_shape()), (name("By_name"), HeadShape::block([252]))],
        }
    );
    assert_eq!(verdict(&reports, "num"), &Verdict::Accepted { shape: int_shape(), unboxed: vec![] });
}

#[test]
fn variables_and_empty_sums() {
    let env = parse_decls("type 'a option = None | Some of 'a\ntype empty = |").unwrap();
    let v = normalize_type(&TypeExpr::Var(name("'a")), &env).unwrap();
    assert_eq!(v, SumNf(vec![Component::Var(name("'a"))]));
    let e = normalize_type(&TypeExpr::App(name("empty"), vec![]), &env).unwrap();
    assert_eq!(e, SumNf::default());
    assert_eq!(shape_of_snf(&e, &env).unwrap(), Ok(HeadShape::empty()));
    let opt = normalize_type(&env.get("option").unwrap().generic(), &env).unwrap();
    assert_eq!(shape_of_snf(&opt, &env).unwrap(), Ok(HeadShape::new(SubShape::of([0]), SubShape::of([0]))));
}

#[test]
fn two_variables_conflict() {
    let (_, reports) = check("type ('a, 'b) either = L of 'a [@unboxed] | R of 'b [@unboxed]");
    let Verdict::RejectedConflict(w) = &reports[0].verdict else {
        panic!()
    };
    assert_eq!((w.side, w.value), (Side::Imm, Overlap::Top));
}

#[test]
fn misc_fixture_is_accepted() {
    let (env, reports) = check(&fixture("misc.decl"));
    for r in &reports {
        assert!(r.verdict.is_accepted(), "{}: {:?}", r.decl, r.verdict);
    }
    let Verdict::Accepted { shape, .. } = verdict(&reports, "suspended") else {
        panic!()
    };
    assert_eq!(shape, &HeadShape::new(SubShape::of([0, 1]), SubShape::of([244, 246, 250, 253])));
    let plans = match_plans(&env, &reports, "rel_num").unwrap();
    let tests: Vec<String> = plans.iter().map(|p| p.test.to_string()).collect();
    assert_eq!(tests, ["(imm: {}, block: {0})", "(imm: {0}, block: {})", "(imm: {}, block: {1})"]);
    assert_eq!(
        verdict(&reports, "weird"),
        &Verdict::Accepted {
            shape: HeadShape::top(),
            unboxed: vec![(name("Loop"), HeadShape::top())]
        }
    );
}

#[test]
fn lazy_argument_is_monitored() {
    let (_, reports) = check("type t = A of t lazy [@unboxed]");
    assert!(matches!(reports[0].verdict, Verdict::RejectedCycle(_)));
    let (_, reports) = check("type t = A of t array [@unboxed] | B");
    assert!(reports[0].verdict.is_accepted());
}

#[test]
fn unknown_ctor_in_match_plan() {
    let (env, reports) = check(&fixture("zarith.decl"));
    assert!(matches!(
        match_plan(&env, &reports, "zarith", "Huge"),
        Err(DeclError::UnknownCtor { .. })
    ));
}

#[test]
fn translation_matches_unfolding() {
    for f in ["zarith.decl", "loop.decl", "handle.decl", "misc.decl", "harmful.decl", "rope.decl"] {
        let env = parse_decls(&fixture(f)).unwrap();
        let prog = translate_to_program(&env);
        for d in env.decls() {
            let p = prog.with_root(type_term(&d.generic(), &env)).unwrap();
            let calc = normalize(&p, Strategy::LeftmostOutermost);
            match (normalize_type(&d.generic(), &env), calc) {
                (Ok(snf), Outcome::Normal { term, .. }) => {
                    assert_eq!(read_back(&term, &env).unwrap(), component_keys(&snf), "{f}: {}", d.name)
                }
                (Err(c), Outcome::Diverges { name, trace, .. }) => {
                    assert_eq!((c.name, c.trace), (name, trace), "{f}: {}", d.name)
                }
                (a, b) => panic!("{f}: {}: {a:?} vs {b:?}", d.name),
            }
        }
    }
}

#[test]
fn translation_of_handle() {
    let env = parse_decls(&fixture("handle.decl")).unwrap();
    let prog = translate_to_program(&env);
    assert_eq!(
        prog.render(),
        "let rec num() = int\n    and name() = string\n    and id('a) = 'a\n    and handle() = Sum(id(int), Sum(name, Box(handle.Opaque)))\nin num\n"
    );
}

#[test]
fn reports_render_deterministically() {
    let text = fixture("misc.decl");
    let a = render_reports(&check(&text).1);
    let b = render_reports(&check(&text).1);
    assert_eq!(a, b);
}
