use super::*;

fn fo(text: &str) -> Program {
    parse_program(text, Mode::FirstOrder).unwrap()
}

fn ho(text: &str) -> Program {
    parse_program(text, Mode::ClosedHigherOrder).unwrap()
}

fn tr(names: &[&str]) -> Trace {
    Trace::from_names(names.iter().map(|n| name(n)))
}

/// Runs monitored reduction, collecting every intermediate annotated term.
fn run(p: &Program, strategy: Strategy) -> (Vec<String>, Outcome) {
    let mut seen = vec![p.initial().render(p.mode())];
    let out = normalize_observed(p, strategy, Some(10_000), &mut |ev| {
        seen.push(ev.after.render(p.mode()));
    })
    .unwrap();
    (seen, out)
}

const LOOP: &str = "let rec loop(a) = loop(list(a)) in loop(int)";
const ID: &str = "let rec id(a) = a in id(id(int))";
const NIL: &str = "let rec nil(x) = x
    and g0(arg) = nil(g1)(arg)
    and g1(arg) = nil(arg)
in g0(fortytwo)";
const AAA: &str = "let rec a(x) = b and b(x) = x in a(a)(a)(a)";
const DELTA: &str = "let rec delta(x) = x(x) in delta(delta)";
const FPQ: &str = "let rec f(p, q) = p(f(q, q))
    and id(x) = x
    and stop(x) = done
in f(id, stop)";

#[test]
fn annotate_loop_body() {
    let p = fo(LOOP);
    let body = &p.lookup("loop").unwrap().body;
    let int = AnnTerm::app(AnnTerm::Sym(name("int")), vec![], Trace::empty());
    let subst = HashMap::from([(name("a"), int)]);
    let t = annotate(body, &subst, &tr(&["loop"]));
    assert_eq!(t.render(Mode::FirstOrder), "loop[loop](list[loop](int[]))");
}

#[test]
fn annotate_variable_keeps_annotations() {
    let u = AnnTerm::app(AnnTerm::Sym(name("c")), vec![], tr(&["g", "h"]));
    let subst = HashMap::from([(name("x"), u.clone())]);
    let t = annotate(&Term::var("x"), &subst, &tr(&["f"]));
    assert_eq!(t.render(Mode::FirstOrder), u.render(Mode::FirstOrder));
}

#[test]
fn annotate_empty_then_erase_is_identity() {
    let p = fo(ID);
    let t = annotate(p.root(), &HashMap::new(), &Trace::empty());
    assert_eq!(t.render(Mode::FirstOrder), "id[](id[](int[]))");
    assert_eq!(erase(&t), *p.root());
    assert_eq!(erase(&t).render(Mode::FirstOrder), "id(id(int))");
    assert_eq!(erase(&AnnTerm::Var(name("x"))), Term::var("x"));
}

#[test]
fn redexes_of_id_id_int() {
    let p = fo(ID);
    let r = find_redexes(&p, &p.initial());
    assert_eq!(
        r,
        vec![
            (Path::root(), RedexKind::Enabled),
            (Path(vec![1]), RedexKind::Enabled)
        ]
    );
    let none = fo("list(int)");
    assert!(find_redexes(&none, &none.initial()).is_empty());
}

#[test]
fn loop_reduces_once_then_blocks() {
    let p = fo(LOOP);
    let StepResult::Reduced { next, path, name: f } = step(&p, &p.initial(), Strategy::LeftmostOutermost)
    else {
        panic!("expected a step")
    };
    assert!(path.is_root());
    assert_eq!(&*f, "loop");
    assert_eq!(next.render(Mode::FirstOrder), "loop[loop](list[loop](int[]))");
    assert_eq!(find_redexes(&p, &next), vec![(Path::root(), RedexKind::Blocked)]);
    match step(&p, &next, Strategy::LeftmostOutermost) {
        StepResult::Blocked { path, name, trace } => {
            assert!(path.is_root());
            assert_eq!(&*name, "loop");
            assert_eq!(trace, tr(&["loop"]));
        }
        other => panic!("expected Blocked, got {other:?}"),
    }
}

#[test]
fn id_id_int_normalizes_in_two_steps() {
    for s in [Strategy::LeftmostOutermost, Strategy::LeftmostInnermost] {
        match normalize(&fo(ID), s) {
            Outcome::Normal { term, steps } => {
                assert_eq!(term.render(Mode::FirstOrder), "int");
                assert_eq!(steps, 2);
            }
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn loop_diverges_after_one_step() {
    match normalize(&fo(LOOP), Strategy::LeftmostOutermost) {
        Outcome::Diverges {
            name, trace, steps, ..
        } => {
            assert_eq!(&*name, "loop");
            assert_eq!(trace.to_string(), "[loop]");
            assert_eq!(steps, 1);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn nil_example_reaches_fortytwo() {
    let (seen, out) = run(&ho(NIL), Strategy::LeftmostOutermost);
    assert_eq!(
        seen,
        vec![
            "g0(fortytwo)[]",
            "nil(g1)[g0](fortytwo)[g0]",
            "g1(fortytwo)[g0]",
            // Displayed as `[g0]` in the original listing; the expansion of
            // g1 does extend the trace.
            "nil(fortytwo)[g0,g1]",
            "fortytwo",
        ]
    );
    assert!(out.is_normal());
    assert_eq!(out.steps(), 4);
}

#[test]
fn a_a_a_a_reaches_b() {
    let (seen, out) = run(&ho(AAA), Strategy::LeftmostOutermost);
    assert_eq!(seen, vec!["a(a)[](a)[](a)[]", "b(a)[](a)[]", "a(a)[]", "b"]);
    assert_eq!(out.steps(), 3);
    let Outcome::Normal { term, .. } = out else { panic!() };
    assert_eq!(term, Term::sym("b"));
}

#[test]
fn delta_delta_blocks_after_one_step() {
    let (seen, out) = run(&ho(DELTA), Strategy::LeftmostOutermost);
    assert_eq!(seen, vec!["delta(delta)[]", "delta(delta)[delta]"]);
    match out {
        Outcome::Diverges { name, steps, .. } => {
            assert_eq!(&*name, "delta");
            assert_eq!(steps, 1);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn f_id_stop_blocks_before_done() {
    let (seen, out) = run(&ho(FPQ), Strategy::LeftmostOutermost);
    assert_eq!(
        seen,
        vec!["f(id, stop)[]", "id(f(stop, stop)[f])[f]", "f(stop, stop)[f]"]
    );
    match out {
        Outcome::Diverges { name, trace, steps, .. } => {
            assert_eq!(&*name, "f");
            assert_eq!(trace, tr(&["f"]));
            assert_eq!(steps, 2);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn innermost_order_contracts_arguments_first() {
    let p = fo(ID);
    let StepResult::Reduced { path, .. } = step(&p, &p.initial(), Strategy::LeftmostInnermost) else {
        panic!()
    };
    assert_eq!(path, Path(vec![1]));
}

#[test]
fn blocked_redex_is_judged_in_strategy_order() {
    // Outermost, `k` discards the looping argument; innermost reaches the
    // blocked `loop` first, exactly where plain innermost reduction loops.
    let p = fo("let rec loop(a) = loop(a) and k(x, y) = x in k(int, loop(int))");
    let out = normalize(&p, Strategy::LeftmostOutermost);
    let Outcome::Normal { term, steps } = out else {
        panic!("{out:?}")
    };
    assert_eq!((term.render(Mode::FirstOrder).as_str(), steps), ("int", 1));
    let out = normalize(&p, Strategy::LeftmostInnermost);
    let Outcome::Diverges { name, path, steps, .. } = out else {
        panic!("{out:?}")
    };
    assert_eq!((&*name, path, steps), ("loop", Path(vec![2]), 1));
}

#[test]
fn arity_mismatch_in_first_order() {
    let err = parse_program(AAA, Mode::FirstOrder).unwrap_err();
    assert!(matches!(err, CalcError::ArityMismatch { .. }), "{err}");
    assert!(parse_program(AAA, Mode::ClosedHigherOrder).is_ok());
}

#[test]
fn parse_errors() {
    let err = parse_program("let rec id(a) = a in id(int", Mode::FirstOrder).unwrap_err();
    let CalcError::Syntax { pos, .. } = err else {
        panic!("{err:?}")
    };
    assert_eq!(pos.line, 1);
    assert!(matches!(
        parse_program("let rec f = a and f = b in f", Mode::FirstOrder),
        Err(CalcError::DuplicateDefinition { .. })
    ));
    assert!(matches!(
        parse_program("let rec f(x, x) = x in f(a, b)", Mode::FirstOrder),
        Err(CalcError::Syntax { .. })
    ));
    assert!(matches!(
        parse_program("Foo", Mode::FirstOrder),
        Err(CalcError::Syntax { .. })
    ));
    assert!(matches!(
        parse_program("let rec f(x) = x(x) in f(a)", Mode::FirstOrder),
        Err(CalcError::Syntax { .. })
    ));
}

#[test]
fn parse_simple_program() {
    let p = fo("let rec id(a) = a in id(int)  # comment");
    assert_eq!(p.defs().len(), 1);
    assert_eq!(p.root().head_name().map(|n| &**n), Some("id"));
    assert_eq!(p.render(), "let rec id(a) = a\nin id(int)\n");
    let again = fo(&p.render());
    assert_eq!(again.root(), p.root());
}

#[test]
fn traces_stay_valid() {
    let p = fo("let rec f(x) = g(h(x), x) and g(x, y) = f(y) and h(x) = c(x) in f(f(z))");
    let mut t = p.initial();
    loop {
        let mut ok = true;
        t.for_each_trace(&mut |l| {
            let names = l.names();
            for (i, n) in names.iter().enumerate() {
                ok &= p.lookup(n).is_some() && !names[..i].contains(n);
            }
        });
        assert!(ok);
        match step(&p, &t, Strategy::LeftmostOutermost) {
            StepResult::Reduced { next, .. } => t = next,
            _ => break,
        }
    }
}

#[test]
fn step_limit_is_reported() {
    let err = normalize_observed(&fo(ID), Strategy::LeftmostOutermost, Some(1), &mut |_| {}).unwrap_err();
    assert_eq!(err, CalcError::StepLimit(1));
}
