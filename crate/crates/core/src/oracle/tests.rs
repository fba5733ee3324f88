use super::selftest::{self, ID, LOOP};
use super::*;
use crate::calculus::{parse_program, Mode, Term};
use crate::decls::{check_decls, parse_decls, TypeExpr};
use crate::shapes::Head;

fn fo(text: &str) -> Program {
    parse_program(text, Mode::FirstOrder).unwrap()
}

fn normal(o: FuelOutcome) -> (String, u64) {
    match o {
        FuelOutcome::Normal { term, steps } => (term.render(Mode::FirstOrder), steps),
        FuelOutcome::OutOfFuel => panic!("out of fuel"),
    }
}

#[test]
fn fuel_normalize_basics() {
    let p = fo(ID);
    for s in [Strategy::LeftmostOutermost, Strategy::LeftmostInnermost] {
        assert_eq!(normal(fuel_normalize(&p, s, 10).unwrap()), ("int".into(), 2));
    }
    assert_eq!(fuel_normalize(&p, Strategy::LeftmostOutermost, 1).unwrap(), FuelOutcome::OutOfFuel);
    assert_eq!(fuel_normalize(&fo(LOOP), Strategy::LeftmostOutermost, 100).unwrap(), FuelOutcome::OutOfFuel);
    assert_eq!(fuel_normalize(&p, Strategy::LeftmostOutermost, 0), Err(OracleError::NoFuel));
}

#[test]
fn strategies_differ_on_discarded_loops() {
    let p = fo("let rec loop(a) = loop(a) and k(x, y) = x in k(int, loop(int))");
    assert_eq!(normal(fuel_normalize(&p, Strategy::LeftmostOutermost, 50).unwrap()), ("int".into(), 1));
    assert_eq!(fuel_normalize(&p, Strategy::LeftmostInnermost, 50).unwrap(), FuelOutcome::OutOfFuel);
}

#[test]
fn shared_arguments_are_charged_per_occurrence() {
    // dup(x) = pair(x, x): the argument id(int) is reduced twice.
    let p = fo("let rec id(a) = a and dup(x) = pair(x, x) in dup(id(int))");
    assert_eq!(
        normal(fuel_normalize(&p, Strategy::LeftmostOutermost, 10).unwrap()),
        ("pair(int, int)".into(), 3)
    );
    assert_eq!(
        normal(fuel_normalize(&p, Strategy::LeftmostInnermost, 10).unwrap()),
        ("pair(int, int)".into(), 2)
    );
    assert_eq!(fuel_normalize(&p, Strategy::LeftmostOutermost, 2).unwrap(), FuelOutcome::OutOfFuel);
}

#[test]
fn deep_divergence_does_not_overflow() {
    let p = fo("let rec f(x) = s(f(s(x))) in f(zero)");
    for s in [Strategy::LeftmostOutermost, Strategy::LeftmostInnermost] {
        assert_eq!(fuel_normalize(&p, s, 100_000).unwrap(), FuelOutcome::OutOfFuel);
    }
    let p = fo("let rec f(x) = f(pair(x, x)) in f(zero)");
    assert_eq!(fuel_normalize(&p, Strategy::LeftmostOutermost, 100_000).unwrap(), FuelOutcome::OutOfFuel);
}

#[test]
fn plain_steps_follow_the_strategy() {
    let p = fo(ID);
    let (path, f, next) = plain_step(&p, p.root(), Strategy::LeftmostInnermost).unwrap();
    assert_eq!((path, &*f, next.render(Mode::FirstOrder)), (Path(vec![1]), "id", "id(int)".into()));
    assert!(beta_step_at(&p, p.root(), &Path(vec![1, 1])).is_none());
}

#[test]
fn naive_monitors() {
    let loop_p = fo(LOOP);
    let id_p = fo(ID);
    let s = Strategy::LeftmostOutermost;
    assert_eq!(naive_whole_term_monitor(&loop_p, s, 1000), MonitorOutcome::Undecided { steps: 1000 });
    assert_eq!(
        naive_whole_term_monitor(&id_p, s, 1000),
        MonitorOutcome::Normal { term: "int".into(), steps: 2 }
    );
    let w = fo("let rec w() = w in w");
    assert!(matches!(naive_whole_term_monitor(&w, s, 1000), MonitorOutcome::Blocked { step: 2, .. }));
    assert!(matches!(head_function_monitor(&loop_p, s, 1000), MonitorOutcome::Blocked { step: 2, .. }));
    assert_eq!(
        head_function_monitor(&id_p, s, 1000),
        MonitorOutcome::Blocked {
            name: "id".into(),
            step: 2,
            term: "id(int)".into()
        }
    );
    assert_eq!(
        head_function_monitor(&fo("pair(a, b)"), s, 10),
        MonitorOutcome::Normal { term: "pair(a, b)".into(), steps: 0 }
    );
    assert!(selftest::check_monitors().passed());
}

#[test]
fn generators_are_deterministic() {
    let params = GenParams::default();
    let a: Vec<String> = gen_programs(42, &params, 20).iter().map(Program::render).collect();
    let b: Vec<String> = gen_programs(42, &params, 20).iter().map(Program::render).collect();
    assert_eq!(a, b);
    assert_eq!(gen_macros(42, &params, 20), gen_macros(42, &params, 20));
    assert_eq!(gen_decls(42, &params, 20), gen_decls(42, &params, 20));
    let hi = gen_programs(7, &params.higher_order(), 5);
    assert!(hi.iter().all(|p| p.mode() == Mode::ClosedHigherOrder));
}

#[test]
fn no_definitions_means_free_root() {
    let params = GenParams {
        max_defs: 0,
        ..GenParams::default()
    };
    for p in gen_programs(3, &params, 10) {
        assert!(p.defs().is_empty());
        assert!(normalize(&p).is_normal());
    }
}

fn normalize(p: &Program) -> crate::calculus::Outcome {
    crate::calculus::normalize(p, Strategy::LeftmostOutermost)
}

#[test]
fn generated_macros_are_first_order() {
    for text in gen_macros(5, &GenParams::default(), 50) {
        let (m, call) = crate::cppmacro::parse_cpp(&text).unwrap();
        crate::cppmacro::to_program(&m, &call).unwrap_or_else(|e| panic!("{e}\n{text}"));
    }
}

#[test]
fn generated_decls_parse() {
    for text in gen_decls(5, &GenParams::default(), 100) {
        let env = parse_decls(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
        check_decls(&env).unwrap();
    }
}

#[test]
fn enumeration_examples() {
    let env = parse_decls(
        "type zarith = Small of int [@unboxed] | Big of gmp [@unboxed]
         and gmp [@shape (imm: {}; block: {255})]
         type empty = |
         type 'a option = None | Some of 'a",
    )
    .unwrap();
    let prim = |n: &str| TypeExpr::Prim(crate::calculus::name(n), vec![]);
    let app = |n: &str, args| TypeExpr::App(crate::calculus::name(n), args);
    let bools = enumerate_values(&prim("bool"), &env, 1).unwrap();
    let shown: Vec<String> = bools.iter().map(Value::to_string).collect();
    assert_eq!(shown, ["true", "false"]);
    assert_eq!(head_of(&bools[0], &prim("bool"), &env).unwrap(), Head::Imm(0));

    let z = enumerate_values(&app("zarith", vec![]), &env, 1).unwrap();
    assert!(z.is_empty(), "constructors need a level for their argument");
    let z = enumerate_values(&app("zarith", vec![]), &env, 2).unwrap();
    let shown: Vec<String> = z.iter().map(Value::to_string).collect();
    assert_eq!(shown, ["Small(0)", "Small(1)", "Big(<gmp: Block 255>)"]);
    let heads: Vec<Head> = z.iter().map(|v| head_of(v, &app("zarith", vec![]), &env).unwrap()).collect();
    assert_eq!(heads, [Head::Imm(0), Head::Imm(1), Head::Block(255)]);

    assert!(enumerate_values(&app("empty", vec![]), &env, 3).unwrap().is_empty());
    assert!(matches!(
        enumerate_values(&app("nope", vec![]), &env, 3),
        Err(OracleError::UnboundTypeName(_))
    ));
    let opt = app("option", vec![TypeExpr::Var(crate::calculus::name("'a"))]);
    assert!(matches!(enumerate_values(&opt, &env, 2), Err(OracleError::NotClosed(_))));
}

#[test]
fn repr_examples() {
    let env = parse_decls("type bool = True | False\ntype p = P of (int * string)").unwrap();
    let b = TypeExpr::App(crate::calculus::name("bool"), vec![]);
    let t = Value::Ctor {
        ctor: crate::calculus::name("True"),
        args: vec![],
    };
    assert_eq!(repr_value(&t, &b, &env).unwrap(), Repr::Imm(0));
    let p = TypeExpr::App(crate::calculus::name("p"), vec![]);
    let v = &enumerate_values(&p, &env, 3).unwrap()[0];
    assert_eq!(
        repr_value(v, &p, &env).unwrap(),
        Repr::Block(0, vec![Repr::Block(0, vec![Repr::Imm(0), Repr::Block(252, vec![])])])
    );
    assert!(matches!(repr_value(&t, &p, &env), Err(OracleError::IllTyped { .. })));
}

#[test]
fn small_selftest_passes() {
    for row in selftest::run_all(11, 30) {
        assert!(row.passed(), "{}", selftest::render_table(&[row]));
    }
}

/// Tree size of `t`, giving up above `cap`.
fn small(t: &Term, cap: &mut usize) -> bool {
    if *cap == 0 {
        return false;
    }
    *cap -= 1;
    match t {
        Term::App(a) => small(&a.head, cap) && a.args.iter().all(|u| small(u, cap)),
        _ => true,
    }
}

/// Step-by-step plain reduction, for comparison with the fuel machines;
/// `None` once the term grows too large to step naively.
fn iterate(p: &Program, s: Strategy, fuel: u64) -> Option<FuelOutcome> {
    let mut t = p.root().clone();
    for steps in 0..=fuel {
        if !small(&t, &mut 2000) {
            return None;
        }
        match plain_step(p, &t, s) {
            None => return Some(FuelOutcome::Normal { term: t, steps }),
            Some((_, _, next)) => t = next,
        }
    }
    Some(FuelOutcome::OutOfFuel)
}

#[test]
fn fuel_machines_match_single_steps() {
    let fo = gen_programs(21, &GenParams::default(), 150);
    let ho = gen_programs(22, &GenParams::default().higher_order(), 150);
    let mut compared = 0;
    for p in fo.iter().chain(&ho) {
        for s in [Strategy::LeftmostOutermost, Strategy::LeftmostInnermost] {
            if let Some(expected) = iterate(p, s, 200) {
                assert_eq!(fuel_normalize(p, s, 200).unwrap(), expected, "{s:?}\n{}", p.render());
                compared += 1;
            }
        }
    }
    assert!(compared > 300, "only {compared} runs compared");
}
