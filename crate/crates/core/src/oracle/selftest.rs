//! The oracle suite behind `shapecheck selftest`: each check runs over a
//! seeded corpus and collects violations.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    fuel_normalize, gen_decls, gen_macros, gen_programs, head_function_monitor, naive_whole_term_monitor,
    soundness_violations, trace_monitor, FuelOutcome, GenParams, MonitorOutcome,
};
use crate::calculus::{erase, normalize, normalize_observed, parse_program, Mode, Outcome, Program, Strategy};
use crate::cppmacro::{compare_first_order, parse_cpp};
use crate::decls::{check_decls, parse_decls};
use crate::measure::assert_decrease;
use crate::shapes::{Head, HeadShape, SubShape};

pub const FUEL: u64 = 100_000;

/// Heads against which shape operations are checked exhaustively.
pub const UNIVERSE: std::ops::RangeInclusive<i64> = -4..=260;

#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub name: &'static str,
    pub cases: usize,
    pub violations: Vec<String>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CheckRow {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn timed(name: &'static str, cases: usize, f: impl FnOnce() -> Vec<String>) -> CheckRow {
    let start = Instant::now();
    let violations = f();
    CheckRow {
        name,
        cases,
        violations,
        elapsed: start.elapsed(),
    }
}

/// Every step of the monitored reduction of generated programs, in both
/// modes and under both strategies: the tree measure decreases, traces stay
/// duplicate-free over defined names, and the erasure takes the same plain
/// β-step.
pub fn check_steps(seed: u64, cases: usize) -> CheckRow {
    timed("monitored steps", cases, || {
        let mut out = Vec::new();
        let fo = gen_programs(seed, &GenParams::default(), cases.div_ceil(2));
        let ho = gen_programs(seed ^ 0x9e37, &GenParams::default().higher_order(), cases / 2);
        for (i, p) in fo.iter().chain(&ho).enumerate() {
            for strategy in [Strategy::LeftmostOutermost, Strategy::LeftmostInnermost] {
                let _ = normalize_observed(p, strategy, None, &mut |ev| {
                    let tag = || format!("program {i} ({}), step {}", strategy.short_name(), ev.index);
                    if !assert_decrease(ev.before, ev.after, p.mode()) {
                        out.push(format!("{}: measure does not decrease", tag()));
                    }
                    ev.after.for_each_trace(&mut |l| {
                        let names = l.names();
                        let dup = names.iter().enumerate().any(|(j, f)| names[..j].contains(f));
                        if dup || names.iter().any(|f| p.lookup(f).is_none()) {
                            out.push(format!("{}: bad trace {l}", tag()));
                        }
                    });
                    let plain = super::beta_step_at(p, &erase(ev.before), ev.path);
                    if plain.as_ref().map(|(_, t)| t) != Some(&erase(ev.after)) {
                        out.push(format!("{}: erasure is not a β-step at {}", tag(), ev.path));
                    }
                });
            }
        }
        out
    })
}

/// Only the measure part of [`check_steps`], for both modes.
pub fn check_measure(seed: u64, cases: usize) -> CheckRow {
    timed("measure decreases", cases, || {
        let mut out = Vec::new();
        let fo = gen_programs(seed, &GenParams::default(), cases.div_ceil(2));
        let ho = gen_programs(seed ^ 0x9e37, &GenParams::default().higher_order(), cases / 2);
        for (i, p) in fo.iter().chain(&ho).enumerate() {
            for strategy in [Strategy::LeftmostOutermost, Strategy::LeftmostInnermost] {
                let _ = normalize_observed(p, strategy, None, &mut |ev| {
                    if !assert_decrease(ev.before, ev.after, p.mode()) {
                        out.push(format!("program {i} ({}): step {} does not decrease", strategy.short_name(), ev.index));
                    }
                });
            }
        }
        out
    })
}

/// Monitored normalization against plain fuel-bounded reduction on
/// first-order programs: equal normal forms under the same strategy, and
/// outermost divergence verdicts run out of fuel.
pub fn check_fuel(seed: u64, cases: usize) -> CheckRow {
    timed("agreement with plain reduction", cases, || {
        let mut out = Vec::new();
        for (i, p) in gen_programs(seed, &GenParams::default(), cases).iter().enumerate() {
            out.extend(fuel_violations(p).into_iter().map(|v| format!("program {i}: {v}")));
        }
        out
    })
}

/// The violations of one program; see [`check_fuel`].
pub fn fuel_violations(p: &Program) -> Vec<String> {
    let mut out = Vec::new();
    for strategy in [Strategy::LeftmostOutermost, Strategy::LeftmostInnermost] {
        let monitored = normalize(p, strategy);
        // Innermost divergence verdicts are not checked: plain reduction is
        // only expected to diverge too.
        if strategy == Strategy::LeftmostInnermost && !monitored.is_normal() {
            continue;
        }
        let plain = fuel_normalize(p, strategy, FUEL).expect("positive fuel");
        match (&monitored, &plain) {
            (Outcome::Normal { term, .. }, FuelOutcome::Normal { term: v, .. }) if term == v => {}
            (Outcome::Normal { term, .. }, _) => out.push(format!(
                "{}: monitored normal form {} but plain reduction gives {}",
                strategy.short_name(),
                term.render(p.mode()),
                describe(&plain, p.mode())
            )),
            (Outcome::Diverges { name, .. }, FuelOutcome::Normal { .. }) if strategy == Strategy::LeftmostOutermost => {
                out.push(format!(
                    "{}: blocked at {name} but plain reduction gives {}",
                    strategy.short_name(),
                    describe(&plain, p.mode())
                ))
            }
            _ => {}
        }
    }
    out
}

fn describe(o: &FuelOutcome, mode: Mode) -> String {
    match o {
        FuelOutcome::Normal { term, steps } => format!("{} in {steps} steps", term.render(mode)),
        FuelOutcome::OutOfFuel => "no normal form within the fuel".into(),
    }
}

/// Prosser's expansion against the calculus on first-order macro systems.
pub fn check_cpp(seed: u64, cases: usize) -> CheckRow {
    timed("cpp agreement", cases, || {
        let mut out = Vec::new();
        for (i, text) in gen_macros(seed, &GenParams::default(), cases).iter().enumerate() {
            let result = parse_cpp(text).and_then(|(m, call)| compare_first_order(&m, &call));
            match result {
                Ok(r) if r.agree => {}
                Ok(r) => out.push(format!("system {i}: {}\n{text}", r.to_string().replace('\n', "; "))),
                Err(e) => out.push(format!("system {i}: {e}\n{text}")),
            }
        }
        out
    })
}

pub fn random_sub_shape(rng: &mut ChaCha8Rng, block: bool) -> SubShape {
    if rng.gen_bool(0.15) {
        return SubShape::Top;
    }
    let range = if block { 0..=255 } else { UNIVERSE };
    let n = rng.gen_range(0..6);
    // Small pools make overlaps frequent.
    let narrow = rng.gen_bool(0.5);
    SubShape::of((0..n).map(|_| {
        if narrow {
            rng.gen_range(0..4)
        } else {
            rng.gen_range(range.clone())
        }
    }))
}

pub fn random_shape(rng: &mut ChaCha8Rng) -> HeadShape {
    HeadShape::new(random_sub_shape(rng, false), random_sub_shape(rng, true))
}

/// Union and disjoint union of random shapes against exhaustive membership
/// over [`UNIVERSE`] on both sides.
pub fn check_shapes(seed: u64, cases: usize) -> CheckRow {
    timed("shape algebra", cases, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        for i in 0..cases {
            let (a, b) = (random_shape(&mut rng), random_shape(&mut rng));
            let union = a.union(&b);
            let mut common = None;
            for n in UNIVERSE {
                for h in [Head::Imm(n), Head::Block(n)] {
                    let (x, y) = (a.contains(h), b.contains(h));
                    if union.contains(h) != (x || y) {
                        out.push(format!("pair {i}: union of {a} and {b} is wrong at {h}"));
                    }
                    if x && y && common.is_none() {
                        common = Some(h);
                    }
                }
            }
            match (a.disjoint_union(&b), common) {
                (Ok(u), None) if u == union => {}
                (Err(c), Some(_)) if a.contains(c.head()) && b.contains(c.head()) => {}
                (got, _) => out.push(format!("pair {i}: {a} ⊎ {b} gave {got:?}, common head {common:?}")),
            }
        }
        out
    })
}

/// Enumeration soundness on generated declarations.
pub fn check_decl_corpus(seed: u64, cases: usize, depth: usize) -> CheckRow {
    timed("enumeration soundness", cases, || {
        let mut out = Vec::new();
        for (i, text) in gen_decls(seed, &GenParams::default(), cases).iter().enumerate() {
            let env = match parse_decls(text) {
                Ok(env) => env,
                Err(e) => {
                    out.push(format!("file {i}: generated text does not parse: {e}\n{text}"));
                    continue;
                }
            };
            let reports = check_decls(&env).expect("parsed declarations check");
            match soundness_violations(&env, &reports, depth) {
                Ok(vs) => out.extend(vs.into_iter().map(|v| format!("file {i}: {v}"))),
                Err(e) => out.push(format!("file {i}: {e}")),
            }
        }
        out
    })
}

pub const LOOP: &str = "let rec loop(a) = loop(list(a)) in loop(int)";
pub const ID: &str = "let rec id(a) = a in id(id(int))";

/// The two naive monitors against the trace monitor on the loop and the
/// double identity.
pub fn monitor_table(max_steps: u64) -> Vec<(&'static str, &'static str, MonitorOutcome)> {
    let mut rows = Vec::new();
    for (label, text) in [("loop(int)", LOOP), ("id(id(int))", ID)] {
        let p = parse_program(text, Mode::FirstOrder).expect("fixture parses");
        let s = Strategy::LeftmostOutermost;
        rows.push((label, "whole term", naive_whole_term_monitor(&p, s, max_steps)));
        rows.push((label, "head function", head_function_monitor(&p, s, max_steps)));
        rows.push((label, "trace", trace_monitor(&p, s)));
    }
    rows
}

pub fn check_monitors() -> CheckRow {
    timed("naive monitors", 2, || {
        let mut out = Vec::new();
        let table = monitor_table(1000);
        let get = |prog: &str, mon: &str| {
            &table
                .iter()
                .find(|(p, m, _)| *p == prog && *m == mon)
                .expect("table row")
                .2
        };
        if !matches!(get("loop(int)", "whole term"), MonitorOutcome::Undecided { steps: 1000 }) {
            out.push("whole-term monitor decided loop(int)".into());
        }
        if !matches!(get("id(id(int))", "head function"), MonitorOutcome::Blocked { step: 2, .. }) {
            out.push("head-function monitor did not block id(id(int)) at step 2".into());
        }
        if !matches!(get("loop(int)", "trace"), MonitorOutcome::Blocked { step: 2, .. }) {
            out.push("trace monitor did not block loop(int) at step 2".into());
        }
        if get("id(id(int))", "trace") != (&MonitorOutcome::Normal { term: "int".into(), steps: 2 }) {
            out.push("trace monitor did not normalize id(id(int))".into());
        }
        out
    })
}

/// All checks with `cases` generated inputs each.
pub fn run_all(seed: u64, cases: usize) -> Vec<CheckRow> {
    vec![
        check_steps(seed, cases),
        check_fuel(seed, cases),
        check_cpp(seed, cases),
        check_shapes(seed, cases * 10),
        check_decl_corpus(seed, cases, 3),
        check_monitors(),
    ]
}

pub fn render_table(rows: &[CheckRow]) -> String {
    let mut out = String::new();
    for r in rows {
        out.push_str(&format!(
            "{:<4} {:<32} {:>6} cases  {:>4} violations\n",
            if r.passed() { "ok" } else { "FAIL" },
            r.name,
            r.cases,
            r.violations.len()
        ));
        for v in r.violations.iter().take(5) {
            out.push_str(&format!("       {}\n", v.replace('\n', "\n       ")));
        }
    }
    out
}
