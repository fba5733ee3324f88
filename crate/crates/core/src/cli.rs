//! The `shapecheck` command line.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use crate::calculus::{normalize_observed, parse_program, CalcError, Mode, Outcome, Program, Strategy};
use crate::cppmacro::{compare_first_order, parse_cpp, render, CppError};
use crate::decls::{check_decls, parse_decls_with, render_reports, Verdict, CONFLICT_BANNER};
use crate::measure::assert_decrease;
use crate::oracle::{fuel_normalize, selftest, FuelOutcome};
use crate::shapes::PrimTable;

const SCHEMA: u32 = 1;

const AFTER_HELP: &str = "\
Input formats, by example:

  declarations (check):
    type zarith = Small of int [@unboxed] | Big of gmp [@unboxed]
    and gmp [@shape (imm: {}; block: {255})]
    type 'a id = Id of 'a [@unboxed]
    type rope = Leaf of string [@unboxed] | Branch of { llen: int; l: rope; r: rope }

  primitive table (--prims):
    int = (imm: top; block: {})
    lazy = (imm: {}; block: {244,246,250}) lazylike

  programs (norm):
    let rec id(a) = a in id(id(int))
    let rec nil(x) = x and g0(arg) = nil(g1)(arg) and g1(arg) = nil(arg) in g0(fortytwo)
    (the second needs --higher-order)

  macro files (cpp, compare-cpp):
    #define ID(x) x
    ID(ID(int))

Exit status: 0 when everything is accepted, normalizes or agrees; 1 on a
rejection, divergence or disagreement; 2 on usage or input errors.";

#[derive(Parser, Debug)]
#[command(name = "shapecheck", version, about = "Head-shape checking of unboxed constructors", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check type declarations and print their head shapes.
    Check(CheckArgs),
    /// Normalize programs with the trace monitor.
    Norm(NormArgs),
    /// Expand macro files with Prosser's algorithm.
    Cpp(CppArgs),
    /// Compare macro expansion with monitored normalization.
    CompareCpp(CompareArgs),
    /// Run the oracle suite over generated corpora.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Primitive shape table replacing the built-in one.
    #[arg(long, value_name = "FILE")]
    prims: Option<PathBuf>,
    /// One JSON document per line instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    #[value(alias = "outermost")]
    Lo,
    #[value(alias = "innermost")]
    Li,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::Lo => Strategy::LeftmostOutermost,
            StrategyArg::Li => Strategy::LeftmostInnermost,
        }
    }
}

#[derive(Args, Debug)]
struct NormArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "lo")]
    strategy: StrategyArg,
    /// Allow variables and applications in head position.
    #[arg(long)]
    higher_order: bool,
    /// Print every step with its annotated term.
    #[arg(long)]
    trace: bool,
    /// Check that the measure decreases at every step.
    #[arg(long)]
    check_measure: bool,
    /// Give up (exit 2) after this many steps.
    #[arg(long, value_name = "N")]
    max_steps: Option<u64>,
    /// Also run plain reduction with this much fuel.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    fuel: Option<u64>,
    /// One JSON document per line instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct CppArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Print every token with its hide set.
    #[arg(long)]
    show_hidesets: bool,
    /// Macro invocation limit.
    #[arg(long, value_name = "N", default_value_t = crate::cppmacro::DEFAULT_LIMIT)]
    max_steps: u64,
    /// One JSON document per line instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// One JSON document per line instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    cases: usize,
    /// One JSON document per line instead of text.
    #[arg(long)]
    json: bool,
}

/// What one input produced: its buffered output and how it went.
struct FileResult {
    out: String,
    err: String,
    status: i32,
}

impl FileResult {
    fn ok(out: String, success: bool) -> FileResult {
        FileResult {
            out,
            err: String::new(),
            status: if success { 0 } else { 1 },
        }
    }

    fn error(err: String) -> FileResult {
        FileResult {
            out: String::new(),
            err,
            status: 2,
        }
    }
}

fn json_line(v: &Json) -> String {
    let mut s = serde_json::to_string(v).expect("json values serialize");
    s.push('\n');
    s
}

fn read(path: &FsPath) -> Result<String, FileResult> {
    std::fs::read_to_string(path).map_err(|e| FileResult::error(format!("{}: {e}\n", path.display())))
}

/// Parses arguments and runs; returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let (sink, code): (&mut dyn Write, i32) = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => (out, 0),
                _ => (err, 2),
            };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let results: Vec<FileResult> = match &cli.command {
        Command::Check(a) => {
            let prims = match &a.prims {
                None => PrimTable::default(),
                Some(path) => match read(path).and_then(|text| {
                    PrimTable::parse(&text).map_err(|e| FileResult::error(format!("{}: {e}\n", path.display())))
                }) {
                    Ok(p) => p,
                    Err(r) => return finish(vec![r], out, err),
                },
            };
            each(&a.files, a.json, |f| check_file(f, &prims, a.json))
        }
        Command::Norm(a) => each(&a.files, a.json, |f| norm_file(f, a)),
        Command::Cpp(a) => each(&a.files, a.json, |f| cpp_file(f, a)),
        Command::CompareCpp(a) => each(&a.files, a.json, |f| compare_file(f, a.json)),
        Command::Selftest(a) => vec![selftest_run(a)],
    };
    finish(results, out, err)
}

fn finish(results: Vec<FileResult>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut status = 0;
    for r in results {
        let _ = out.write_all(r.out.as_bytes());
        let _ = err.write_all(r.err.as_bytes());
        status = status.max(r.status);
    }
    let _ = out.flush();
    status
}

/// Runs `f` on every file; text output of several files gets a header per
/// file.
fn each(files: &[PathBuf], as_json: bool, f: impl Fn(&FsPath) -> FileResult) -> Vec<FileResult> {
    files
        .iter()
        .map(|path| {
            let mut r = f(path);
            if files.len() > 1 && !as_json && !r.out.is_empty() {
                r.out.insert_str(0, &format!("== {}\n", path.display()));
            }
            r
        })
        .collect()
}

fn check_file(path: &FsPath, prims: &PrimTable, as_json: bool) -> FileResult {
    let text = match read(path) {
        Ok(t) => t,
        Err(r) => return r,
    };
    let env = match parse_decls_with(&text, prims) {
        Ok(env) => env,
        Err(e) => return FileResult::error(format!("{}:{e}\n", path.display())),
    };
    let reports = match check_decls(&env) {
        Ok(r) => r,
        Err(e) => return FileResult::error(format!("{}:{e}\n", path.display())),
    };
    let accepted = reports.iter().all(|r| r.verdict.is_accepted());
    if !as_json {
        return FileResult::ok(render_reports(&reports), accepted);
    }
    let decls: Vec<Json> = reports
        .iter()
        .map(|r| match &r.verdict {
            Verdict::Accepted { shape, unboxed } => json!({
                "decl": &*r.decl,
                "verdict": "accepted",
                "shape": shape.to_string(),
                "unboxed": unboxed.iter().map(|(k, s)| json!({"ctor": &**k, "shape": s.to_string()})).collect::<Vec<_>>(),
                "witness": null,
                "cycle_path": null,
            }),
            Verdict::RejectedConflict(w) => json!({
                "decl": &*r.decl,
                "verdict": "rejected",
                "error": CONFLICT_BANNER,
                "shape": null,
                "witness": {
                    "text": w.to_string(),
                    "side": w.side,
                    "value": w.value,
                    "left": w.left,
                    "right": w.right,
                },
                "cycle_path": null,
            }),
            Verdict::RejectedCycle(c) => json!({
                "decl": &*r.decl,
                "verdict": "rejected",
                "error": format!("the shape computation does not terminate: {c}"),
                "shape": null,
                "witness": null,
                "cycle_path": c.path.iter().map(|n| &**n).collect::<Vec<_>>(),
            }),
        })
        .collect();
    let doc = json!({
        "schema": SCHEMA,
        "file": path.display().to_string(),
        "verdict": if accepted { "accepted" } else { "rejected" },
        "decls": decls,
    });
    FileResult::ok(json_line(&doc), accepted)
}

fn calc_error(path: &FsPath, e: &CalcError) -> FileResult {
    FileResult::error(format!("{}:{e}\n", path.display()))
}

fn norm_file(path: &FsPath, a: &NormArgs) -> FileResult {
    let text = match read(path) {
        Ok(t) => t,
        Err(r) => return r,
    };
    let mode = if a.higher_order {
        Mode::ClosedHigherOrder
    } else {
        Mode::FirstOrder
    };
    let p = match parse_program(&text, mode) {
        Ok(p) => p,
        Err(e) => return calc_error(path, &e),
    };
    let strategy = Strategy::from(a.strategy);
    let mut steps_text = String::new();
    let mut steps_json = Vec::new();
    let mut bad_steps = Vec::new();
    let result = normalize_observed(&p, strategy, a.max_steps, &mut |ev| {
        if a.check_measure && !assert_decrease(ev.before, ev.after, mode) {
            bad_steps.push(ev.index);
        }
        if a.trace {
            let after = ev.after.render(mode);
            let _ = writeln!(steps_text, "step {} at {} ({}): {after}", ev.index, ev.path, ev.name);
            steps_json.push(json!({"step": ev.index, "path": ev.path.to_string(), "name": &**ev.name, "term": after}));
        }
    });
    let outcome = match result {
        Ok(o) => o,
        Err(e) => return calc_error(path, &e),
    };
    let plain = a.fuel.map(|fuel| fuel_normalize(&p, strategy, fuel).expect("fuel is positive"));
    let measure_ok = a.check_measure.then_some(bad_steps.is_empty());

    let mut res = if a.json {
        FileResult::ok(json_line(&norm_json(path, &p, &outcome, plain.as_ref(), measure_ok, steps_json)), outcome.is_normal())
    } else {
        let mut out = steps_text;
        match &outcome {
            Outcome::Normal { term, steps } => {
                let _ = writeln!(out, "normal form: {}", term.render(mode));
                let _ = writeln!(out, "steps: {steps}");
            }
            Outcome::Diverges {
                name,
                trace,
                path: at,
                term,
                steps,
            } => {
                let _ = writeln!(out, "diverges: {name} blocked with trace {trace}");
                let _ = writeln!(out, "steps: {steps}");
                let _ = writeln!(out, "blocked redex at {at} in {}", term.render(mode));
            }
        }
        match &plain {
            Some(FuelOutcome::Normal { term, steps }) => {
                let _ = writeln!(out, "plain reduction: {} in {steps} steps", term.render(mode));
            }
            Some(FuelOutcome::OutOfFuel) => {
                let _ = writeln!(out, "plain reduction: out of fuel");
            }
            None => {}
        }
        if let Some(ok) = measure_ok {
            let _ = writeln!(out, "measure: {}", if ok { "decreases at every step" } else { "VIOLATED" });
        }
        FileResult::ok(out, outcome.is_normal())
    };
    if !bad_steps.is_empty() {
        let list: Vec<String> = bad_steps.iter().map(u64::to_string).collect();
        res.err = format!("{}: measure does not decrease at step(s) {}\n", path.display(), list.join(", "));
        res.status = 2;
    }
    res
}

fn norm_json(
    path: &FsPath,
    p: &Program,
    outcome: &Outcome,
    plain: Option<&FuelOutcome>,
    measure_ok: Option<bool>,
    steps_json: Vec<Json>,
) -> Json {
    let mode = p.mode();
    let mut doc = match outcome {
        Outcome::Normal { term, steps } => json!({
            "verdict": "normal",
            "steps": steps,
            "normal_form": term.render(mode),
            "blocked": null,
        }),
        Outcome::Diverges {
            name,
            trace,
            path: at,
            term,
            steps,
        } => json!({
            "verdict": "diverges",
            "steps": steps,
            "normal_form": null,
            "blocked": {
                "name": &**name,
                "trace": trace.names().iter().map(|n| &**n).collect::<Vec<_>>(),
                "path": at.0,
                "term": term.render(mode),
            },
        }),
    };
    doc["schema"] = json!(SCHEMA);
    doc["file"] = json!(path.display().to_string());
    doc["measure_ok"] = json!(measure_ok);
    doc["plain"] = match plain {
        None => Json::Null,
        Some(FuelOutcome::Normal { term, steps }) => json!({"normal_form": term.render(mode), "steps": steps}),
        Some(FuelOutcome::OutOfFuel) => json!("out_of_fuel"),
    };
    if !steps_json.is_empty() {
        doc["trace"] = Json::Array(steps_json);
    }
    doc
}

fn cpp_error(path: &FsPath, e: &CppError) -> FileResult {
    match e {
        CppError::Syntax { line, msg } => FileResult::error(format!("{}:{line}:1: syntax error: {msg}\n", path.display())),
        _ => FileResult::error(format!("{}: {e}\n", path.display())),
    }
}

fn cpp_file(path: &FsPath, a: &CppArgs) -> FileResult {
    let text = match read(path) {
        Ok(t) => t,
        Err(r) => return r,
    };
    let result = parse_cpp(&text).and_then(|(m, input)| {
        let mut e = crate::cppmacro::Expander::new(&m, a.max_steps);
        let output = e.expand(input)?;
        Ok((output, e.invocations))
    });
    match result {
        Ok((output, invocations)) => {
            let plain = render(&output, false);
            if a.json {
                let doc = json!({
                    "schema": SCHEMA,
                    "file": path.display().to_string(),
                    "verdict": "expanded",
                    "output": plain,
                    "hidesets": render(&output, true),
                    "steps": invocations,
                });
                FileResult::ok(json_line(&doc), true)
            } else {
                FileResult::ok(format!("{}\n", render(&output, a.show_hidesets)), true)
            }
        }
        Err(e) => cpp_error(path, &e),
    }
}

fn compare_file(path: &FsPath, as_json: bool) -> FileResult {
    let text = match read(path) {
        Ok(t) => t,
        Err(r) => return r,
    };
    match parse_cpp(&text).and_then(|(m, call)| compare_first_order(&m, &call)) {
        Ok(r) if as_json => {
            let mut doc = serde_json::to_value(&r).expect("report serializes");
            doc["schema"] = json!(SCHEMA);
            doc["file"] = json!(path.display().to_string());
            doc["verdict"] = json!(if r.agree { "agree" } else { "disagree" });
            FileResult::ok(json_line(&doc), r.agree)
        }
        Ok(r) => FileResult::ok(format!("{r}\n"), r.agree),
        Err(e) => cpp_error(path, &e),
    }
}

fn selftest_run(a: &SelftestArgs) -> FileResult {
    let rows = selftest::run_all(a.seed, a.cases);
    let passed = rows.iter().all(|r| r.passed());
    if a.json {
        let doc = json!({
            "schema": SCHEMA,
            "seed": a.seed,
            "verdict": if passed { "pass" } else { "fail" },
            "checks": rows,
        });
        return FileResult::ok(json_line(&doc), passed);
    }
    let mut out = format!("selftest, seed {}\n", a.seed);
    out.push_str(&selftest::render_table(&rows));
    out.push_str(if passed { "all checks passed\n" } else { "some checks FAILED\n" });
    FileResult::ok(out, passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(args.iter().copied(), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_str(&["shapecheck"]).0, 2);
        assert_eq!(run_str(&["shapecheck", "norm"]).0, 2);
        assert_eq!(run_str(&["shapecheck", "norm", "x.lam", "--strategy", "sideways"]).0, 2);
        assert_eq!(run_str(&["shapecheck", "norm", "x.lam", "--fuel", "0"]).0, 2);
        let (code, out, _) = run_str(&["shapecheck", "--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("let rec id(a) = a in id(id(int))"));
    }

    #[test]
    fn missing_files_are_input_errors() {
        let (code, out, err) = run_str(&["shapecheck", "check", "/nonexistent/x.decl"]);
        assert_eq!((code, out.as_str()), (2, ""));
        assert!(err.starts_with("/nonexistent/x.decl: "));
    }
}
