//! Seeded random corpora: recursive programs, macro systems, declarations.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::{erase, name, normalize, Def, Mode, Name, Outcome, Program, Strategy, Term};
use crate::cppmacro::{parse_cpp, Expander};

#[derive(Clone, Copy, Debug)]
pub struct GenParams {
    pub max_defs: usize,
    pub max_arity: usize,
    pub max_depth: usize,
    /// Probability that a call targets the current definition or an
    /// earlier one, closing a cycle.
    pub recursion_bias: f64,
    pub mode: Mode,
}

impl Default for GenParams {
    fn default() -> GenParams {
        GenParams {
            max_defs: 6,
            max_arity: 3,
            max_depth: 4,
            recursion_bias: 0.5,
            mode: Mode::FirstOrder,
        }
    }
}

impl GenParams {
    pub fn higher_order(self) -> GenParams {
        GenParams {
            mode: Mode::ClosedHigherOrder,
            ..self
        }
    }
}

const CONSTANTS: [&str; 3] = ["nil", "zero", "one"];
const CONSTRUCTORS: [(&str, usize); 3] = [("s", 1), ("pair", 2), ("node", 3)];

struct Shape<'a> {
    params: &'a GenParams,
    names: Vec<Name>,
    arities: Vec<usize>,
}

impl Shape<'_> {
    fn callee(&self, rng: &mut ChaCha8Rng, from: Option<usize>) -> usize {
        let n = self.names.len();
        match from {
            Some(i) if rng.gen_bool(self.params.recursion_bias) => rng.gen_range(0..=i),
            Some(i) if i + 1 < n => rng.gen_range(i + 1..n),
            _ => rng.gen_range(0..n),
        }
    }

    fn leaf(&self, rng: &mut ChaCha8Rng, vars: &[Name]) -> Term {
        let ho = self.params.mode == Mode::ClosedHigherOrder;
        if !self.names.is_empty() && ho && rng.gen_bool(0.25) {
            return Term::Sym(self.names.choose(rng).expect("names").clone());
        }
        if !vars.is_empty() && rng.gen_bool(0.6) {
            return Term::Var(vars.choose(rng).expect("vars").clone());
        }
        Term::call(CONSTANTS.choose(rng).expect("constants"), Vec::new())
    }

    fn term(&self, rng: &mut ChaCha8Rng, depth: usize, vars: &[Name], from: Option<usize>) -> Term {
        if depth == 0 || rng.gen_bool(0.3) {
            return self.leaf(rng, vars);
        }
        let ho = self.params.mode == Mode::ClosedHigherOrder;
        let args = |rng: &mut ChaCha8Rng, n: usize| -> Vec<Term> {
            (0..n).map(|_| self.term(rng, depth - 1, vars, from)).collect()
        };
        if ho && !vars.is_empty() && rng.gen_bool(0.2) {
            let f = Term::Var(vars.choose(rng).expect("vars").clone());
            let n = rng.gen_range(0..=self.params.max_arity);
            return Term::app(f, args(rng, n));
        }
        if !self.names.is_empty() && rng.gen_bool(0.6) {
            let j = self.callee(rng, from);
            let call = Term::call(&self.names[j], args(rng, self.arities[j]));
            if ho && rng.gen_bool(0.1) {
                let n = rng.gen_range(1..=self.params.max_arity.max(1));
                return Term::app(call, args(rng, n));
            }
            return call;
        }
        let (c, n) = CONSTRUCTORS.choose(rng).expect("constructors");
        Term::call(c, args(rng, *n))
    }
}

/// One program drawn from `rng`. Definitions are `f0..`; with no
/// definitions the root only uses free names.
pub fn gen_program(rng: &mut ChaCha8Rng, params: &GenParams) -> Program {
    let n = if params.max_defs == 0 {
        0
    } else {
        rng.gen_range(1..=params.max_defs)
    };
    let shape = Shape {
        params,
        names: (0..n).map(|i| name(&format!("f{i}"))).collect(),
        arities: (0..n).map(|_| rng.gen_range(0..=params.max_arity)).collect(),
    };
    let defs: Vec<Def> = (0..n)
        .map(|i| {
            let vars: Vec<Name> = (0..shape.arities[i]).map(|j| name(&format!("x{j}"))).collect();
            Def {
                name: shape.names[i].clone(),
                params: vars.clone(),
                body: shape.term(rng, params.max_depth, &vars, Some(i)),
            }
        })
        .collect();
    let root = if n == 0 {
        shape.term(rng, 2, &[], None)
    } else {
        let args = (0..shape.arities[0]).map(|_| shape.term(rng, 2, &[], None)).collect();
        Term::call(&shape.names[0], args)
    };
    Program::new(defs, root, params.mode).expect("generated programs are well formed")
}

pub fn gen_programs(seed: u64, params: &GenParams, count: usize) -> Vec<Program> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| gen_program(&mut rng, params)).collect()
}

fn cpp_term(t: &Term, out: &mut String) {
    match t {
        Term::Var(x) | Term::Sym(x) => out.push_str(x),
        Term::App(a) => {
            let Term::Sym(f) = &a.head else {
                unreachable!("first-order head")
            };
            let defined = f.starts_with('f') && f[1..].chars().all(|c| c.is_ascii_digit());
            if defined {
                out.push('F');
                out.push_str(&f[1..]);
            } else {
                out.push_str(f);
            }
            if a.args.is_empty() && !defined {
                return;
            }
            out.push('(');
            for (i, u) in a.args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                cpp_term(u, out);
            }
            out.push(')');
        }
    }
}

/// A first-order program generated by [`gen_program`] as a macro file:
/// `fI` becomes the macro `FI`.
pub fn program_to_cpp(p: &Program) -> String {
    let mut out = String::new();
    for d in p.defs() {
        let ps: Vec<&str> = d.params.iter().map(|x| &**x).collect();
        out.push_str(&format!("#define F{}({}) ", &d.name[1..], ps.join(", ")));
        cpp_term(&d.body, &mut out);
        out.push('\n');
    }
    cpp_term(p.root(), &mut out);
    out.push('\n');
    out
}

/// Bound on the tree size of a generated macro system's result.
pub const MAX_MACRO_OUTPUT: usize = 4000;

/// Whether the tree size of `t` is at most `cap`.
fn tree_size_at_most(t: &Term, mut cap: usize) -> bool {
    let mut stack = vec![t];
    while let Some(t) = stack.pop() {
        if cap == 0 {
            return false;
        }
        cap -= 1;
        if let Term::App(a) = t {
            stack.push(&a.head);
            stack.extend(a.args.iter());
        }
    }
    true
}

/// First-order macro systems. Programs are skipped when their monitored
/// result has more than [`MAX_MACRO_OUTPUT`] nodes as a tree, or when their
/// expansion takes more invocations or produces more than 50 times as many
/// tokens: cpp expands every copy of a duplicated argument, including
/// arguments that are dropped later.
pub fn gen_macros(seed: u64, params: &GenParams, count: usize) -> Vec<String> {
    let params = GenParams {
        mode: Mode::FirstOrder,
        ..*params
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = gen_program(&mut rng, &params);
        let result = match normalize(&p, Strategy::LeftmostOutermost) {
            Outcome::Normal { term, .. } => term,
            Outcome::Diverges { term, .. } => erase(&term),
        };
        if !tree_size_at_most(&result, MAX_MACRO_OUTPUT) {
            continue;
        }
        let text = program_to_cpp(&p);
        let (m, call) = parse_cpp(&text).expect("generated macro files parse");
        let bounded = Expander::new(&m, MAX_MACRO_OUTPUT as u64)
            .with_token_limit(50 * MAX_MACRO_OUTPUT as u64)
            .expand(call)
            .is_ok();
        if bounded {
            out.push(text);
        }
    }
    out
}

const GROUND: [&str; 5] = ["int", "bool", "string", "float", "custom"];

struct DeclShape {
    names: Vec<String>,
    has_param: Vec<bool>,
}

impl DeclShape {
    fn ty(&self, rng: &mut ChaCha8Rng, depth: usize, param: bool, from: usize, bias: f64) -> String {
        if param && rng.gen_bool(0.2) {
            return "'a".into();
        }
        let roll = rng.gen_range(0..10);
        if depth == 0 || roll < 4 {
            return GROUND.choose(rng).expect("ground").to_string();
        }
        if roll < 7 {
            let n = self.names.len();
            let j = if rng.gen_bool(bias) {
                rng.gen_range(0..=from)
            } else {
                rng.gen_range(0..n)
            };
            if self.has_param[j] {
                let arg = self.ty(rng, depth - 1, param, from, bias);
                return format!("({arg}) {}", self.names[j]);
            }
            return self.names[j].clone();
        }
        let inner = self.ty(rng, depth - 1, param, from, bias);
        match rng.gen_range(0..3) {
            0 => format!("({inner}) lazy"),
            1 => format!("({inner}) array"),
            _ => {
                let other = self.ty(rng, depth - 1, param, from, bias);
                format!("({inner} * {other})")
            }
        }
    }
}

fn shape_side(rng: &mut ChaCha8Rng, block: bool) -> String {
    if rng.gen_bool(0.2) {
        return "top".into();
    }
    let pool: &[i64] = if block { &[0, 1, 252, 253, 255] } else { &[0, 1, 2] };
    let mut picked: Vec<i64> = pool.iter().copied().filter(|_| rng.gen_bool(0.3)).collect();
    picked.sort_unstable();
    let s: Vec<String> = picked.iter().map(i64::to_string).collect();
    format!("{{{}}}", s.join(", "))
}

/// Declaration files: one recursive group of up to four types mixing
/// variants with unboxed constructors, abbreviations and abstract types.
pub fn gen_decls(seed: u64, params: &GenParams, count: usize) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=params.max_defs.clamp(1, 4));
            let shape = DeclShape {
                names: (0..n).map(|i| format!("t{i}")).collect(),
                has_param: (0..n).map(|_| rng.gen_bool(0.2)).collect(),
            };
            let depth = params.max_depth.min(2);
            let mut out = String::new();
            for i in 0..n {
                out.push_str(if i == 0 { "type " } else { "and " });
                let param = shape.has_param[i];
                if param {
                    out.push_str("'a ");
                }
                out.push_str(&shape.names[i]);
                let roll = rng.gen_range(0..20);
                if roll < 3 {
                    let imm = shape_side(&mut rng, false);
                    let block = shape_side(&mut rng, true);
                    out.push_str(&format!(" [@shape (imm: {imm}; block: {block})]\n"));
                    continue;
                }
                if roll < 6 {
                    let body = shape.ty(&mut rng, depth, param, i, params.recursion_bias);
                    out.push_str(&format!(" = {body}\n"));
                    continue;
                }
                out.push_str(" =");
                for j in 0..rng.gen_range(1..=4) {
                    out.push_str(&format!("\n  | C{i}_{j}"));
                    if rng.gen_bool(0.4) {
                        continue;
                    }
                    let arity = if rng.gen_bool(0.7) { 1 } else { 2 };
                    let args: Vec<String> = (0..arity)
                        .map(|_| shape.ty(&mut rng, depth, param, i, params.recursion_bias))
                        .collect();
                    out.push_str(&format!(" of {}", args.join(" * ")));
                    if arity == 1 && rng.gen_bool(0.4) {
                        out.push_str(" [@unboxed]");
                    }
                }
                out.push('\n');
            }
            out
        })
        .collect()
}
