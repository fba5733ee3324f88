//! First-order and closed-higher-order λ-calculus with mutually recursive
//! definitions, and the trace-annotated reduction that decides termination
//! on the fly.
//!
//! Every application node of an annotated term carries a [`Trace`]: the
//! names of the definitions whose expansion made that node appear. A call
//! `f(..)` whose own trace already contains `f` is a *blocked redex* and is
//! never expanded. Annotated reduction is strongly normalizing, and a blocked
//! redex in a reachable term witnesses an infinite reduction of its erasure.

mod parse;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

pub use parse::parse_program;

/// Interned-ish identifier; cheap to clone and safe to share across threads.
pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Mode {
    FirstOrder,
    ClosedHigherOrder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Default)]
pub enum Strategy {
    #[default]
    LeftmostOutermost,
    LeftmostInnermost,
}

impl Strategy {
    pub fn short_name(self) -> &'static str {
        match self {
            Strategy::LeftmostOutermost => "leftmost-outermost",
            Strategy::LeftmostInnermost => "leftmost-innermost",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CalcError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{}duplicate definition of `{name}`", fmt_pos(.pos))]
    DuplicateDefinition { name: String, pos: Option<Pos> },
    #[error("{}arity mismatch: `{name}` expects {expected} argument(s), found {found}", fmt_pos(.pos))]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
        pos: Option<Pos>,
    },
    #[error("malformed program: {0}")]
    MalformedProgram(String),
    #[error("step limit of {0} reached")]
    StepLimit(u64),
}

fn fmt_pos(pos: &Option<Pos>) -> String {
    match pos {
        Some(p) => format!("{p}: "),
        None => String::new(),
    }
}

// ---------------------------------------------------------------------------
// Plain terms

/// A plain term. Application children are shared, so duplicating an argument
/// during substitution is O(1).
#[derive(Clone, Debug)]
pub enum Term {
    /// A formal parameter (or a free variable of the root).
    Var(Name),
    /// A bare name: a defined function used as a value (higher-order mode
    /// only) or an uninterpreted constant.
    Sym(Name),
    App(Arc<App>),
}

#[derive(Debug)]
pub struct App {
    pub head: Term,
    pub args: Vec<Term>,
}

/// Deep terms (long divergent runs) would overflow the stack with the
/// default recursive drop, so children are released iteratively.
impl Drop for App {
    fn drop(&mut self) {
        static HOLE: std::sync::OnceLock<Name> = std::sync::OnceLock::new();
        let hole = || Term::Var(HOLE.get_or_init(|| name("_")).clone());
        let mut stack = std::mem::take(&mut self.args);
        stack.push(std::mem::replace(&mut self.head, hole()));
        while let Some(t) = stack.pop() {
            if let Term::App(a) = t {
                if let Some(mut inner) = Arc::into_inner(a) {
                    stack.append(&mut inner.args);
                    stack.push(std::mem::replace(&mut inner.head, hole()));
                }
            }
        }
    }
}

impl Term {
    pub fn var(n: &str) -> Term {
        Term::Var(name(n))
    }

    pub fn sym(n: &str) -> Term {
        Term::Sym(name(n))
    }

    pub fn app(head: Term, args: Vec<Term>) -> Term {
        Term::App(Arc::new(App { head, args }))
    }

    /// `f(args)` with a literal name in head position.
    pub fn call(f: &str, args: Vec<Term>) -> Term {
        Term::app(Term::sym(f), args)
    }

    /// The head name of an application whose head is a literal name.
    pub fn head_name(&self) -> Option<&Name> {
        match self {
            Term::App(a) => match &a.head {
                Term::Sym(f) => Some(f),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Sym(_) => 1,
            Term::App(a) => 1 + a.head.size() + a.args.iter().map(Term::size).sum::<usize>(),
        }
    }

    /// Renders the term. In first-order mode a nullary call `c()` prints as a
    /// bare `c`, matching how the parser reads it.
    pub fn render(&self, mode: Mode) -> String {
        let mut out = String::new();
        self.render_into(mode, &mut out);
        out
    }

    fn render_into(&self, mode: Mode, out: &mut String) {
        match self {
            Term::Var(x) | Term::Sym(x) => out.push_str(x),
            Term::App(a) => {
                a.head.render_into(mode, out);
                if a.args.is_empty() && mode == Mode::FirstOrder {
                    return;
                }
                out.push('(');
                for (i, arg) in a.args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    arg.render_into(mode, out);
                }
                out.push(')');
            }
        }
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Term::Var(a), Term::Var(b)) | (Term::Sym(a), Term::Sym(b)) => a == b,
            (Term::App(a), Term::App(b)) => {
                Arc::ptr_eq(a, b) || (a.head == b.head && a.args == b.args)
            }
            _ => false,
        }
    }
}

impl Eq for Term {}

impl std::hash::Hash for Term {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        match self {
            Term::Var(x) => {
                0u8.hash(state);
                x.hash(state);
            }
            Term::Sym(x) => {
                1u8.hash(state);
                x.hash(state);
            }
            Term::App(a) => {
                2u8.hash(state);
                a.head.hash(state);
                a.args.hash(state);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Traces and annotated terms

/// Ordered, duplicate-free list of expanded definition names. Only
/// membership matters for reduction; the order is kept for diagnostics.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Trace(Arc<[Name]>);

impl Trace {
    pub fn empty() -> Trace {
        Trace::default()
    }

    pub fn from_names<I: IntoIterator<Item = Name>>(names: I) -> Trace {
        let mut v: Vec<Name> = Vec::new();
        for n in names {
            if !v.contains(&n) {
                v.push(n);
            }
        }
        Trace(v.into())
    }

    pub fn contains(&self, f: &str) -> bool {
        self.0.iter().any(|n| &**n == f)
    }

    /// `l, f`. The caller guarantees `f ∉ l`.
    pub fn extended(&self, f: &Name) -> Trace {
        debug_assert!(!self.contains(f));
        let mut v = self.0.to_vec();
        v.push(f.clone());
        Trace(v.into())
    }

    pub fn names(&self) -> &[Name] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(n)?;
        }
        f.write_str("]")
    }
}

#[derive(Clone, Debug)]
pub enum AnnTerm {
    Var(Name),
    /// Names carry no annotation; the enclosing application node does.
    Sym(Name),
    App(Arc<AnnApp>),
}

#[derive(Debug)]
pub struct AnnApp {
    pub head: AnnTerm,
    pub args: Vec<AnnTerm>,
    pub trace: Trace,
}

impl AnnTerm {
    pub fn app(head: AnnTerm, args: Vec<AnnTerm>, trace: Trace) -> AnnTerm {
        AnnTerm::App(Arc::new(AnnApp { head, args, trace }))
    }

    /// Child `0` of an application is its head, child `i + 1` its `i`-th
    /// argument.
    pub fn child(&self, idx: usize) -> Option<&AnnTerm> {
        match self {
            AnnTerm::App(a) if idx == 0 => Some(&a.head),
            AnnTerm::App(a) => a.args.get(idx - 1),
            _ => None,
        }
    }

    pub fn at(&self, path: &Path) -> Option<&AnnTerm> {
        path.0.iter().try_fold(self, |t, &i| t.child(i))
    }

    pub fn size(&self) -> usize {
        match self {
            AnnTerm::Var(_) | AnnTerm::Sym(_) => 1,
            AnnTerm::App(a) => {
                1 + a.head.size() + a.args.iter().map(AnnTerm::size).sum::<usize>()
            }
        }
    }

    /// Renders with traces: `f[l](args)` in first-order mode,
    /// `head(args)[l]` in higher-order mode.
    pub fn render(&self, mode: Mode) -> String {
        let mut out = String::new();
        self.render_into(mode, &mut out);
        out
    }

    fn render_into(&self, mode: Mode, out: &mut String) {
        match self {
            AnnTerm::Var(x) | AnnTerm::Sym(x) => out.push_str(x),
            AnnTerm::App(a) => {
                a.head.render_into(mode, out);
                if mode == Mode::FirstOrder {
                    out.push_str(&a.trace.to_string());
                    if a.args.is_empty() {
                        return;
                    }
                }
                out.push('(');
                for (i, arg) in a.args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    arg.render_into(mode, out);
                }
                out.push(')');
                if mode == Mode::ClosedHigherOrder {
                    out.push_str(&a.trace.to_string());
                }
            }
        }
    }

    /// Visits every trace in the term.
    pub fn for_each_trace(&self, f: &mut dyn FnMut(&Trace)) {
        if let AnnTerm::App(a) = self {
            f(&a.trace);
            a.head.for_each_trace(f);
            for arg in &a.args {
                arg.for_each_trace(f);
            }
        }
    }
}

/// Sequence of child indices from the root (see [`AnnTerm::child`]).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Path(pub Vec<usize>);

impl Path {
    pub fn root() -> Path {
        Path(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        f.write_str(&parts.join("."))
    }
}

/// The annotating substitution: variables are replaced per `subst` (keeping
/// their annotations), and every application node coming from `t` gets the
/// trace `l`.
pub fn annotate(t: &Term, subst: &HashMap<Name, AnnTerm>, l: &Trace) -> AnnTerm {
    annotate_with(t, &|x| subst.get(x).cloned(), l)
}

fn annotate_with(t: &Term, lookup: &dyn Fn(&str) -> Option<AnnTerm>, l: &Trace) -> AnnTerm {
    match t {
        Term::Var(x) => lookup(x).unwrap_or_else(|| AnnTerm::Var(x.clone())),
        Term::Sym(f) => AnnTerm::Sym(f.clone()),
        Term::App(a) => AnnTerm::app(
            annotate_with(&a.head, lookup, l),
            a.args.iter().map(|u| annotate_with(u, lookup, l)).collect(),
            l.clone(),
        ),
    }
}

pub fn erase(t: &AnnTerm) -> Term {
    match t {
        AnnTerm::Var(x) => Term::Var(x.clone()),
        AnnTerm::Sym(f) => Term::Sym(f.clone()),
        AnnTerm::App(a) => Term::app(erase(&a.head), a.args.iter().map(erase).collect()),
    }
}

// ---------------------------------------------------------------------------
// Programs

#[derive(Clone, Debug)]
pub struct Def {
    pub name: Name,
    pub params: Vec<Name>,
    pub body: Term,
}

#[derive(Clone, Debug)]
pub struct Program {
    defs: Vec<Def>,
    index: HashMap<Name, usize>,
    root: Term,
    mode: Mode,
}

impl Program {
    pub fn new(defs: Vec<Def>, root: Term, mode: Mode) -> Result<Program, CalcError> {
        let mut index = HashMap::new();
        for (i, d) in defs.iter().enumerate() {
            if index.insert(d.name.clone(), i).is_some() {
                return Err(CalcError::DuplicateDefinition {
                    name: d.name.to_string(),
                    pos: None,
                });
            }
            for (j, p) in d.params.iter().enumerate() {
                if d.params[..j].contains(p) {
                    return Err(CalcError::MalformedProgram(format!(
                        "parameter `{p}` of `{}` is declared twice",
                        d.name
                    )));
                }
            }
        }
        let program = Program {
            defs,
            index,
            root,
            mode,
        };
        for d in &program.defs {
            program.check_term(&d.body, Some(&d.params))?;
        }
        program.check_term(&program.root, None)?;
        Ok(program)
    }

    /// The same definitions with another root term.
    pub fn with_root(&self, root: Term) -> Result<Program, CalcError> {
        self.check_term(&root, None)?;
        Ok(Program {
            root,
            ..self.clone()
        })
    }

    fn check_term(&self, t: &Term, params: Option<&[Name]>) -> Result<(), CalcError> {
        match t {
            Term::Var(x) => match params {
                Some(ps) if !ps.contains(x) => Err(CalcError::MalformedProgram(format!(
                    "unbound variable `{x}` in a definition body"
                ))),
                _ => Ok(()),
            },
            Term::Sym(f) => {
                if self.mode == Mode::FirstOrder {
                    return Err(CalcError::MalformedProgram(format!(
                        "bare name `{f}` outside of head position in first-order mode"
                    )));
                }
                Ok(())
            }
            Term::App(a) => {
                match (&a.head, self.mode) {
                    (Term::Sym(f), Mode::FirstOrder) => {
                        if let Some(d) = self.lookup(f) {
                            if d.params.len() != a.args.len() {
                                return Err(CalcError::ArityMismatch {
                                    name: f.to_string(),
                                    expected: d.params.len(),
                                    found: a.args.len(),
                                    pos: None,
                                });
                            }
                        }
                    }
                    (_, Mode::FirstOrder) => {
                        return Err(CalcError::MalformedProgram(
                            "application head must be a name in first-order mode".into(),
                        ))
                    }
                    (head, Mode::ClosedHigherOrder) => self.check_term(head, params)?,
                }
                a.args.iter().try_for_each(|u| self.check_term(u, params))
            }
        }
    }

    pub fn defs(&self) -> &[Def] {
        &self.defs
    }

    pub fn root(&self) -> &Term {
        &self.root
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn lookup(&self, f: &str) -> Option<&Def> {
        self.index.get(f).map(|&i| &self.defs[i])
    }

    /// The root annotated with empty traces everywhere.
    pub fn initial(&self) -> AnnTerm {
        annotate(&self.root, &HashMap::new(), &Trace::empty())
    }

    /// Classifies an application node: `Some((f, enabled))` when the node is
    /// a call of a defined function with matching arity.
    fn redex_of(&self, node: &AnnApp) -> Option<(&Def, bool)> {
        let AnnTerm::Sym(f) = &node.head else {
            return None;
        };
        let def = self.lookup(f)?;
        if def.params.len() != node.args.len() {
            return None;
        }
        Some((def, !node.trace.contains(f)))
    }

    /// Renders the program back in `.lam` syntax.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, d) in self.defs.iter().enumerate() {
            out.push_str(if i == 0 { "let rec " } else { "    and " });
            out.push_str(&d.name);
            out.push('(');
            let ps: Vec<&str> = d.params.iter().map(|p| &**p).collect();
            out.push_str(&ps.join(", "));
            out.push_str(") = ");
            out.push_str(&d.body.render(self.mode));
            out.push('\n');
        }
        if !self.defs.is_empty() {
            out.push_str("in ");
        }
        out.push_str(&self.root.render(self.mode));
        out.push('\n');
        out
    }
}

// ---------------------------------------------------------------------------
// Redexes and steps

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RedexKind {
    Enabled,
    Blocked,
}

/// All redex positions in leftmost-outermost (pre-order) order.
pub fn find_redexes(p: &Program, t: &AnnTerm) -> Vec<(Path, RedexKind)> {
    fn go(p: &Program, t: &AnnTerm, path: &mut Vec<usize>, out: &mut Vec<(Path, RedexKind)>) {
        if let AnnTerm::App(a) = t {
            if let Some((_, enabled)) = p.redex_of(a) {
                let kind = if enabled {
                    RedexKind::Enabled
                } else {
                    RedexKind::Blocked
                };
                out.push((Path(path.clone()), kind));
            }
            path.push(0);
            go(p, &a.head, path, out);
            path.pop();
            for (i, arg) in a.args.iter().enumerate() {
                path.push(i + 1);
                go(p, arg, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(p, t, &mut Vec::new(), &mut out);
    out
}

/// Finds the first redex in strategy order, enabled or blocked.
fn first_redex(p: &Program, t: &AnnTerm, strategy: Strategy) -> Option<(Path, bool)> {
    fn go(p: &Program, t: &AnnTerm, strategy: Strategy, path: &mut Vec<usize>) -> Option<bool> {
        let AnnTerm::App(a) = t else {
            return None;
        };
        let here = p.redex_of(a).map(|(_, enabled)| enabled);
        if here.is_some() && strategy == Strategy::LeftmostOutermost {
            return here;
        }
        path.push(0);
        if let Some(found) = go(p, &a.head, strategy, path) {
            return Some(found);
        }
        path.pop();
        for (i, arg) in a.args.iter().enumerate() {
            path.push(i + 1);
            if let Some(found) = go(p, arg, strategy, path) {
                return Some(found);
            }
            path.pop();
        }
        here
    }
    let mut path = Vec::new();
    go(p, t, strategy, &mut path).map(|enabled| (Path(path), enabled))
}

#[derive(Clone, Debug)]
pub enum StepResult {
    Reduced {
        next: AnnTerm,
        path: Path,
        name: Name,
    },
    NormalForm,
    Blocked {
        path: Path,
        name: Name,
        trace: Trace,
    },
}

/// Expands the call at `path`: `f(ts) at l` becomes
/// `annotate(body_f, {params ↦ ts}, l·f)`.
fn contract(p: &Program, node: &AnnApp) -> (Name, AnnTerm) {
    let (def, enabled) = p.redex_of(node).expect("contract on a non-redex");
    debug_assert!(enabled);
    let trace = node.trace.extended(&def.name);
    let lookup = |x: &str| {
        def.params
            .iter()
            .position(|q| &**q == x)
            .map(|i| node.args[i].clone())
    };
    (def.name.clone(), annotate_with(&def.body, &lookup, &trace))
}

fn replace_at(t: &AnnTerm, path: &[usize], f: &mut dyn FnMut(&AnnApp) -> AnnTerm) -> AnnTerm {
    let AnnTerm::App(a) = t else {
        unreachable!("path leads through a leaf")
    };
    match path.split_first() {
        None => f(a),
        Some((&0, rest)) => AnnTerm::app(replace_at(&a.head, rest, f), a.args.clone(), a.trace.clone()),
        Some((&i, rest)) => {
            let mut args = a.args.clone();
            args[i - 1] = replace_at(&a.args[i - 1], rest, f);
            AnnTerm::app(a.head.clone(), args, a.trace.clone())
        }
    }
}

/// One step of monitored reduction. The strategy picks a redex among all
/// of them; if its pick is blocked, the term is reported as diverging.
pub fn step(p: &Program, t: &AnnTerm, strategy: Strategy) -> StepResult {
    match first_redex(p, t, strategy) {
        Some((path, true)) => {
            let mut expanded = None;
            let next = replace_at(t, &path.0, &mut |node| {
                let (f, body) = contract(p, node);
                expanded = Some(f);
                body
            });
            StepResult::Reduced {
                next,
                path,
                name: expanded.expect("redex contracted"),
            }
        }
        Some((path, false)) => {
            let AnnTerm::App(a) = t.at(&path).expect("valid path") else {
                unreachable!()
            };
            let AnnTerm::Sym(f) = &a.head else {
                unreachable!()
            };
            StepResult::Blocked {
                name: f.clone(),
                trace: a.trace.clone(),
                path,
            }
        }
        None => StepResult::NormalForm,
    }
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Normal {
        term: Term,
        steps: u64,
    },
    Diverges {
        name: Name,
        trace: Trace,
        path: Path,
        /// The stuck annotated term.
        term: AnnTerm,
        steps: u64,
    },
}

impl Outcome {
    pub fn steps(&self) -> u64 {
        match self {
            Outcome::Normal { steps, .. } | Outcome::Diverges { steps, .. } => *steps,
        }
    }

    pub fn is_normal(&self) -> bool {
        matches!(self, Outcome::Normal { .. })
    }
}

/// One reduction step as observed by [`normalize_observed`].
pub struct StepEvent<'a> {
    pub index: u64,
    pub before: &'a AnnTerm,
    pub after: &'a AnnTerm,
    pub path: &'a Path,
    pub name: &'a Name,
}

/// Monitored normalization from the all-empty-trace annotation of the root.
/// Always terminates.
pub fn normalize(p: &Program, strategy: Strategy) -> Outcome {
    normalize_observed(p, strategy, None, &mut |_| {}).expect("no step limit")
}

/// [`normalize`] with an optional step-limit safeguard and a per-step
/// observer.
pub fn normalize_observed(
    p: &Program,
    strategy: Strategy,
    max_steps: Option<u64>,
    observer: &mut dyn FnMut(&StepEvent<'_>),
) -> Result<Outcome, CalcError> {
    let mut t = p.initial();
    let mut steps = 0u64;
    loop {
        match step(p, &t, strategy) {
            StepResult::Reduced { next, path, name } => {
                if max_steps.is_some_and(|m| steps >= m) {
                    return Err(CalcError::StepLimit(steps));
                }
                steps += 1;
                observer(&StepEvent {
                    index: steps,
                    before: &t,
                    after: &next,
                    path: &path,
                    name: &name,
                });
                t = next;
            }
            StepResult::NormalForm => {
                return Ok(Outcome::Normal {
                    term: erase(&t),
                    steps,
                })
            }
            StepResult::Blocked { path, name, trace } => {
                return Ok(Outcome::Diverges {
                    name,
                    trace,
                    path,
                    term: t,
                    steps,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests;
