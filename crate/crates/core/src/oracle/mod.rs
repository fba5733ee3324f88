//! Independent machinery to cross-check the monitored normalizer and the
//! shape checker: plain fuel-bounded reduction, the two naive monitors that
//! do not work, value enumeration, and random corpus generators.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::calculus::{Name, Path, Program, Strategy, Term};

pub mod gen;
pub mod selftest;
pub mod values;

pub use gen::{gen_decls, gen_macros, gen_program, gen_programs, program_to_cpp, GenParams};
pub use values::{enumerate_values, head_of, repr_value, soundness_violations, Repr, Value};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("fuel must be at least 1")]
    NoFuel,
    #[error("malformed program: {0}")]
    MalformedProgram(String),
    #[error("unbound type name `{0}`")]
    UnboundTypeName(String),
    #[error("type `{0}` is not closed")]
    NotClosed(String),
    #[error("value `{value}` does not have type `{ty}`")]
    IllTyped { value: String, ty: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FuelOutcome {
    Normal { term: Term, steps: u64 },
    OutOfFuel,
}

// ---------------------------------------------------------------------------
// Plain reduction

/// Substitutes `args` for `params`; parameter-free subterms of the body are
/// shared rather than copied.
fn instantiate(body: &Term, params: &[Name], args: &[Term]) -> Term {
    fn go(t: &Term, params: &[Name], args: &[Term]) -> Option<Term> {
        match t {
            Term::Var(x) => params.iter().position(|p| p == x).map(|i| args[i].clone()),
            Term::Sym(_) => None,
            Term::App(a) => {
                let head = go(&a.head, params, args);
                let new_args: Vec<Option<Term>> = a.args.iter().map(|u| go(u, params, args)).collect();
                if head.is_none() && new_args.iter().all(Option::is_none) {
                    return None;
                }
                Some(Term::app(
                    head.unwrap_or_else(|| a.head.clone()),
                    new_args
                        .into_iter()
                        .zip(&a.args)
                        .map(|(n, o)| n.unwrap_or_else(|| o.clone()))
                        .collect(),
                ))
            }
        }
    }
    go(body, params, args).unwrap_or_else(|| body.clone())
}

/// Contracts `t` if it is a call of a defined function with the right
/// number of arguments.
fn contract(p: &Program, t: &Term) -> Option<(Name, Term)> {
    let Term::App(a) = t else { return None };
    let Term::Sym(f) = &a.head else { return None };
    let def = p.lookup(f)?;
    (def.params.len() == a.args.len()).then(|| (f.clone(), instantiate(&def.body, &def.params, &a.args)))
}

fn is_redex(p: &Program, t: &Term) -> bool {
    let Term::App(a) = t else { return false };
    let Term::Sym(f) = &a.head else { return false };
    p.lookup(f).is_some_and(|d| d.params.len() == a.args.len())
}

/// The position of the next plain redex under `strategy`.
pub fn plain_redex(p: &Program, t: &Term, strategy: Strategy) -> Option<Path> {
    fn go(p: &Program, t: &Term, strategy: Strategy, path: &mut Vec<usize>) -> bool {
        let Term::App(a) = t else { return false };
        let here = is_redex(p, t);
        if here && strategy == Strategy::LeftmostOutermost {
            return true;
        }
        path.push(0);
        if go(p, &a.head, strategy, path) {
            return true;
        }
        path.pop();
        for (i, u) in a.args.iter().enumerate() {
            path.push(i + 1);
            if go(p, u, strategy, path) {
                return true;
            }
            path.pop();
        }
        here
    }
    let mut path = Vec::new();
    go(p, t, strategy, &mut path).then_some(Path(path))
}

/// One standard β-step at `path`; `None` if there is no redex there.
pub fn beta_step_at(p: &Program, t: &Term, path: &Path) -> Option<(Name, Term)> {
    fn go(p: &Program, t: &Term, path: &[usize]) -> Option<(Name, Term)> {
        let Some((&i, rest)) = path.split_first() else {
            return contract(p, t);
        };
        let Term::App(a) = t else { return None };
        if i == 0 {
            let (f, h) = go(p, &a.head, rest)?;
            return Some((f, Term::app(h, a.args.clone())));
        }
        let (f, u) = go(p, a.args.get(i - 1)?, rest)?;
        let mut args = a.args.clone();
        args[i - 1] = u;
        Some((f, Term::app(a.head.clone(), args)))
    }
    go(p, t, &path.0)
}

/// One plain step under `strategy`.
pub fn plain_step(p: &Program, t: &Term, strategy: Strategy) -> Option<(Path, Name, Term)> {
    let path = plain_redex(p, t, strategy)?;
    let (f, next) = beta_step_at(p, t, &path).expect("redex at chosen path");
    Some((path, f, next))
}

/// Work items of the innermost machine. `orig` and `start` record what to
/// memoize once the node's normal form is known.
enum Task {
    Eval(Term),
    Resume { cur: Term, orig: Term, start: u64 },
    /// `n` normal children are on the value stack.
    Children { n: usize, orig: Term, start: u64 },
}

struct OutOfFuel;

/// Innermost reduction substitutes normal arguments, so it works on terms
/// directly.
struct Fuel<'a> {
    p: &'a Program,
    fuel: u64,
    steps: u64,
    /// Keyed by node address; the original is kept alive so addresses are
    /// never reused. Values are the normal form and the steps it took, so a
    /// shared subterm is charged once per occurrence, as on a tree.
    memo: HashMap<usize, (Term, Term, u64)>,
    tasks: Vec<Task>,
    values: Vec<Term>,
}

fn key(a: &Arc<crate::calculus::App>) -> usize {
    Arc::as_ptr(a) as usize
}

impl Fuel<'_> {
    fn spend(&mut self, n: u64) -> Result<(), OutOfFuel> {
        self.steps += n;
        if self.steps > self.fuel {
            Err(OutOfFuel)
        } else {
            Ok(())
        }
    }

    /// Records a normal form. Substituted normal forms come back, so they
    /// are always recorded; an original node only when something besides
    /// its parent and the current task holds it.
    fn done(&mut self, orig: Term, nf: Term, start: u64) {
        let cost = self.steps - start;
        if let Term::App(a) = &nf {
            self.memo.entry(key(a)).or_insert_with(|| (nf.clone(), nf.clone(), 0));
        }
        if let Term::App(a) = &orig {
            if Arc::strong_count(a) > 2 {
                self.memo.entry(key(a)).or_insert_with(|| (orig.clone(), nf.clone(), cost));
            }
        }
        self.values.push(nf);
    }

    fn run(&mut self, root: &Term) -> Result<Term, OutOfFuel> {
        self.tasks.push(Task::Eval(root.clone()));
        while let Some(task) = self.tasks.pop() {
            match task {
                Task::Eval(t) => {
                    let hit = match &t {
                        Term::App(a) => self.memo.get(&key(a)).map(|(_, nf, cost)| (nf.clone(), *cost)),
                        _ => Some((t.clone(), 0)),
                    };
                    match hit {
                        Some((nf, cost)) => {
                            self.spend(cost)?;
                            self.values.push(nf);
                        }
                        None => self.tasks.push(Task::Resume {
                            cur: t.clone(),
                            orig: t,
                            start: self.steps,
                        }),
                    }
                }
                Task::Resume { cur, orig, start } => {
                    let Term::App(a) = &cur else {
                        self.done(orig, cur, start);
                        continue;
                    };
                    self.tasks.push(Task::Children {
                        n: a.args.len() + 1,
                        orig,
                        start,
                    });
                    self.tasks.extend(a.args.iter().rev().cloned().map(Task::Eval));
                    self.tasks.push(Task::Eval(a.head.clone()));
                }
                Task::Children { n, orig, start } => {
                    let mut children = self.values.split_off(self.values.len() - n);
                    let head = children.remove(0);
                    let node = Term::app(head, children);
                    if let Some((_, next)) = contract(self.p, &node) {
                        self.spend(1)?;
                        self.tasks.push(Task::Resume { cur: next, orig, start });
                        continue;
                    }
                    self.done(orig, node, start);
                }
            }
        }
        Ok(self.values.pop().expect("root value"))
    }
}

/// Plain β-reduction under `strategy`, without traces or blocking, giving up
/// after `fuel` steps.
pub fn fuel_normalize(p: &Program, strategy: Strategy, fuel: u64) -> Result<FuelOutcome, OracleError> {
    if fuel == 0 {
        return Err(OracleError::NoFuel);
    }
    let result = match strategy {
        Strategy::LeftmostOutermost => {
            let mut m = Lazy {
                p,
                fuel,
                steps: 0,
                memo: AddrMap::default(),
                defs: AddrMap::default(),
                tasks: Vec::new(),
                values: Vec::new(),
            };
            m.run(p.root()).map(|t| (t, m.steps))
        }
        Strategy::LeftmostInnermost => {
            let mut m = Fuel {
                p,
                fuel,
                steps: 0,
                memo: HashMap::new(),
                tasks: Vec::new(),
                values: Vec::new(),
            };
            m.run(p.root()).map(|t| (t, m.steps))
        }
    };
    Ok(match result {
        Ok((term, steps)) => FuelOutcome::Normal { term, steps },
        Err(OutOfFuel) => FuelOutcome::OutOfFuel,
    })
}

// Outermost reduction never looks inside an argument before it is needed,
// so substitution is delayed: a closure pairs a body subterm with the frame
// binding its parameters.

struct FrameData {
    params: Arc<[Name]>,
    env: Vec<Clo>,
}

type Frame = Option<Arc<FrameData>>;

#[derive(Clone)]
struct Clo {
    term: Term,
    frame: Frame,
}

impl Drop for FrameData {
    fn drop(&mut self) {
        let mut stack: Vec<Clo> = std::mem::take(&mut self.env);
        while let Some(mut c) = stack.pop() {
            if let Some(inner) = c.frame.take().and_then(Arc::into_inner) {
                let mut inner = inner;
                stack.append(&mut inner.env);
            }
        }
    }
}

impl Clo {
    /// The closure bound to `x`, with a key identifying the binding.
    fn bound(&self, x: &Name) -> Option<(Clo, (usize, usize))> {
        let frame = self.frame.as_ref()?;
        let i = frame.params.iter().position(|p| p == x)?;
        Some((frame.env.get(i)?.clone(), (Arc::as_ptr(frame) as usize, i)))
    }

    fn sub(&self, t: &Term) -> Clo {
        Clo {
            term: t.clone(),
            frame: self.frame.clone(),
        }
    }
}

enum LazyTask {
    Eval(Clo),
    /// The head of the closure's application is normal and on the value stack.
    Head(Clo),
    /// `n` normal arguments are on the value stack above their head.
    Children(usize),
    /// The value on top is the normal form of the binding `key` of `frame`.
    Memo { frame: Arc<FrameData>, key: (usize, usize), start: u64 },
}

/// Hashes the integer keys of the outermost machine.
#[derive(Default)]
struct AddrHasher(u64);

impl std::hash::Hasher for AddrHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.write_u64(u64::from(b));
        }
    }

    fn write_u64(&mut self, n: u64) {
        self.0 = (self.0.rotate_left(5) ^ n).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    }

    fn write_usize(&mut self, n: usize) {
        self.write_u64(n as u64);
    }
}

type AddrMap<K, V> = HashMap<K, V, std::hash::BuildHasherDefault<AddrHasher>>;

struct Lazy<'a> {
    p: &'a Program,
    fuel: u64,
    steps: u64,
    /// Bindings with their normal form and its cost; the frame is kept so
    /// its address is not reused. Each use is charged again, as if the
    /// argument had been copied.
    memo: AddrMap<(usize, usize), (Arc<FrameData>, Term, u64)>,
    /// Definitions by the address of a name occurring in the program.
    defs: AddrMap<usize, Option<(Arc<[Name]>, Term)>>,
    tasks: Vec<LazyTask>,
    values: Vec<Term>,
}

impl Lazy<'_> {
    fn spend(&mut self, n: u64) -> Result<(), OutOfFuel> {
        self.steps += n;
        if self.steps > self.fuel {
            Err(OutOfFuel)
        } else {
            Ok(())
        }
    }

    /// Contracts `f(args)` if `f` is defined with that arity.
    fn enter(&mut self, f: &Name, c: &Clo, args: &[Term]) -> Result<Option<Clo>, OutOfFuel> {
        let p = self.p;
        let def = self
            .defs
            .entry(Arc::as_ptr(f) as *const u8 as usize)
            .or_insert_with(|| p.lookup(f).map(|d| (d.params.clone().into(), d.body.clone())));
        match def {
            Some((params, body)) if params.len() == args.len() => {
                let (params, body) = (params.clone(), body.clone());
                self.spend(1)?;
                let env = args.iter().map(|u| c.sub(u)).collect();
                Ok(Some(Clo {
                    term: body,
                    frame: Some(Arc::new(FrameData { params, env })),
                }))
            }
            _ => Ok(None),
        }
    }

    /// The name a head stands for without any reduction.
    fn head_name(c: &Clo, h: &Term) -> Option<Name> {
        let mut c = match h {
            Term::Sym(f) => return Some(f.clone()),
            Term::Var(x) => c.bound(x)?.0,
            Term::App(_) => return None,
        };
        loop {
            let next = match &c.term {
                Term::Sym(f) => return Some(f.clone()),
                Term::Var(y) => c.bound(y)?.0,
                Term::App(_) => return None,
            };
            c = next;
        }
    }

    fn eval(&mut self, mut c: Clo) -> Result<(), OutOfFuel> {
        loop {
            let t = c.term.clone();
            match &t {
                Term::Sym(_) => {
                    self.values.push(t);
                    return Ok(());
                }
                Term::Var(x) => {
                    let Some((target, key)) = c.bound(x) else {
                        self.values.push(t);
                        return Ok(());
                    };
                    if let Some((_, nf, cost)) = self.memo.get(&key) {
                        let nf = nf.clone();
                        self.spend(*cost)?;
                        self.values.push(nf);
                        return Ok(());
                    }
                    let frame = c.frame.clone().expect("bound in a frame");
                    self.tasks.push(LazyTask::Memo {
                        frame,
                        key,
                        start: self.steps,
                    });
                    c = target;
                }
                Term::App(a) => {
                    if let Some(f) = Self::head_name(&c, &a.head) {
                        if let Some(next) = self.enter(&f, &c, &a.args)? {
                            c = next;
                            continue;
                        }
                    }
                    let head = c.sub(&a.head);
                    self.tasks.push(LazyTask::Head(c));
                    self.tasks.push(LazyTask::Eval(head));
                    return Ok(());
                }
            }
        }
    }

    fn run(&mut self, root: &Term) -> Result<Term, OutOfFuel> {
        self.tasks.push(LazyTask::Eval(Clo {
            term: root.clone(),
            frame: None,
        }));
        while let Some(task) = self.tasks.pop() {
            match task {
                LazyTask::Eval(c) => self.eval(c)?,
                LazyTask::Head(c) => {
                    let Term::App(a) = &c.term else { unreachable!("application") };
                    if let Some(Term::Sym(f)) = self.values.last() {
                        // A head that became a bare name may now be a redex.
                        let f = f.clone();
                        if let Some(next) = self.enter(&f, &c, &a.args)? {
                            self.values.pop();
                            self.tasks.push(LazyTask::Eval(next));
                            continue;
                        }
                    }
                    self.tasks.push(LazyTask::Children(a.args.len()));
                    self.tasks.extend(a.args.iter().rev().map(|u| LazyTask::Eval(c.sub(u))));
                }
                LazyTask::Children(n) => {
                    let args = self.values.split_off(self.values.len() - n);
                    let head = self.values.pop().expect("normal head");
                    self.values.push(Term::app(head, args));
                }
                LazyTask::Memo { frame, key, start } => {
                    let nf = self.values.last().expect("bound value").clone();
                    let cost = self.steps - start;
                    self.memo.insert(key, (frame, nf, cost));
                }
            }
        }
        Ok(self.values.pop().expect("root value"))
    }
}

// ---------------------------------------------------------------------------
// Rejected monitors

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum MonitorOutcome {
    Normal { term: String, steps: u64 },
    /// The monitor refused to perform step number `step`.
    Blocked { name: String, step: u64, term: String },
    /// Still running after the step budget.
    Undecided { steps: u64 },
}

/// Blocks as soon as the whole current term has been seen before.
pub fn naive_whole_term_monitor(p: &Program, strategy: Strategy, max_steps: u64) -> MonitorOutcome {
    let mut seen = HashSet::new();
    let mut t = p.root().clone();
    for steps in 0..max_steps {
        let Some((_, f, next)) = plain_step(p, &t, strategy) else {
            return MonitorOutcome::Normal {
                term: t.render(p.mode()),
                steps,
            };
        };
        if !seen.insert(t.clone()) {
            return MonitorOutcome::Blocked {
                name: f.to_string(),
                step: steps + 1,
                term: t.render(p.mode()),
            };
        }
        t = next;
    }
    match plain_redex(p, &t, strategy) {
        None => MonitorOutcome::Normal {
            term: t.render(p.mode()),
            steps: max_steps,
        },
        Some(_) => MonitorOutcome::Undecided { steps: max_steps },
    }
}

/// Blocks when the function of the chosen redex was already expanded
/// somewhere earlier in the run.
pub fn head_function_monitor(p: &Program, strategy: Strategy, max_steps: u64) -> MonitorOutcome {
    let mut expanded: HashSet<Name> = HashSet::new();
    let mut t = p.root().clone();
    for steps in 0..max_steps {
        let Some((_, f, next)) = plain_step(p, &t, strategy) else {
            return MonitorOutcome::Normal {
                term: t.render(p.mode()),
                steps,
            };
        };
        if !expanded.insert(f.clone()) {
            return MonitorOutcome::Blocked {
                name: f.to_string(),
                step: steps + 1,
                term: t.render(p.mode()),
            };
        }
        t = next;
    }
    MonitorOutcome::Undecided { steps: max_steps }
}

/// The trace monitor, in the same shape as the two naive ones.
pub fn trace_monitor(p: &Program, strategy: Strategy) -> MonitorOutcome {
    match crate::calculus::normalize(p, strategy) {
        crate::calculus::Outcome::Normal { term, steps } => MonitorOutcome::Normal {
            term: term.render(p.mode()),
            steps,
        },
        crate::calculus::Outcome::Diverges { name, term, steps, .. } => MonitorOutcome::Blocked {
            name: name.to_string(),
            step: steps + 1,
            term: crate::calculus::erase(&term).render(p.mode()),
        },
    }
}

#[cfg(test)]
mod tests;
