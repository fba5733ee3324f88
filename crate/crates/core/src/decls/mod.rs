//! Mini-ML datatype declarations: parsing, sum normal forms, conflict
//! checking of `[@unboxed]` constructors and pattern-match dispatch tests.
//!
//! Unfolding a type through its declarations is first-order reduction, so
//! it is monitored exactly like [`crate::calculus`]: every type application
//! carries the trace of declarations whose unfolding produced it, and a type
//! found in its own trace is reported as a cycle instead of being unfolded.

mod parse;
mod translate;

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::calculus::{Name, Pos, Trace};
use crate::shapes::{ctor_shape, Clash, Head, HeadShape, Overlap, PrimTable, ShapeError, Side};

pub use parse::{parse_decls, parse_decls_with};
pub use translate::{component_keys, read_back, translate_to_program, type_term, ReadBackError, SnfKey};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum DeclError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: type `{name}` is declared twice")]
    DuplicateTypeName { name: String, pos: Pos },
    #[error("{pos}: constructor `{name}` is declared twice")]
    DuplicateCtor { name: String, pos: Pos },
    #[error("{pos}: unbound type constructor `{name}`")]
    UnboundTypeName { name: String, pos: Pos },
    #[error("{pos}: unbound type variable `{name}`")]
    UnboundTypeVariable { name: String, pos: Pos },
    #[error("{pos}: type `{name}` expects {expected} argument(s), found {found}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
        pos: Pos,
    },
    #[error("{pos}: [@unboxed] constructor `{ctor}` must have exactly one argument")]
    UnboxedArity { ctor: String, pos: Pos },
    #[error("{pos}: {source}")]
    Shape { source: ShapeError, pos: Pos },
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("type `{decl}` has no constructor `{ctor}`")]
    UnknownCtor { decl: String, ctor: String },
    #[error("type `{0}` was not accepted")]
    DeclNotAccepted(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TypeExpr {
    /// `'a`
    Var(Name),
    /// A declared type applied to its arguments.
    App(Name, Vec<TypeExpr>),
    /// A primitive from the primitive table.
    Prim(Name, Vec<TypeExpr>),
}

impl TypeExpr {
    pub fn head(&self) -> &Name {
        match self {
            TypeExpr::Var(a) | TypeExpr::App(a, _) | TypeExpr::Prim(a, _) => a,
        }
    }

    pub fn subst(&self, env: &HashMap<Name, TypeExpr>) -> TypeExpr {
        match self {
            TypeExpr::Var(a) => env.get(a).cloned().unwrap_or_else(|| self.clone()),
            TypeExpr::App(t, args) => TypeExpr::App(t.clone(), args.iter().map(|u| u.subst(env)).collect()),
            TypeExpr::Prim(t, args) => TypeExpr::Prim(t.clone(), args.iter().map(|u| u.subst(env)).collect()),
        }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            TypeExpr::Var(_) => false,
            TypeExpr::App(_, args) | TypeExpr::Prim(_, args) => args.iter().all(TypeExpr::is_closed),
        }
    }
}

/// OCaml-style rendering: `int`, `'a id`, `('a, int) pair`.
impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeExpr::Var(a) => f.write_str(a),
            TypeExpr::App(t, args) | TypeExpr::Prim(t, args) => {
                match args.len() {
                    0 => {}
                    1 => write!(f, "{} ", args[0])?,
                    _ => {
                        let parts: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                        write!(f, "({}) ", parts.join(", "))?
                    }
                }
                f.write_str(t)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ctor {
    pub name: Name,
    pub args: Vec<TypeExpr>,
    pub unboxed: bool,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeclBody {
    /// Constructors in source order.
    Variant(Vec<Ctor>),
    Abbrev(TypeExpr),
    /// `None` when no `[@shape]` was given.
    Abstract(Option<HeadShape>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decl {
    pub name: Name,
    pub params: Vec<Name>,
    pub body: DeclBody,
    pub pos: Pos,
}

impl Decl {
    /// `t 'a 'b` with its own parameters as arguments.
    pub fn generic(&self) -> TypeExpr {
        TypeExpr::App(self.name.clone(), self.params.iter().cloned().map(TypeExpr::Var).collect())
    }

    pub fn ctor(&self, c: &str) -> Option<&Ctor> {
        match &self.body {
            DeclBody::Variant(cs) => cs.iter().find(|k| &*k.name == c),
            _ => None,
        }
    }

    /// For a boxed constructor: whether it is constant and its index among
    /// the boxed constructors of the same kind.
    pub fn ctor_index(&self, c: &str) -> Option<(bool, usize)> {
        let DeclBody::Variant(cs) = &self.body else {
            return None;
        };
        let (mut consts, mut blocks) = (0, 0);
        for k in cs {
            if k.unboxed {
                if &*k.name == c {
                    return None;
                }
                continue;
            }
            let constant = k.args.is_empty();
            let counter = if constant { &mut consts } else { &mut blocks };
            if &*k.name == c {
                return Some((constant, *counter));
            }
            *counter += 1;
        }
        None
    }

    pub fn abstract_shape(&self) -> Option<HeadShape> {
        match &self.body {
            DeclBody::Abstract(s) => Some(s.clone().unwrap_or_else(HeadShape::top)),
            _ => None,
        }
    }
}

/// A checked declaration environment: declarations in file order plus the
/// primitive table they were resolved against.
#[derive(Clone, Debug)]
pub struct Decls {
    decls: Vec<Decl>,
    index: HashMap<Name, usize>,
    prims: PrimTable,
}

impl Decls {
    pub(crate) fn new(decls: Vec<Decl>, prims: PrimTable) -> Decls {
        let index = decls.iter().enumerate().map(|(i, d)| (d.name.clone(), i)).collect();
        Decls { decls, index, prims }
    }

    pub fn decls(&self) -> &[Decl] {
        &self.decls
    }

    pub fn get(&self, t: &str) -> Option<&Decl> {
        self.index.get(t).map(|&i| &self.decls[i])
    }

    pub fn prims(&self) -> &PrimTable {
        &self.prims
    }

    pub fn len(&self) -> usize {
        self.decls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Sum normal forms

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Component {
    /// A boxed constructor with its (substituted) argument types.
    Boxed {
        decl: Name,
        ctor: Name,
        args: Vec<TypeExpr>,
        constant: bool,
        index: usize,
    },
    Var(Name),
    /// A primitive. `inner` holds the normal forms of the arguments of a
    /// lazylike primitive and is empty otherwise.
    Prim {
        name: Name,
        args: Vec<TypeExpr>,
        inner: Vec<SumNf>,
    },
    /// An abstract type, opaque to unfolding.
    Abstract {
        decl: Name,
        args: Vec<TypeExpr>,
        shape: HeadShape,
    },
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::Boxed { ctor, args, .. } if args.is_empty() => f.write_str(ctor),
            Component::Boxed { ctor, args, .. } => {
                let parts: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                write!(f, "{ctor} of {}", parts.join(" * "))
            }
            Component::Var(a) => f.write_str(a),
            Component::Prim { name, args, .. } => TypeExpr::Prim(name.clone(), args.clone()).fmt(f),
            Component::Abstract { decl, args, .. } => TypeExpr::App(decl.clone(), args.clone()).fmt(f),
        }
    }
}

/// A formal sum of components, in unfolding order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SumNf(pub Vec<Component>);

impl fmt::Display for SumNf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Unfolding stopped at a type already in its own trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cycle {
    pub name: Name,
    pub trace: Trace,
    /// Types being unfolded from the root down to the blocked one, which is
    /// included last.
    pub path: Vec<Name>,
}

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} blocked with trace {}", self.name, self.trace)
    }
}

/// A type expression whose applications carry traces.
#[derive(Clone, Debug)]
enum AnnTy {
    Var(Name),
    App {
        name: Name,
        args: Vec<AnnTy>,
        prim: bool,
        trace: Trace,
    },
}

fn annotate(t: &TypeExpr, env: &HashMap<Name, AnnTy>, l: &Trace) -> AnnTy {
    match t {
        TypeExpr::Var(a) => env.get(a).cloned().unwrap_or_else(|| AnnTy::Var(a.clone())),
        TypeExpr::App(n, args) | TypeExpr::Prim(n, args) => AnnTy::App {
            name: n.clone(),
            args: args.iter().map(|u| annotate(u, env, l)).collect(),
            prim: matches!(t, TypeExpr::Prim(..)),
            trace: l.clone(),
        },
    }
}

fn erase(t: &AnnTy) -> TypeExpr {
    match t {
        AnnTy::Var(a) => TypeExpr::Var(a.clone()),
        AnnTy::App { name, args, prim, .. } => {
            let args = args.iter().map(erase).collect();
            if *prim {
                TypeExpr::Prim(name.clone(), args)
            } else {
                TypeExpr::App(name.clone(), args)
            }
        }
    }
}

struct Normalizer<'a> {
    env: &'a Decls,
    /// Names currently being unfolded, for cycle diagnostics.
    stack: Vec<Name>,
}

impl Normalizer<'_> {
    fn norm(&mut self, t: &AnnTy, out: &mut Vec<Component>) -> Result<(), Cycle> {
        match t {
            AnnTy::Var(a) => out.push(Component::Var(a.clone())),
            AnnTy::App {
                name, args, prim: true, ..
            } => {
                let lazylike = self.env.prims.get(name).is_some_and(|e| e.lazylike);
                let mut inner = Vec::new();
                if lazylike {
                    for a in args {
                        let mut s = Vec::new();
                        self.norm(a, &mut s)?;
                        inner.push(SumNf(s));
                    }
                }
                out.push(Component::Prim {
                    name: name.clone(),
                    args: args.iter().map(erase).collect(),
                    inner,
                });
            }
            AnnTy::App {
                name, args, trace, ..
            } => {
                let d = self.env.get(name).expect("resolved type name");
                if let DeclBody::Abstract(_) = d.body {
                    out.push(Component::Abstract {
                        decl: name.clone(),
                        args: args.iter().map(erase).collect(),
                        shape: d.abstract_shape().expect("abstract"),
                    });
                    return Ok(());
                }
                if trace.contains(name) {
                    let mut path = self.stack.clone();
                    path.push(name.clone());
                    return Err(Cycle {
                        name: name.clone(),
                        trace: trace.clone(),
                        path,
                    });
                }
                let l = trace.extended(name);
                let sigma: HashMap<Name, AnnTy> = d.params.iter().cloned().zip(args.iter().cloned()).collect();
                self.stack.push(name.clone());
                self.unfold(d, &sigma, &l, &mut |_, c| out.push(c))?;
                self.stack.pop();
            }
        }
        Ok(())
    }

    /// One unfolding of `d` at trace `l`, reporting each component with the
    /// constructor it comes from (`None` for an abbreviation).
    fn unfold(
        &mut self,
        d: &Decl,
        sigma: &HashMap<Name, AnnTy>,
        l: &Trace,
        emit: &mut dyn FnMut(Option<&Ctor>, Component),
    ) -> Result<(), Cycle> {
        match &d.body {
            DeclBody::Variant(ctors) => {
                for k in ctors {
                    if k.unboxed {
                        let mut s = Vec::new();
                        self.norm(&annotate(&k.args[0], sigma, l), &mut s)?;
                        for c in s {
                            emit(Some(k), c);
                        }
                    } else {
                        let (constant, index) = d.ctor_index(&k.name).expect("boxed constructor");
                        let args = k.args.iter().map(|a| erase(&annotate(a, sigma, l))).collect();
                        emit(
                            Some(k),
                            Component::Boxed {
                                decl: d.name.clone(),
                                ctor: k.name.clone(),
                                args,
                                constant,
                                index,
                            },
                        );
                    }
                }
            }
            DeclBody::Abbrev(t) => {
                let mut s = Vec::new();
                self.norm(&annotate(t, sigma, l), &mut s)?;
                for c in s {
                    emit(None, c);
                }
            }
            DeclBody::Abstract(_) => unreachable!("abstract types are not unfolded"),
        }
        Ok(())
    }
}

/// Sum normal form of `t`, unfolding from an all-empty-trace annotation.
pub fn normalize_type(t: &TypeExpr, env: &Decls) -> Result<SumNf, Cycle> {
    let mut n = Normalizer {
        env,
        stack: Vec::new(),
    };
    let mut out = Vec::new();
    n.norm(&annotate(t, &HashMap::new(), &Trace::empty()), &mut out)?;
    Ok(SumNf(out))
}

/// Shape of a single component. Lazylike primitives join the shapes of
/// their arguments' normal forms.
pub fn component_shape(c: &Component, env: &Decls) -> Result<HeadShape, ShapeError> {
    match c {
        Component::Boxed { constant, index, .. } => Ok(ctor_shape(*constant, *index)),
        Component::Var(_) => Ok(HeadShape::top()),
        Component::Prim { name, inner, .. } => {
            let shapes = inner
                .iter()
                .map(|s| union_shape(s, env))
                .collect::<Result<Vec<_>, _>>()?;
            env.prims.shape(name, &shapes)
        }
        Component::Abstract { shape, .. } => Ok(shape.clone()),
    }
}

/// Plain union of the component shapes, ignoring overlaps.
pub fn union_shape(s: &SumNf, env: &Decls) -> Result<HeadShape, ShapeError> {
    s.0.iter().try_fold(HeadShape::empty(), |acc, c| Ok(acc.union(&component_shape(c, env)?)))
}

/// Shape of a sum as a disjoint-union fold; the error is the first clash.
pub fn shape_of_snf(s: &SumNf, env: &Decls) -> Result<Result<HeadShape, Clash>, ShapeError> {
    let mut acc = HeadShape::empty();
    for c in &s.0 {
        match acc.disjoint_union(&component_shape(c, env)?) {
            Ok(u) => acc = u,
            Err(clash) => return Ok(Err(clash)),
        }
    }
    Ok(Ok(acc))
}

// ---------------------------------------------------------------------------
// Checking

/// Where a conflicting component comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Origin {
    /// The constructor of the checked declaration, if any.
    pub ctor: Option<String>,
    pub component: String,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.ctor {
            Some(c) if *c != self.component => write!(f, "{c} ({})", self.component),
            Some(c) => f.write_str(c),
            None => f.write_str(&self.component),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConflictWitness {
    pub side: Side,
    pub value: Overlap,
    pub left: Origin,
    pub right: Origin,
}

impl ConflictWitness {
    pub fn head(&self) -> Head {
        Clash {
            side: self.side,
            value: self.value,
        }
        .head()
    }
}

impl fmt::Display for ConflictWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let clash = Clash {
            side: self.side,
            value: self.value,
        };
        write!(f, "{clash}, shared by {} and {}", self.left, self.right)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accepted {
        shape: HeadShape,
        /// Argument shape of each unboxed constructor, in source order.
        unboxed: Vec<(Name, HeadShape)>,
    },
    RejectedConflict(ConflictWitness),
    RejectedCycle(Cycle),
}

impl Verdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Verdict::Accepted { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub decl: Name,
    pub verdict: Verdict,
}

pub const CONFLICT_BANNER: &str =
    "This declaration is invalid, some [@unboxed] annotations introduce overlapping representations.";

fn check_one(d: &Decl, env: &Decls) -> Result<Verdict, ShapeError> {
    if let Some(shape) = d.abstract_shape() {
        return Ok(Verdict::Accepted {
            shape,
            unboxed: Vec::new(),
        });
    }
    let mut n = Normalizer {
        env,
        stack: vec![d.name.clone()],
    };
    let sigma: HashMap<Name, AnnTy> = d.params.iter().map(|p| (p.clone(), AnnTy::Var(p.clone()))).collect();
    let mut labelled: Vec<(Option<Ctor>, Component)> = Vec::new();
    let unfolded = n.unfold(d, &sigma, &Trace::empty().extended(&d.name), &mut |k, c| {
        labelled.push((k.cloned(), c))
    });
    if let Err(cycle) = unfolded {
        return Ok(Verdict::RejectedCycle(cycle));
    }
    let origin = |k: &Option<Ctor>, c: &Component| Origin {
        ctor: k.as_ref().map(|k| k.name.to_string()),
        component: c.to_string(),
    };
    let mut acc = HeadShape::empty();
    let mut shapes: Vec<HeadShape> = Vec::new();
    for (i, (k, c)) in labelled.iter().enumerate() {
        let s = component_shape(c, env)?;
        match acc.disjoint_union(&s) {
            Ok(u) => acc = u,
            Err(clash) => {
                let head = clash.head();
                let earlier = shapes
                    .iter()
                    .position(|e| match clash.value {
                        Overlap::Top => matches!(e.side(clash.side), crate::shapes::SubShape::Top),
                        Overlap::Value(_) => e.contains(head),
                    })
                    .expect("some earlier component overlaps");
                let (lk, lc) = &labelled[earlier];
                return Ok(Verdict::RejectedConflict(ConflictWitness {
                    side: clash.side,
                    value: clash.value,
                    left: origin(lk, lc),
                    right: origin(k, c),
                }));
            }
        }
        debug_assert_eq!(shapes.len(), i);
        shapes.push(s);
    }
    let mut unboxed = Vec::new();
    if let DeclBody::Variant(ctors) = &d.body {
        for k in ctors.iter().filter(|k| k.unboxed) {
            let s = labelled
                .iter()
                .zip(&shapes)
                .filter(|((lk, _), _)| lk.as_ref().is_some_and(|lk| lk.name == k.name))
                .fold(HeadShape::empty(), |acc, (_, s)| acc.union(s));
            unboxed.push((k.name.clone(), s));
        }
    }
    Ok(Verdict::Accepted { shape: acc, unboxed })
}

/// One verdict per declaration, in file order.
pub fn check_decls(env: &Decls) -> Result<Vec<CheckReport>, DeclError> {
    env.decls
        .iter()
        .map(|d| {
            check_one(d, env)
                .map(|verdict| CheckReport {
                    decl: d.name.clone(),
                    verdict,
                })
                .map_err(|source| DeclError::Shape { source, pos: d.pos })
        })
        .collect()
}

/// Text report, one block per declaration.
pub fn render_reports(reports: &[CheckReport]) -> String {
    let mut out = String::new();
    for r in reports {
        match &r.verdict {
            Verdict::Accepted { shape, unboxed } => {
                out.push_str(&format!("type {}: Accepted, shape {shape}\n", r.decl));
                for (k, s) in unboxed {
                    out.push_str(&format!("  {k} [@unboxed]: {s}\n"));
                }
            }
            Verdict::RejectedConflict(w) => {
                out.push_str(&format!("type {}: Rejected\n", r.decl));
                out.push_str(&format!("  Error: {CONFLICT_BANNER}\n"));
                out.push_str(&format!("  witness: {w}\n"));
            }
            Verdict::RejectedCycle(c) => {
                out.push_str(&format!("type {}: Rejected\n", r.decl));
                out.push_str(&format!("  Error: the shape computation does not terminate: {c}\n"));
                let path: Vec<&str> = c.path.iter().map(|n| &**n).collect();
                out.push_str(&format!("  cycle: {}\n", path.join(" -> ")));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Pattern matching

/// The head test that selects one constructor of an accepted declaration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DispatchTest {
    pub ctor: Name,
    pub test: HeadShape,
}

impl DispatchTest {
    pub fn matches(&self, h: Head) -> bool {
        self.test.contains(h)
    }
}

pub fn match_plan(env: &Decls, reports: &[CheckReport], decl: &str, ctor: &str) -> Result<DispatchTest, DeclError> {
    let d = env.get(decl).ok_or_else(|| DeclError::UnknownType(decl.to_string()))?;
    let k = d.ctor(ctor).ok_or_else(|| DeclError::UnknownCtor {
        decl: decl.to_string(),
        ctor: ctor.to_string(),
    })?;
    let report = reports
        .iter()
        .find(|r| &*r.decl == decl)
        .ok_or_else(|| DeclError::DeclNotAccepted(decl.to_string()))?;
    let Verdict::Accepted { unboxed, .. } = &report.verdict else {
        return Err(DeclError::DeclNotAccepted(decl.to_string()));
    };
    let test = if k.unboxed {
        unboxed
            .iter()
            .find(|(n, _)| *n == k.name)
            .map(|(_, s)| s.clone())
            .expect("recorded unboxed shape")
    } else {
        let (constant, index) = d.ctor_index(ctor).expect("boxed constructor");
        ctor_shape(constant, index)
    };
    Ok(DispatchTest {
        ctor: k.name.clone(),
        test,
    })
}

/// Dispatch tests for every constructor of `decl`, in source order.
pub fn match_plans(env: &Decls, reports: &[CheckReport], decl: &str) -> Result<Vec<DispatchTest>, DeclError> {
    let d = env.get(decl).ok_or_else(|| DeclError::UnknownType(decl.to_string()))?;
    match &d.body {
        DeclBody::Variant(ctors) => ctors.iter().map(|k| match_plan(env, reports, decl, &k.name)).collect(),
        _ => Ok(Vec::new()),
    }
}

#[cfg(test)]
mod tests;
