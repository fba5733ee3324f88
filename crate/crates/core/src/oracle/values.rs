//! Depth-bounded value enumeration, low-level representations and heads.

use std::collections::{HashMap, HashSet};
use std::fmt;

use super::OracleError;
use crate::calculus::{name, Name};
use crate::decls::{match_plans, CheckReport, DeclBody, Decls, TypeExpr, Verdict};
use crate::shapes::{Head, HeadShape, SubShape};

/// Enumeration stops adding values to a single type past this many.
pub const MAX_VALUES: usize = 4096;

/// Abbreviations do not consume depth; this bounds their unfolding.
const MAX_UNFOLD: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Ctor { ctor: Name, args: Vec<Value> },
    /// A sample of a primitive type, identified by its head.
    Prim { prim: Name, sample: Head },
    Tuple(Vec<Value>),
    /// A lazylike primitive represented by its argument directly.
    Forced { prim: Name, arg: usize, inner: Box<Value> },
    /// A sample of an abstract type.
    Abstract { decl: Name, sample: Head },
}

impl Value {
    /// The constructor at the root, if any.
    pub fn ctor(&self) -> Option<&Name> {
        match self {
            Value::Ctor { ctor, .. } => Some(ctor),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, vs: &[Value]| -> fmt::Result {
            for (i, v) in vs.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{v}")?;
            }
            Ok(())
        };
        match self {
            Value::Ctor { ctor, args } if args.is_empty() => write!(f, "{ctor}"),
            Value::Ctor { ctor, args } => {
                write!(f, "{ctor}(")?;
                list(f, args)?;
                write!(f, ")")
            }
            Value::Prim { prim, sample } => match (&**prim, sample) {
                ("int", Head::Imm(n)) => write!(f, "{n}"),
                ("bool", Head::Imm(0)) => write!(f, "true"),
                ("bool", Head::Imm(1)) => write!(f, "false"),
                _ => write!(f, "<{prim}: {sample}>"),
            },
            Value::Tuple(vs) => {
                write!(f, "(")?;
                list(f, vs)?;
                write!(f, ")")
            }
            Value::Forced { prim, inner, .. } => write!(f, "{prim}!{inner}"),
            Value::Abstract { decl, sample } => write!(f, "<{decl}: {sample}>"),
        }
    }
}

/// A machine representation: an immediate, or a tagged block of fields.
/// Opaque blocks have no fields.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Repr {
    Imm(i64),
    Block(i64, Vec<Repr>),
}

impl Repr {
    pub fn head(&self) -> Head {
        match self {
            Repr::Imm(n) => Head::Imm(*n),
            Repr::Block(t, _) => Head::Block(*t),
        }
    }
}

fn of_head(h: Head) -> Repr {
    match h {
        Head::Imm(n) => Repr::Imm(n),
        Head::Block(t) => Repr::Block(t, Vec::new()),
    }
}

fn is_tuple(prim: &str) -> bool {
    matches!(prim, "tuple" | "pair")
}

/// One sample head per immediate or tag listed in the shape; `top` sides
/// get the immediates 0 and 1 and the tag 0.
fn samples(shape: &HeadShape) -> Vec<Head> {
    let mut out = Vec::new();
    match &shape.imm {
        SubShape::Top => out.extend([Head::Imm(0), Head::Imm(1)]),
        SubShape::Fin(s) => out.extend(s.iter().map(|&n| Head::Imm(n))),
    }
    match &shape.block {
        SubShape::Top => out.push(Head::Block(0)),
        SubShape::Fin(s) => out.extend(s.iter().map(|&t| Head::Block(t))),
    }
    out
}

fn params_subst(params: &[Name], args: &[TypeExpr]) -> HashMap<Name, TypeExpr> {
    params.iter().cloned().zip(args.iter().cloned()).collect()
}

/// All tuples of one value per list, capped at [`MAX_VALUES`].
fn product(lists: &[Vec<Value>]) -> Vec<Vec<Value>> {
    let mut acc: Vec<Vec<Value>> = vec![Vec::new()];
    for l in lists {
        let mut next = Vec::new();
        'outer: for prefix in &acc {
            for v in l {
                if next.len() >= MAX_VALUES {
                    break 'outer;
                }
                let mut row = prefix.clone();
                row.push(v.clone());
                next.push(row);
            }
        }
        acc = next;
    }
    acc
}

fn enumerate(t: &TypeExpr, env: &Decls, depth: usize, unfold: usize) -> Result<Vec<Value>, OracleError> {
    if depth == 0 {
        return Ok(Vec::new());
    }
    match t {
        TypeExpr::Var(a) => Err(OracleError::NotClosed(a.to_string())),
        TypeExpr::App(d, targs) => {
            let decl = env.get(d).ok_or_else(|| OracleError::UnboundTypeName(d.to_string()))?;
            let sub = params_subst(&decl.params, targs);
            match &decl.body {
                DeclBody::Abbrev(_) if unfold == 0 => Ok(Vec::new()),
                DeclBody::Abbrev(b) => enumerate(&b.subst(&sub), env, depth, unfold - 1),
                DeclBody::Abstract(_) => {
                    let shape = decl.abstract_shape().expect("abstract");
                    Ok(samples(&shape)
                        .into_iter()
                        .map(|sample| Value::Abstract {
                            decl: d.clone(),
                            sample,
                        })
                        .collect())
                }
                DeclBody::Variant(ctors) => {
                    let mut out = Vec::new();
                    for k in ctors {
                        let lists = k
                            .args
                            .iter()
                            .map(|a| enumerate(&a.subst(&sub), env, depth - 1, MAX_UNFOLD))
                            .collect::<Result<Vec<_>, _>>()?;
                        for args in product(&lists) {
                            if out.len() >= MAX_VALUES {
                                return Ok(out);
                            }
                            out.push(Value::Ctor {
                                ctor: k.name.clone(),
                                args,
                            });
                        }
                    }
                    Ok(out)
                }
            }
        }
        TypeExpr::Prim(p, targs) => {
            if is_tuple(p) {
                let lists = targs
                    .iter()
                    .map(|a| enumerate(a, env, depth - 1, MAX_UNFOLD))
                    .collect::<Result<Vec<_>, _>>()?;
                return Ok(product(&lists).into_iter().map(Value::Tuple).collect());
            }
            let entry = env
                .prims()
                .get(p)
                .ok_or_else(|| OracleError::UnboundTypeName(p.to_string()))?;
            let mut out: Vec<Value> = samples(&entry.shape)
                .into_iter()
                .map(|sample| Value::Prim {
                    prim: p.clone(),
                    sample,
                })
                .collect();
            if entry.lazylike {
                for (i, a) in targs.iter().enumerate() {
                    for v in enumerate(a, env, depth - 1, MAX_UNFOLD)? {
                        if out.len() >= MAX_VALUES {
                            return Ok(out);
                        }
                        // The runtime only shortcuts a forced suspension to
                        // its contents when those cannot be mistaken for one.
                        if entry.shape.contains(repr(&v, a, env, MAX_UNFOLD)?.head()) {
                            continue;
                        }
                        out.push(Value::Forced {
                            prim: p.clone(),
                            arg: i,
                            inner: Box::new(v),
                        });
                    }
                }
            }
            Ok(out)
        }
    }
}

/// The values of the closed type `t` built with at most `depth` nested
/// constructors (primitive samples count as one level). Large products are
/// truncated at [`MAX_VALUES`].
pub fn enumerate_values(t: &TypeExpr, env: &Decls, depth: usize) -> Result<Vec<Value>, OracleError> {
    enumerate(t, env, depth, MAX_UNFOLD)
}

pub fn repr_value(v: &Value, t: &TypeExpr, env: &Decls) -> Result<Repr, OracleError> {
    repr(v, t, env, MAX_UNFOLD)
}

fn repr(v: &Value, t: &TypeExpr, env: &Decls, unfold: usize) -> Result<Repr, OracleError> {
    let ill = || OracleError::IllTyped {
        value: v.to_string(),
        ty: t.to_string(),
    };
    match t {
        TypeExpr::Var(a) => Err(OracleError::NotClosed(a.to_string())),
        TypeExpr::App(d, targs) => {
            let decl = env.get(d).ok_or_else(|| OracleError::UnboundTypeName(d.to_string()))?;
            let sub = params_subst(&decl.params, targs);
            match (&decl.body, v) {
                (DeclBody::Abbrev(_), _) if unfold == 0 => Err(ill()),
                (DeclBody::Abbrev(b), _) => repr(v, &b.subst(&sub), env, unfold - 1),
                (DeclBody::Abstract(_), Value::Abstract { decl: vd, sample }) if vd == d => {
                    let shape = decl.abstract_shape().expect("abstract");
                    if shape.contains(*sample) {
                        Ok(of_head(*sample))
                    } else {
                        Err(ill())
                    }
                }
                (DeclBody::Variant(_), Value::Ctor { ctor, args }) => {
                    let k = decl.ctor(ctor).ok_or_else(ill)?;
                    if k.args.len() != args.len() {
                        return Err(ill());
                    }
                    if k.unboxed {
                        return repr(&args[0], &k.args[0].subst(&sub), env, MAX_UNFOLD);
                    }
                    let (constant, index) = decl.ctor_index(ctor).expect("boxed constructor");
                    if constant {
                        return Ok(Repr::Imm(index as i64));
                    }
                    let fields = args
                        .iter()
                        .zip(&k.args)
                        .map(|(a, ty)| repr(a, &ty.subst(&sub), env, MAX_UNFOLD))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(Repr::Block(index as i64, fields))
                }
                _ => Err(ill()),
            }
        }
        TypeExpr::Prim(p, targs) => match v {
            Value::Tuple(vs) if is_tuple(p) && vs.len() == targs.len() => {
                let fields = vs
                    .iter()
                    .zip(targs)
                    .map(|(a, ty)| repr(a, ty, env, MAX_UNFOLD))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Repr::Block(0, fields))
            }
            Value::Prim { prim, sample } if prim == p => {
                let entry = env.prims().get(p).ok_or_else(ill)?;
                if entry.shape.contains(*sample) {
                    Ok(of_head(*sample))
                } else {
                    Err(ill())
                }
            }
            Value::Forced { prim, arg, inner } if prim == p => {
                let lazylike = env.prims().get(p).is_some_and(|e| e.lazylike);
                match targs.get(*arg) {
                    Some(ty) if lazylike => repr(inner, ty, env, MAX_UNFOLD),
                    _ => Err(ill()),
                }
            }
            _ => Err(ill()),
        },
    }
}

pub fn head_of(v: &Value, t: &TypeExpr, env: &Decls) -> Result<Head, OracleError> {
    repr_value(v, t, env).map(|r| r.head())
}

/// Closed instances of a declaration, its parameters ranging over `int`,
/// `bool` and `string`.
pub fn ground_instances(env: &Decls, decl: &str) -> Vec<TypeExpr> {
    let Some(d) = env.get(decl) else {
        return Vec::new();
    };
    let grounds = ["int", "bool", "string"].map(|g| TypeExpr::Prim(name(g), Vec::new()));
    let mut rows: Vec<Vec<TypeExpr>> = vec![Vec::new()];
    for _ in &d.params {
        rows = rows
            .into_iter()
            .flat_map(|r| {
                grounds.iter().map(move |g| {
                    let mut r = r.clone();
                    r.push(g.clone());
                    r
                })
            })
            .collect();
    }
    rows.into_iter().map(|args| TypeExpr::App(d.name.clone(), args)).collect()
}

/// Checks every accepted declaration against its enumerated values:
/// - each value's head is in the declaration's shape;
/// - dispatch tests are pairwise disjoint and select exactly the source
///   constructor of every value;
/// - without unboxed constructors, distinct values have distinct reprs.
///
/// Returns one line per violation.
pub fn soundness_violations(env: &Decls, reports: &[CheckReport], depth: usize) -> Result<Vec<String>, OracleError> {
    let mut out = Vec::new();
    for r in reports {
        let Verdict::Accepted { shape, .. } = &r.verdict else {
            continue;
        };
        let d = env.get(&r.decl).expect("reported declaration");
        let plans = match_plans(env, reports, &r.decl).expect("accepted declaration");
        for (i, a) in plans.iter().enumerate() {
            for b in &plans[i + 1..] {
                if a.test.disjoint_union(&b.test).is_err() {
                    out.push(format!("{}: tests of {} and {} overlap", r.decl, a.ctor, b.ctor));
                }
            }
        }
        let boxed_only = match &d.body {
            DeclBody::Variant(cs) => cs.iter().all(|k| !k.unboxed),
            _ => false,
        };
        for ty in ground_instances(env, &r.decl) {
            let values = enumerate_values(&ty, env, depth)?;
            let mut reprs: HashMap<Repr, &Value> = HashMap::new();
            for v in &values {
                let rep = repr_value(v, &ty, env)?;
                let h = rep.head();
                if !shape.contains(h) {
                    out.push(format!("{ty}: head {h} of {v} is outside {shape}"));
                }
                // Values of an abbreviation carry the constructors of another type.
                if let Some(c) = v.ctor().filter(|c| d.ctor(c).is_some()) {
                    let selected: HashSet<&Name> = plans.iter().filter(|p| p.matches(h)).map(|p| &p.ctor).collect();
                    if !selected.contains(c) || selected.len() != 1 {
                        out.push(format!("{ty}: {v} with head {h} is dispatched to {selected:?}"));
                    }
                }
                if boxed_only {
                    if let Some(other) = reprs.insert(rep, v) {
                        if other != v {
                            out.push(format!("{ty}: {other} and {v} share a representation"));
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}
