//! Encoding of declarations as a first-order recursive program, and reading
//! sum normal forms back from its normal forms.
//!
//! Each declaration `('a..) t` becomes a definition `t('a..)`. Cases are
//! joined with the binary free name `Sum`, the empty sum is `Empty`, a boxed
//! constructor `C` of `t` becomes the constant `Box(t.C)`, and an abstract
//! type is the constant `Opaque(t)`. These names cannot clash with type
//! names. Arguments that the unfolding never looks at (those of boxed
//! constructors, abstract types and non-lazylike primitives) are dropped, so
//! the calculus does not reduce under them.

use thiserror::Error;

use super::{Component, DeclBody, Decls, SumNf, TypeExpr};
use crate::calculus::{Def, Mode, Program, Term};

pub const SUM: &str = "Sum";
pub const EMPTY: &str = "Empty";

fn box_name(decl: &str, ctor: &str) -> String {
    format!("Box({decl}.{ctor})")
}

fn opaque_name(decl: &str) -> String {
    format!("Opaque({decl})")
}

fn sum_of(mut cases: Vec<Term>) -> Term {
    match cases.len() {
        0 => Term::call(EMPTY, Vec::new()),
        1 => cases.pop().expect("one case"),
        _ => {
            let first = cases.remove(0);
            Term::call(SUM, vec![first, sum_of(cases)])
        }
    }
}

fn term_of(t: &TypeExpr, env: &Decls) -> Term {
    match t {
        TypeExpr::Var(a) => Term::Var(a.clone()),
        TypeExpr::App(n, args) => Term::call(n, args.iter().map(|u| term_of(u, env)).collect()),
        TypeExpr::Prim(n, args) => {
            let lazylike = env.prims().get(n).is_some_and(|e| e.lazylike);
            let args = if lazylike {
                args.iter().map(|u| term_of(u, env)).collect()
            } else {
                Vec::new()
            };
            Term::call(n, args)
        }
    }
}

/// The whole file as a first-order program whose root is the first
/// declaration applied to its own parameters (the empty sum if there is
/// none). Use [`Program::with_root`] to normalize another type.
pub fn translate_to_program(env: &Decls) -> Program {
    let defs: Vec<Def> = env
        .decls()
        .iter()
        .map(|d| {
            let body = match &d.body {
                DeclBody::Variant(ctors) => sum_of(
                    ctors
                        .iter()
                        .map(|k| {
                            if k.unboxed {
                                term_of(&k.args[0], env)
                            } else {
                                Term::call(&box_name(&d.name, &k.name), Vec::new())
                            }
                        })
                        .collect(),
                ),
                DeclBody::Abbrev(t) => term_of(t, env),
                DeclBody::Abstract(_) => Term::call(&opaque_name(&d.name), Vec::new()),
            };
            Def {
                name: d.name.clone(),
                params: d.params.clone(),
                body,
            }
        })
        .collect();
    let root = match env.decls().first() {
        Some(d) => term_of(&d.generic(), env),
        None => sum_of(Vec::new()),
    };
    Program::new(defs, root, Mode::FirstOrder).expect("translation is well formed")
}

/// The type `t` as a root term of the translated program.
pub fn type_term(t: &TypeExpr, env: &Decls) -> Term {
    term_of(t, env)
}

/// What survives of a component in the encoding.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SnfKey {
    Boxed(String, String),
    Var(String),
    Prim(String, Vec<Vec<SnfKey>>),
    Abstract(String),
}

pub fn component_keys(s: &SumNf) -> Vec<SnfKey> {
    s.0.iter()
        .map(|c| match c {
            Component::Boxed { decl, ctor, .. } => SnfKey::Boxed(decl.to_string(), ctor.to_string()),
            Component::Var(a) => SnfKey::Var(a.to_string()),
            Component::Prim { name, inner, .. } => {
                SnfKey::Prim(name.to_string(), inner.iter().map(component_keys).collect())
            }
            Component::Abstract { decl, .. } => SnfKey::Abstract(decl.to_string()),
        })
        .collect()
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("term `{0}` is not the encoding of a sum normal form")]
pub struct ReadBackError(pub String);

/// Reads the components of a normal form of the encoding, left to right.
pub fn read_back(t: &Term, env: &Decls) -> Result<Vec<SnfKey>, ReadBackError> {
    let mut out = Vec::new();
    read_into(t, env, &mut out)?;
    Ok(out)
}

fn read_into(t: &Term, env: &Decls, out: &mut Vec<SnfKey>) -> Result<(), ReadBackError> {
    let bad = || ReadBackError(t.render(Mode::FirstOrder));
    let (head, args) = match t {
        Term::Var(a) => {
            out.push(SnfKey::Var(a.to_string()));
            return Ok(());
        }
        Term::App(a) => match &a.head {
            Term::Sym(f) => (f.clone(), &a.args),
            _ => return Err(bad()),
        },
        Term::Sym(_) => return Err(bad()),
    };
    if &*head == SUM && args.len() == 2 {
        read_into(&args[0], env, out)?;
        return read_into(&args[1], env, out);
    }
    if &*head == EMPTY && args.is_empty() {
        return Ok(());
    }
    if let Some(inner) = head.strip_prefix("Box(").and_then(|s| s.strip_suffix(')')) {
        let (d, c) = inner.rsplit_once('.').ok_or_else(bad)?;
        out.push(SnfKey::Boxed(d.to_string(), c.to_string()));
        return Ok(());
    }
    if let Some(d) = head.strip_prefix("Opaque(").and_then(|s| s.strip_suffix(')')) {
        out.push(SnfKey::Abstract(d.to_string()));
        return Ok(());
    }
    if env.prims().contains(&head) && env.get(&head).is_none() {
        let inner = args
            .iter()
            .map(|u| read_back(u, env))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(SnfKey::Prim(head.to_string(), inner));
        return Ok(());
    }
    Err(bad())
}
