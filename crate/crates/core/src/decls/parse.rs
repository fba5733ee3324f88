//! Reader for `.decl` files:
//!
//! ```text
//! type zarith = Small of int [@unboxed] | Big of gmp [@unboxed]
//! and gmp [@shape (imm: {}; block: {255})]
//! type 'a id = Id of 'a [@unboxed]
//! type rope = Leaf of string [@unboxed] | Branch of { llen: int; l: rope; r: rope }
//! ```
//!
//! Every declaration in a file may refer to every other one. `#` starts a
//! line comment and `(* .. *)` comments nest.

use std::collections::HashSet;

use super::{Ctor, Decl, DeclBody, DeclError, Decls, TypeExpr};
use crate::calculus::{name, Name, Pos};
use crate::shapes::{parse_shape, HeadShape, PrimTable};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    /// Lowercase identifier or qualified type name such as `Gmp.t`.
    Lower(String),
    Upper(String),
    TyVar(String),
    Sym(&'static str),
    Attr { double: bool, name: String, payload: String },
    Eof,
}

const SYMBOLS: [&str; 11] = ["->", "=", "|", "*", "(", ")", ",", "{", "}", ":", ";"];

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, DeclError> {
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let mut toks = Vec::new();
    // Advances over `n` characters, keeping line and column in sync.
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    let is_ident = |c: char| c.is_ascii_alphanumeric() || c == '_' || c == '\'';
    while i < chars.len() {
        let pos = Pos { line, col };
        let c = chars[i];
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
        } else if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1);
            }
        } else if rest.starts_with("(*") {
            let mut depth = 0;
            loop {
                if i + 1 >= chars.len() {
                    return Err(DeclError::Syntax {
                        pos,
                        msg: "unterminated comment".into(),
                    });
                }
                match (chars[i], chars[i + 1]) {
                    ('(', '*') => {
                        depth += 1;
                        advance(&mut i, &mut line, &mut col, 2);
                    }
                    ('*', ')') => {
                        depth -= 1;
                        advance(&mut i, &mut line, &mut col, 2);
                        if depth == 0 {
                            break;
                        }
                    }
                    _ => advance(&mut i, &mut line, &mut col, 1),
                }
            }
        } else if rest.starts_with("[@") {
            let double = rest.starts_with("[@@");
            let start = i + if double { 3 } else { 2 };
            let mut depth = 1;
            let mut j = start;
            while j < chars.len() {
                match chars[j] {
                    '[' => depth += 1,
                    ']' => {
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                    }
                    _ => {}
                }
                j += 1;
            }
            if j >= chars.len() {
                return Err(DeclError::Syntax {
                    pos,
                    msg: "unterminated attribute".into(),
                });
            }
            let inner: String = chars[start..j].iter().collect();
            let inner = inner.trim();
            let split = inner.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(inner.len());
            toks.push((
                Tok::Attr {
                    double,
                    name: inner[..split].to_string(),
                    payload: inner[split..].trim().to_string(),
                },
                pos,
            ));
            let n = j + 1 - i;
            advance(&mut i, &mut line, &mut col, n);
        } else if let Some(s) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            toks.push((Tok::Sym(s), pos));
            advance(&mut i, &mut line, &mut col, s.len());
        } else if c == '\'' {
            let mut j = i + 1;
            while j < chars.len() && is_ident(chars[j]) {
                j += 1;
            }
            if j == i + 1 {
                return Err(DeclError::Syntax {
                    pos,
                    msg: "expected a type variable name after `'`".into(),
                });
            }
            toks.push((Tok::TyVar(chars[i..j].iter().collect()), pos));
            let n = j - i;
            advance(&mut i, &mut line, &mut col, n);
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && is_ident(chars[j]) {
                j += 1;
            }
            let upper = c.is_ascii_uppercase();
            // `Module.t` names a type.
            let qualified = upper
                && j + 1 < chars.len()
                && chars[j] == '.'
                && (chars[j + 1].is_ascii_lowercase() || chars[j + 1] == '_');
            if qualified {
                j += 1;
                while j < chars.len() && is_ident(chars[j]) {
                    j += 1;
                }
            }
            let word: String = chars[i..j].iter().collect();
            toks.push((
                if upper && !qualified {
                    Tok::Upper(word)
                } else {
                    Tok::Lower(word)
                },
                pos,
            ));
            let n = j - i;
            advance(&mut i, &mut line, &mut col, n);
        } else {
            return Err(DeclError::Syntax {
                pos,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    toks.push((Tok::Eof, Pos { line, col }));
    Ok(toks)
}

const KEYWORDS: [&str; 3] = ["type", "and", "of"];

/// Type expression before name resolution.
#[derive(Clone, Debug)]
enum RawTy {
    Var(String, Pos),
    App(String, Vec<RawTy>, Pos),
}

struct RawCtor {
    name: String,
    args: Vec<RawTy>,
    unboxed: bool,
    pos: Pos,
}

enum RawBody {
    Variant(Vec<RawCtor>),
    Abbrev(RawTy),
    Abstract(Option<HeadShape>),
}

struct RawDecl {
    name: String,
    params: Vec<String>,
    body: RawBody,
    pos: Pos,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, DeclError> {
        Err(DeclError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Lower(w) if w == kw)
    }

    fn expect_sym(&mut self, s: &str) -> Result<Pos, DeclError> {
        if self.is_sym(s) {
            Ok(self.bump().1)
        } else {
            self.err(format!("expected `{s}`, found {}", describe(self.peek())))
        }
    }

    fn type_name(&mut self) -> Result<(String, Pos), DeclError> {
        match self.peek().clone() {
            Tok::Lower(w) if !KEYWORDS.contains(&w.as_str()) => {
                let (_, pos) = self.bump();
                Ok((w, pos))
            }
            other => self.err(format!("expected a type name, found {}", describe(&other))),
        }
    }

    fn starts_type_name(&self) -> bool {
        matches!(self.peek(), Tok::Lower(w) if !KEYWORDS.contains(&w.as_str()))
    }

    fn file(&mut self) -> Result<Vec<RawDecl>, DeclError> {
        let mut decls = Vec::new();
        while *self.peek() != Tok::Eof {
            if !self.is_kw("type") {
                return self.err(format!("expected `type`, found {}", describe(self.peek())));
            }
            self.bump();
            decls.push(self.decl()?);
            while self.is_kw("and") {
                self.bump();
                decls.push(self.decl()?);
            }
        }
        Ok(decls)
    }

    fn params(&mut self) -> Result<Vec<String>, DeclError> {
        let mut params = Vec::new();
        if let Tok::TyVar(a) = self.peek().clone() {
            self.bump();
            params.push(a);
        } else if self.is_sym("(") && matches!(self.peek_at(1), Tok::TyVar(_)) {
            self.bump();
            loop {
                match self.bump() {
                    (Tok::TyVar(a), pos) => {
                        if params.contains(&a) {
                            return Err(DeclError::Syntax {
                                pos,
                                msg: format!("type parameter `{a}` is declared twice"),
                            });
                        }
                        params.push(a)
                    }
                    (other, pos) => {
                        return Err(DeclError::Syntax {
                            pos,
                            msg: format!("expected a type parameter, found {}", describe(&other)),
                        })
                    }
                }
                if self.is_sym(",") {
                    self.bump();
                } else {
                    break;
                }
            }
            self.expect_sym(")")?;
        }
        Ok(params)
    }

    /// Attributes on a declaration: returns the `[@shape]` payload, if any.
    fn decl_attrs(&mut self, shape: &mut Option<HeadShape>) -> Result<(), DeclError> {
        while let Tok::Attr { name, payload, .. } = self.peek().clone() {
            let pos = self.pos();
            if name != "shape" {
                return self.err(format!("unsupported attribute `{name}` here"));
            }
            if shape.is_some() {
                return self.err("more than one [@shape] attribute");
            }
            *shape = Some(parse_shape(&payload).map_err(|source| DeclError::Shape { source, pos })?);
            self.bump();
        }
        Ok(())
    }

    fn decl(&mut self) -> Result<RawDecl, DeclError> {
        let params = self.params()?;
        let (name, pos) = self.type_name()?;
        let mut shape = None;
        self.decl_attrs(&mut shape)?;
        let mut body = if self.is_sym("=") {
            self.bump();
            if self.is_sym("|") || matches!(self.peek(), Tok::Upper(_)) {
                RawBody::Variant(self.ctors()?)
            } else {
                RawBody::Abbrev(self.ty()?)
            }
        } else {
            RawBody::Abstract(None)
        };
        // Trailing `[@@...]` attributes.
        while let Tok::Attr { double: true, name: attr, .. } = self.peek().clone() {
            match (attr.as_str(), &mut body) {
                ("unboxed", RawBody::Variant(cs)) if cs.len() == 1 => {
                    cs[0].unboxed = true;
                    self.bump();
                }
                ("unboxed", _) => return self.err("[@@unboxed] needs a single-constructor type"),
                ("shape", _) => self.decl_attrs(&mut shape)?,
                _ => return self.err(format!("unsupported attribute `{attr}`")),
            }
        }
        match (&mut body, shape) {
            (RawBody::Abstract(s), shape) => *s = shape,
            (_, Some(_)) => {
                return Err(DeclError::Syntax {
                    pos,
                    msg: format!("[@shape] is only allowed on abstract types, not on `{name}`"),
                })
            }
            _ => {}
        }
        Ok(RawDecl {
            name,
            params,
            body,
            pos,
        })
    }

    fn ctors(&mut self) -> Result<Vec<RawCtor>, DeclError> {
        let mut ctors = Vec::new();
        if self.is_sym("|") {
            self.bump();
            if !matches!(self.peek(), Tok::Upper(_)) {
                return Ok(ctors);
            }
        }
        loop {
            ctors.push(self.ctor()?);
            if self.is_sym("|") {
                self.bump();
            } else {
                break;
            }
        }
        Ok(ctors)
    }

    fn ctor(&mut self) -> Result<RawCtor, DeclError> {
        let (name, pos) = match self.bump() {
            (Tok::Upper(c), pos) => (c, pos),
            (other, pos) => {
                return Err(DeclError::Syntax {
                    pos,
                    msg: format!("expected a constructor name, found {}", describe(&other)),
                })
            }
        };
        let mut args = Vec::new();
        if self.is_kw("of") {
            self.bump();
            if self.is_sym("{") {
                args = self.record()?;
            } else {
                args.push(self.app()?);
                while self.is_sym("*") {
                    self.bump();
                    args.push(self.app()?);
                }
                if self.is_sym("->") {
                    let apos = self.bump().1;
                    let dom = if args.len() == 1 {
                        args.pop().expect("one argument")
                    } else {
                        RawTy::App("tuple".into(), std::mem::take(&mut args), apos)
                    };
                    args = vec![RawTy::App("fun".into(), vec![dom, self.ty()?], apos)];
                }
            }
        }
        let mut unboxed = false;
        while let Tok::Attr { double: false, name: attr, .. } = self.peek().clone() {
            if attr != "unboxed" {
                return self.err(format!("unsupported constructor attribute `{attr}`"));
            }
            unboxed = true;
            self.bump();
        }
        Ok(RawCtor {
            name,
            args,
            unboxed,
            pos,
        })
    }

    /// `{ f: τ; g: τ }`, kept as positional fields.
    fn record(&mut self) -> Result<Vec<RawTy>, DeclError> {
        self.expect_sym("{")?;
        let mut fields = Vec::new();
        let mut names = HashSet::new();
        while !self.is_sym("}") {
            let (f, pos) = self.type_name()?;
            if !names.insert(f.clone()) {
                return Err(DeclError::Syntax {
                    pos,
                    msg: format!("field `{f}` is declared twice"),
                });
            }
            self.expect_sym(":")?;
            fields.push(self.ty()?);
            if self.is_sym(";") {
                self.bump();
            } else {
                break;
            }
        }
        self.expect_sym("}")?;
        if fields.is_empty() {
            return self.err("empty record");
        }
        Ok(fields)
    }

    fn ty(&mut self) -> Result<RawTy, DeclError> {
        let pos = self.pos();
        let mut parts = vec![self.app()?];
        while self.is_sym("*") {
            self.bump();
            parts.push(self.app()?);
        }
        let lhs = if parts.len() == 1 {
            parts.pop().expect("one part")
        } else {
            RawTy::App("tuple".into(), parts, pos)
        };
        if self.is_sym("->") {
            let apos = self.bump().1;
            return Ok(RawTy::App("fun".into(), vec![lhs, self.ty()?], apos));
        }
        Ok(lhs)
    }

    fn app(&mut self) -> Result<RawTy, DeclError> {
        let pos = self.pos();
        let mut args: Vec<RawTy> = match self.peek().clone() {
            Tok::TyVar(a) => {
                self.bump();
                vec![RawTy::Var(a, pos)]
            }
            Tok::Sym("(") => {
                self.bump();
                let mut items = vec![self.ty()?];
                while self.is_sym(",") {
                    self.bump();
                    items.push(self.ty()?);
                }
                self.expect_sym(")")?;
                if items.len() > 1 && !self.starts_type_name() {
                    return self.err("a parenthesized argument list must be followed by a type name");
                }
                items
            }
            _ => {
                let (t, pos) = self.type_name()?;
                vec![RawTy::App(t, Vec::new(), pos)]
            }
        };
        while self.starts_type_name() {
            let (t, tpos) = self.type_name()?;
            args = vec![RawTy::App(t, args, tpos)];
        }
        match args.len() {
            1 => Ok(args.pop().expect("one")),
            _ => unreachable!("checked above"),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Lower(w) | Tok::Upper(w) | Tok::TyVar(w) => format!("`{w}`"),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Attr { name, .. } => format!("attribute `{name}`"),
        Tok::Eof => "end of input".into(),
    }
}

struct Resolver<'a> {
    arities: std::collections::HashMap<String, usize>,
    prims: &'a PrimTable,
}

impl Resolver<'_> {
    fn resolve(&self, t: &RawTy, params: &[String]) -> Result<TypeExpr, DeclError> {
        match t {
            RawTy::Var(a, pos) => {
                if params.contains(a) {
                    Ok(TypeExpr::Var(name(a)))
                } else {
                    Err(DeclError::UnboundTypeVariable {
                        name: a.clone(),
                        pos: *pos,
                    })
                }
            }
            RawTy::App(n, args, pos) => {
                let args = args
                    .iter()
                    .map(|u| self.resolve(u, params))
                    .collect::<Result<Vec<_>, _>>()?;
                if let Some(&expected) = self.arities.get(n) {
                    if expected != args.len() {
                        return Err(DeclError::ArityMismatch {
                            name: n.clone(),
                            expected,
                            found: args.len(),
                            pos: *pos,
                        });
                    }
                    Ok(TypeExpr::App(name(n), args))
                } else if self.prims.contains(n) {
                    Ok(TypeExpr::Prim(name(n), args))
                } else {
                    Err(DeclError::UnboundTypeName {
                        name: n.clone(),
                        pos: *pos,
                    })
                }
            }
        }
    }
}

/// Parses and resolves a `.decl` file against the built-in primitive table.
pub fn parse_decls(text: &str) -> Result<Decls, DeclError> {
    parse_decls_with(text, &PrimTable::default())
}

/// Parses and resolves a `.decl` file. Declared names shadow primitives.
pub fn parse_decls_with(text: &str, prims: &PrimTable) -> Result<Decls, DeclError> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let raw = p.file()?;
    let mut arities = std::collections::HashMap::new();
    for d in &raw {
        if arities.insert(d.name.clone(), d.params.len()).is_some() {
            return Err(DeclError::DuplicateTypeName {
                name: d.name.clone(),
                pos: d.pos,
            });
        }
    }
    let r = Resolver { arities, prims };
    let mut decls = Vec::new();
    for d in raw {
        let body = match d.body {
            RawBody::Abstract(s) => DeclBody::Abstract(s),
            RawBody::Abbrev(t) => DeclBody::Abbrev(r.resolve(&t, &d.params)?),
            RawBody::Variant(cs) => {
                let mut seen = HashSet::new();
                let mut ctors = Vec::new();
                for c in cs {
                    if !seen.insert(c.name.clone()) {
                        return Err(DeclError::DuplicateCtor {
                            name: c.name,
                            pos: c.pos,
                        });
                    }
                    if c.unboxed && c.args.len() != 1 {
                        return Err(DeclError::UnboxedArity {
                            ctor: c.name,
                            pos: c.pos,
                        });
                    }
                    ctors.push(Ctor {
                        name: name(&c.name),
                        args: c
                            .args
                            .iter()
                            .map(|a| r.resolve(a, &d.params))
                            .collect::<Result<_, _>>()?,
                        unboxed: c.unboxed,
                        pos: c.pos,
                    });
                }
                DeclBody::Variant(ctors)
            }
        };
        decls.push(Decl {
            name: name(&d.name),
            params: d.params.iter().map(|a| name(a)).collect::<Vec<Name>>(),
            body,
            pos: d.pos,
        });
    }
    Ok(Decls::new(decls, prims.clone()))
}
