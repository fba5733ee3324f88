//! Reader for `.lam` programs:
//!
//! ```text
//! program ::= "let rec" def ("and" def)* "in" term  |  term
//! def     ::= name "(" params? ")" "=" term  |  name "=" term
//! term    ::= name "(" args ")" | name                (first-order)
//! term    ::= name | term "(" args ")"                (higher-order)
//! ```
//!
//! Identifiers match `[a-z_][a-zA-Z0-9_]*`; `#` starts a line comment.

use std::collections::HashMap;

use super::{name, CalcError, Def, Mode, Name, Pos, Program, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Eq,
    Eof,
}

struct Lexer {
    toks: Vec<(Tok, Pos)>,
}

fn lex(text: &str) -> Result<Lexer, CalcError> {
    let mut toks = Vec::new();
    for (lno, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let pos = Pos {
                line: lno + 1,
                col: i + 1,
            };
            match c {
                '#' => break,
                c if c.is_whitespace() => i += 1,
                '(' => {
                    toks.push((Tok::LParen, pos));
                    i += 1;
                }
                ')' => {
                    toks.push((Tok::RParen, pos));
                    i += 1;
                }
                ',' => {
                    toks.push((Tok::Comma, pos));
                    i += 1;
                }
                '=' => {
                    toks.push((Tok::Eq, pos));
                    i += 1;
                }
                c if c.is_ascii_lowercase() || c == '_' => {
                    let start = i;
                    while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                        i += 1;
                    }
                    toks.push((Tok::Ident(chars[start..i].iter().collect()), pos));
                }
                other => {
                    return Err(CalcError::Syntax {
                        pos,
                        msg: format!("unexpected character `{other}`"),
                    })
                }
            }
        }
    }
    let end = Pos {
        line: text.lines().count().max(1),
        col: text.lines().last().map_or(1, |l| l.len() + 1),
    };
    toks.push((Tok::Eof, end));
    Ok(Lexer { toks })
}

const KEYWORDS: [&str; 4] = ["let", "rec", "and", "in"];

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    mode: Mode,
}

/// Arity table gathered in a first pass, so calls can be checked against
/// definitions that appear later in the file.
type Arities = HashMap<String, usize>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
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

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, CalcError> {
        Err(CalcError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Pos, CalcError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            self.err(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self) -> Result<(String, Pos), CalcError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let (_, pos) = self.bump();
                Ok((s, pos))
            }
            other => self.err(format!("expected an identifier, found {}", describe(&other))),
        }
    }

    fn args(&mut self, params: &[Name], arities: &Arities) -> Result<Vec<Term>, CalcError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                args.push(self.term(params, arities)?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)` or `,`")?;
        Ok(args)
    }

    fn term(&mut self, params: &[Name], arities: &Arities) -> Result<Term, CalcError> {
        let (id, pos) = self.ident()?;
        let is_param = params.iter().any(|p| **p == *id);
        match self.mode {
            Mode::FirstOrder => {
                if is_param {
                    if *self.peek() == Tok::LParen {
                        return Err(CalcError::Syntax {
                            pos,
                            msg: format!("parameter `{id}` cannot be applied in first-order mode"),
                        });
                    }
                    return Ok(Term::Var(name(&id)));
                }
                let args = if *self.peek() == Tok::LParen {
                    self.args(params, arities)?
                } else {
                    Vec::new()
                };
                if let Some(&expected) = arities.get(&id) {
                    if expected != args.len() {
                        return Err(CalcError::ArityMismatch {
                            name: id,
                            expected,
                            found: args.len(),
                            pos: Some(pos),
                        });
                    }
                }
                Ok(Term::call(&id, args))
            }
            Mode::ClosedHigherOrder => {
                let mut t = if is_param {
                    Term::Var(name(&id))
                } else {
                    Term::Sym(name(&id))
                };
                while *self.peek() == Tok::LParen {
                    let args = self.args(params, arities)?;
                    t = Term::app(t, args);
                }
                Ok(t)
            }
        }
    }

    fn def(&mut self, arities: &Arities) -> Result<(Def, Pos), CalcError> {
        let (f, pos) = self.ident()?;
        let mut params: Vec<Name> = Vec::new();
        if *self.peek() == Tok::LParen {
            self.bump();
            if *self.peek() != Tok::RParen {
                loop {
                    let (x, xpos) = self.ident()?;
                    if params.iter().any(|p| **p == *x) {
                        return Err(CalcError::Syntax {
                            pos: xpos,
                            msg: format!("parameter `{x}` of `{f}` is declared twice"),
                        });
                    }
                    params.push(name(&x));
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen, "`)` or `,`")?;
        }
        self.expect(Tok::Eq, "`=`")?;
        let body = self.term(&params, arities)?;
        Ok((
            Def {
                name: name(&f),
                params,
                body,
            },
            pos,
        ))
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Eq => "`=`".into(),
        Tok::Eof => "end of input".into(),
    }
}

/// Pre-scan of `name(params) =` headers to learn arities.
fn scan_arities(toks: &[(Tok, Pos)]) -> Result<Arities, CalcError> {
    let mut arities = Arities::new();
    let mut i = 0;
    let is_header_start =
        |j: usize| j >= 1 && matches!(&toks[j - 1].0, Tok::Ident(k) if k == "rec" || k == "and");
    while i < toks.len() {
        if let Tok::Ident(f) = &toks[i].0 {
            if !KEYWORDS.contains(&f.as_str()) && is_header_start(i) {
                let mut n = 0;
                let mut j = i + 1;
                if matches!(toks.get(j), Some((Tok::LParen, _))) {
                    j += 1;
                    while let Some((t, _)) = toks.get(j) {
                        match t {
                            Tok::RParen => break,
                            Tok::Ident(_) => n += 1,
                            _ => {}
                        }
                        j += 1;
                    }
                }
                if arities.insert(f.clone(), n).is_some() {
                    return Err(CalcError::DuplicateDefinition {
                        name: f.clone(),
                        pos: Some(toks[i].1),
                    });
                }
            }
        }
        i += 1;
    }
    Ok(arities)
}

/// Parses a `.lam` program in the given mode.
pub fn parse_program(text: &str, mode: Mode) -> Result<Program, CalcError> {
    let lexer = lex(text)?;
    let arities = if mode == Mode::FirstOrder {
        scan_arities(&lexer.toks)?
    } else {
        Arities::new()
    };
    let mut p = Parser {
        toks: lexer.toks,
        at: 0,
        mode,
    };
    let mut defs = Vec::new();
    if p.is_kw("let") {
        p.bump();
        if !p.is_kw("rec") {
            return p.err("expected `rec` after `let`");
        }
        p.bump();
        loop {
            let (d, pos) = p.def(&arities)?;
            if defs.iter().any(|e: &Def| e.name == d.name) {
                return Err(CalcError::DuplicateDefinition {
                    name: d.name.to_string(),
                    pos: Some(pos),
                });
            }
            defs.push(d);
            if p.is_kw("and") {
                p.bump();
            } else {
                break;
            }
        }
        if !p.is_kw("in") {
            return p.err(format!("expected `and` or `in`, found {}", describe(p.peek())));
        }
        p.bump();
    }
    let root = p.term(&[], &arities)?;
    if *p.peek() != Tok::Eof {
        return p.err(format!("unexpected {} after the root term", describe(p.peek())));
    }
    Program::new(defs, root, mode)
}
