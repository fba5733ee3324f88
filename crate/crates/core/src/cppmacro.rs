//! The core of cpp function-like macro expansion, following Prosser's
//! `expand`/`subst`/`hsadd` formulation with hide sets, and a harness that
//! compares it with the trace-annotated calculus on first-order macros.
//!
//! Only identifiers, parentheses, commas and opaque tokens exist; there is no
//! stringization, pasting, object-like macro or conditional.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::calculus::{self, name, Def, Mode, Name, Outcome, Program, Strategy, Term};

pub type HideSet = BTreeSet<Name>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TokKind {
    Ident(Name),
    LParen,
    RParen,
    Comma,
    Other(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Token {
    pub kind: TokKind,
    /// Always empty for commas and opaque tokens.
    pub hs: HideSet,
}

impl Token {
    pub fn new(kind: TokKind) -> Token {
        Token {
            kind,
            hs: HideSet::new(),
        }
    }

    pub fn ident(n: &str) -> Token {
        Token::new(TokKind::Ident(name(n)))
    }

    pub fn text(&self) -> &str {
        match &self.kind {
            TokKind::Ident(n) => n,
            TokKind::LParen => "(",
            TokKind::RParen => ")",
            TokKind::Comma => ",",
            TokKind::Other(s) => s,
        }
    }

    fn ident_name(&self) -> Option<&Name> {
        match &self.kind {
            TokKind::Ident(n) => Some(n),
            _ => None,
        }
    }

    /// `tok^{a,b}`, or just `tok` with an empty hide set.
    pub fn render_with_hideset(&self) -> String {
        if self.hs.is_empty() {
            return self.text().to_string();
        }
        let names: Vec<&str> = self.hs.iter().map(|n| &**n).collect();
        format!("{}^{{{}}}", self.text(), names.join(","))
    }
}

pub type TokenSeq = Vec<Token>;

/// Single-space separated rendering.
pub fn render(ts: &[Token], show_hidesets: bool) -> String {
    let parts: Vec<String> = ts
        .iter()
        .map(|t| {
            if show_hidesets {
                t.render_with_hideset()
            } else {
                t.text().to_string()
            }
        })
        .collect();
    parts.join(" ")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MacroDef {
    pub name: Name,
    pub formals: Vec<Name>,
    pub body: TokenSeq,
}

#[derive(Clone, Debug, Default)]
pub struct Macros {
    defs: Vec<MacroDef>,
    index: HashMap<Name, usize>,
}

impl Macros {
    pub fn new(defs: Vec<MacroDef>) -> Result<Macros, CppError> {
        let mut index = HashMap::new();
        for (i, d) in defs.iter().enumerate() {
            if index.insert(d.name.clone(), i).is_some() {
                return Err(CppError::Syntax {
                    line: 0,
                    msg: format!("macro `{}` is defined twice", d.name),
                });
            }
            for (j, f) in d.formals.iter().enumerate() {
                if d.formals[..j].contains(f) {
                    return Err(CppError::Syntax {
                        line: 0,
                        msg: format!("parameter `{f}` of `{}` is declared twice", d.name),
                    });
                }
            }
        }
        Ok(Macros { defs, index })
    }

    pub fn get(&self, n: &str) -> Option<&MacroDef> {
        self.index.get(n).map(|&i| &self.defs[i])
    }

    pub fn defs(&self) -> &[MacroDef] {
        &self.defs
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CppError {
    #[error("line {line}: syntax error: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("malformed call of `{name}`: {msg}")]
    MalformedCall { name: String, msg: String },
    #[error("expansion exceeded {0} macro invocations")]
    StepLimit(u64),
    #[error("expansion produced more than {0} tokens")]
    TokenLimit(u64),
    #[error("not first-order: {0}")]
    NotFirstOrder(String),
    #[error("not a single term: `{0}`")]
    NotATerm(String),
}

/// Splits a token sequence without hide sets.
pub fn tokenize(text: &str) -> Result<TokenSeq, CppError> {
    tokenize_line(text, 0)
}

fn tokenize_line(text: &str, line: usize) -> Result<TokenSeq, CppError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '(' => {
                out.push(Token::new(TokKind::LParen));
                i += 1;
            }
            ')' => {
                out.push(Token::new(TokKind::RParen));
                i += 1;
            }
            ',' => {
                out.push(Token::new(TokKind::Comma));
                i += 1;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token::ident(&chars[start..i].iter().collect::<String>()));
            }
            _ => {
                let start = i;
                while i < chars.len()
                    && !chars[i].is_whitespace()
                    && !matches!(chars[i], '(' | ')' | ',')
                    && !(chars[i].is_ascii_alphabetic() || chars[i] == '_')
                {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                if s.contains('#') {
                    return Err(CppError::Syntax {
                        line,
                        msg: format!("unsupported token `{s}`"),
                    });
                }
                out.push(Token::new(TokKind::Other(s)));
            }
        }
    }
    Ok(out)
}

/// A `.cpp` input: `#define NAME(params) body` lines, then the text to
/// expand. `//` starts a comment.
pub fn parse_cpp(text: &str) -> Result<(Macros, TokenSeq), CppError> {
    let mut defs = Vec::new();
    let mut input = Vec::new();
    for (lno, raw) in text.lines().enumerate() {
        let line = raw.split("//").next().unwrap_or("").trim();
        let lno = lno + 1;
        if line.is_empty() {
            continue;
        }
        let Some(rest) = line.strip_prefix("#define") else {
            if line.starts_with('#') {
                return Err(CppError::Syntax {
                    line: lno,
                    msg: "only #define directives are supported".into(),
                });
            }
            input.extend(tokenize_line(line, lno)?);
            continue;
        };
        let bad = |msg: &str| CppError::Syntax {
            line: lno,
            msg: msg.into(),
        };
        let rest = rest.trim_start();
        let name_len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        let (mname, after) = rest.split_at(name_len);
        if mname.is_empty() || mname.starts_with(|c: char| c.is_ascii_digit()) {
            return Err(bad("expected a macro name"));
        }
        let after = after
            .strip_prefix('(')
            .ok_or_else(|| bad("only function-like macros are supported"))?;
        let close = after.find(')').ok_or_else(|| bad("unclosed parameter list"))?;
        let params = after[..close].trim();
        let formals: Vec<Name> = if params.is_empty() {
            Vec::new()
        } else {
            params
                .split(',')
                .map(|p| {
                    let p = p.trim();
                    if p.is_empty() || !p.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                        Err(bad(&format!("bad parameter `{p}`")))
                    } else {
                        Ok(name(p))
                    }
                })
                .collect::<Result<_, _>>()?
        };
        defs.push(MacroDef {
            name: name(mname),
            formals,
            body: tokenize_line(&after[close + 1..], lno)?,
        });
    }
    let macros = Macros::new(defs).map_err(|e| match e {
        CppError::Syntax { msg, .. } => CppError::Syntax { line: 0, msg },
        other => other,
    })?;
    Ok((macros, input))
}

/// Adds `hs` to the hide set of every identifier and parenthesis.
pub fn hsadd(hs: &HideSet, ts: TokenSeq) -> TokenSeq {
    ts.into_iter()
        .map(|mut t| {
            if matches!(t.kind, TokKind::Ident(_) | TokKind::LParen | TokKind::RParen) {
                t.hs.extend(hs.iter().cloned());
            }
            t
        })
        .collect()
}

/// Expansion with a bound on the number of macro invocations.
pub struct Expander<'a> {
    macros: &'a Macros,
    limit: u64,
    token_limit: u64,
    pub invocations: u64,
    /// Tokens produced by substitution so far.
    pub tokens: u64,
}

pub const DEFAULT_LIMIT: u64 = 1_000_000;
pub const DEFAULT_TOKEN_LIMIT: u64 = 20_000_000;

impl<'a> Expander<'a> {
    pub fn new(macros: &'a Macros, limit: u64) -> Expander<'a> {
        Expander {
            macros,
            limit,
            token_limit: DEFAULT_TOKEN_LIMIT,
            invocations: 0,
            tokens: 0,
        }
    }

    /// Expansion copies arguments, so output can grow exponentially even
    /// with few invocations.
    pub fn with_token_limit(self, token_limit: u64) -> Expander<'a> {
        Expander { token_limit, ..self }
    }

    /// Prosser's `expand`, with the tail recursion turned into a loop over a
    /// work queue: the result of a call is pushed back in front of the
    /// remaining input and rescanned.
    pub fn expand(&mut self, ts: TokenSeq) -> Result<TokenSeq, CppError> {
        let mut queue: VecDeque<Token> = ts.into();
        let mut out = Vec::new();
        while let Some(t) = queue.pop_front() {
            let Some(n) = t.ident_name() else {
                out.push(t);
                continue;
            };
            let callable = !t.hs.contains(n)
                && self.macros.get(n).is_some()
                && matches!(queue.front(), Some(Token { kind: TokKind::LParen, .. }));
            if !callable {
                out.push(t);
                continue;
            }
            let def = self.macros.get(n).expect("macro");
            let (actuals, close) = take_actuals(&mut queue, def)?;
            self.invocations += 1;
            if self.invocations > self.limit {
                return Err(CppError::StepLimit(self.limit));
            }
            let mut hs: HideSet = t.hs.intersection(&close.hs).cloned().collect();
            hs.insert(def.name.clone());
            let body = self.subst(&def.body, &def.formals, actuals, &hs)?;
            for tok in body.into_iter().rev() {
                queue.push_front(tok);
            }
        }
        Ok(out)
    }

    /// Prosser's `subst`: formals are replaced by their expanded actuals and
    /// the whole output then gets the call's hide set.
    pub fn subst(
        &mut self,
        body: &[Token],
        formals: &[Name],
        actuals: Vec<TokenSeq>,
        hs: &HideSet,
    ) -> Result<TokenSeq, CppError> {
        let mut expanded: Vec<Option<TokenSeq>> = vec![None; actuals.len()];
        let mut os = Vec::new();
        for t in body {
            let formal = t.ident_name().and_then(|n| formals.iter().position(|f| f == n));
            match formal {
                Some(i) => {
                    if expanded[i].is_none() {
                        expanded[i] = Some(self.expand(actuals[i].clone())?);
                    }
                    os.extend(expanded[i].clone().expect("expanded"));
                }
                None => os.push(t.clone()),
            }
        }
        self.tokens += os.len() as u64;
        if self.tokens > self.token_limit {
            return Err(CppError::TokenLimit(self.token_limit));
        }
        Ok(hsadd(hs, os))
    }
}

/// Consumes `( actuals )` from the front of the queue, splitting at
/// top-level commas. Returns the actuals and the closing parenthesis.
fn take_actuals(queue: &mut VecDeque<Token>, def: &MacroDef) -> Result<(Vec<TokenSeq>, Token), CppError> {
    let open = queue.pop_front().expect("checked `(`");
    debug_assert_eq!(open.kind, TokKind::LParen);
    let mut actuals = vec![Vec::new()];
    let mut depth = 0usize;
    loop {
        let Some(t) = queue.pop_front() else {
            return Err(CppError::MalformedCall {
                name: def.name.to_string(),
                msg: "unbalanced parentheses".into(),
            });
        };
        match t.kind {
            TokKind::RParen if depth == 0 => {
                if def.formals.is_empty() && actuals.len() == 1 && actuals[0].is_empty() {
                    actuals.clear();
                }
                if actuals.len() != def.formals.len() {
                    return Err(CppError::MalformedCall {
                        name: def.name.to_string(),
                        msg: format!("expects {} argument(s), found {}", def.formals.len(), actuals.len()),
                    });
                }
                return Ok((actuals, t));
            }
            TokKind::Comma if depth == 0 => actuals.push(Vec::new()),
            TokKind::LParen => {
                depth += 1;
                actuals.last_mut().expect("nonempty").push(t);
            }
            TokKind::RParen => {
                depth -= 1;
                actuals.last_mut().expect("nonempty").push(t);
            }
            _ => actuals.last_mut().expect("nonempty").push(t),
        }
    }
}

pub fn expand(ts: TokenSeq, macros: &Macros) -> Result<TokenSeq, CppError> {
    Expander::new(macros, DEFAULT_LIMIT).expand(ts)
}

// ---------------------------------------------------------------------------
// First-order agreement

/// Parses `ident ( args )`, `ident` or an opaque token as a term. Names in
/// `formals` become variables.
fn term_of(ts: &[Token], formals: &[Name]) -> Result<Term, CppError> {
    let mut at = 0;
    let t = parse_term(ts, &mut at, formals)?;
    if at != ts.len() {
        return Err(CppError::NotATerm(render(ts, false)));
    }
    Ok(t)
}

fn parse_term(ts: &[Token], at: &mut usize, formals: &[Name]) -> Result<Term, CppError> {
    let bad = || CppError::NotATerm(render(ts, false));
    let tok = ts.get(*at).ok_or_else(bad)?;
    *at += 1;
    let head = match &tok.kind {
        TokKind::Ident(n) if formals.contains(n) => return Ok(Term::Var(n.clone())),
        TokKind::Ident(n) => n.clone(),
        TokKind::Other(s) => return Ok(Term::call(s, Vec::new())),
        _ => return Err(bad()),
    };
    let mut args = Vec::new();
    if matches!(ts.get(*at), Some(Token { kind: TokKind::LParen, .. })) {
        *at += 1;
        if !matches!(ts.get(*at), Some(Token { kind: TokKind::RParen, .. })) {
            loop {
                args.push(parse_term(ts, at, formals)?);
                match ts.get(*at).map(|t| &t.kind) {
                    Some(TokKind::Comma) => *at += 1,
                    Some(TokKind::RParen) => break,
                    _ => return Err(bad()),
                }
            }
        }
        *at += 1;
    }
    Ok(Term::call(&head, args))
}

/// Checks that every macro name is immediately applied to the right number
/// of arguments and that no parameter is applied.
fn check_first_order(ts: &[Token], formals: &[Name], macros: &Macros, site: &str) -> Result<(), CppError> {
    for (i, t) in ts.iter().enumerate() {
        let Some(n) = t.ident_name() else { continue };
        let applied = matches!(ts.get(i + 1), Some(Token { kind: TokKind::LParen, .. }));
        if formals.contains(n) {
            if applied {
                return Err(CppError::NotFirstOrder(format!("parameter `{n}` is applied in {site}")));
            }
        } else if macros.get(n).is_some() && !applied {
            return Err(CppError::NotFirstOrder(format!(
                "`{n}` is used in non-applied position in {site}"
            )));
        }
    }
    Ok(())
}

/// The macro system as a first-order program rooted at `call`.
pub fn to_program(macros: &Macros, call: &[Token]) -> Result<Program, CppError> {
    let mut defs = Vec::new();
    for d in macros.defs() {
        let site = format!("the body of `{}`", d.name);
        check_first_order(&d.body, &d.formals, macros, &site)?;
        defs.push(Def {
            name: d.name.clone(),
            params: d.formals.clone(),
            body: term_of(&d.body, &d.formals)?,
        });
    }
    check_first_order(call, &[], macros, "the call")?;
    let root = term_of(call, &[])?;
    Program::new(defs, root, Mode::FirstOrder).map_err(|e| match e {
        calculus::CalcError::ArityMismatch {
            name,
            expected,
            found,
            ..
        } => CppError::MalformedCall {
            name,
            msg: format!("expects {expected} argument(s), found {found}"),
        },
        other => CppError::NotATerm(other.to_string()),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AgreementReport {
    /// The calculus normal form, or `None` when it blocks.
    pub calculus_normal: Option<String>,
    /// The blocked redex of the calculus, as `f [trace]`.
    pub calculus_blocked: Option<String>,
    pub cpp_output: String,
    /// The expansion left a macro invocation unexpanded.
    pub cpp_residual: bool,
    pub agree: bool,
    /// Both blocked, and the stuck terms coincide after erasure.
    pub residual_equal: Option<bool>,
}

impl fmt::Display for AgreementReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.calculus_normal, &self.calculus_blocked) {
            (Some(v), _) => writeln!(f, "calculus: normal form {v}")?,
            (None, Some(b)) => writeln!(f, "calculus: blocked at {b}")?,
            _ => {}
        }
        writeln!(
            f,
            "cpp: {}{}",
            self.cpp_output,
            if self.cpp_residual { " (unexpanded invocation left)" } else { "" }
        )?;
        if let Some(eq) = self.residual_equal {
            writeln!(f, "residues {}", if eq { "coincide" } else { "differ" })?;
        }
        write!(f, "{}", if self.agree { "agree" } else { "DISAGREE" })
    }
}

fn has_residual(ts: &[Token], macros: &Macros) -> bool {
    ts.iter().enumerate().any(|(i, t)| {
        t.ident_name().is_some_and(|n| macros.get(n).is_some())
            && matches!(ts.get(i + 1), Some(Token { kind: TokKind::LParen, .. }))
    })
}

/// Runs both engines on a first-order macro system. They agree when both
/// reach the same normal form, or when both leave a blocked invocation.
pub fn compare_first_order(macros: &Macros, call: &[Token]) -> Result<AgreementReport, CppError> {
    let program = to_program(macros, call)?;
    let outcome = calculus::normalize(&program, Strategy::LeftmostOutermost);
    let out = expand(call.to_vec(), macros)?;
    let cpp_residual = has_residual(&out, macros);
    let cpp_term = term_of(&out, &[]).ok();
    let (calculus_normal, calculus_blocked, agree, residual_equal) = match &outcome {
        Outcome::Normal { term, .. } => (
            Some(term.render(Mode::FirstOrder)),
            None,
            !cpp_residual && cpp_term.as_ref() == Some(term),
            None,
        ),
        Outcome::Diverges {
            name, trace, term, ..
        } => {
            let stuck = calculus::erase(term);
            (
                None,
                Some(format!("{name} {trace}")),
                cpp_residual,
                Some(cpp_term.as_ref() == Some(&stuck)),
            )
        }
    };
    Ok(AgreementReport {
        calculus_normal,
        calculus_blocked,
        cpp_output: render(&out, false),
        cpp_residual,
        agree,
        residual_equal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(text: &str) -> String {
        let (m, call) = parse_cpp(text).unwrap();
        render(&expand(call, &m).unwrap(), false)
    }

    const NIL: &str = "#define NIL(xxx) xxx
#define G0(arg) NIL(G1)(arg)
#define G1(arg) NIL(arg)
G0(42) // ~> NIL(G1)(42) ~> G1(42) ~> NIL(42) ~> 42";

    const FPQ: &str = "#define f(p,q) p(f(q,q))
#define id(x) x
#define stop(x) done
f(id,stop)";

    #[test]
    fn nil_expands_to_42() {
        assert_eq!(run(NIL), "42");
    }

    #[test]
    fn a_a_a_a_expands_to_b() {
        assert_eq!(run("#define a(x) b\n#define b(x) x\na(a)(a)(a)"), "b");
    }

    #[test]
    fn f_id_stop_stops_short_of_done() {
        let (m, call) = parse_cpp(FPQ).unwrap();
        let out = expand(call, &m).unwrap();
        assert_eq!(render(&out, false), "f ( stop , stop )");
        assert_eq!(render(&out, true), "f^{f,id} (^{f,id} stop^{f,id} , stop^{f,id} )^{f,id}");
        assert!(has_residual(&out, &m));
    }

    #[test]
    fn delta_stops() {
        assert_eq!(run("#define delta(x) x(x)\ndelta(delta)"), "delta ( delta )");
    }

    #[test]
    fn nil_step_hides_g1() {
        let (m, _) = parse_cpp(NIL).unwrap();
        let nil = m.get("NIL").unwrap();
        let hs: HideSet = [name("NIL")].into_iter().collect();
        let mut ex = Expander::new(&m, 10);
        let out = ex
            .subst(&nil.body, &nil.formals, vec![vec![Token::ident("G1")]], &hs)
            .unwrap();
        assert_eq!(render(&out, true), "G1^{NIL}");
    }

    #[test]
    fn subst_edge_cases() {
        let m = Macros::default();
        let hs: HideSet = [name("f")].into_iter().collect();
        let mut ex = Expander::new(&m, 10);
        assert!(ex.subst(&[], &[], vec![], &hs).unwrap().is_empty());
        let body = tokenize("c ( d )").unwrap();
        let out = ex.subst(&body, &[], vec![], &hs).unwrap();
        assert_eq!(render(&out, true), "c^{f} (^{f} d^{f} )^{f}");
    }

    #[test]
    fn hsadd_laws() {
        let ts = tokenize("x , 1 ( y )").unwrap();
        assert_eq!(hsadd(&HideSet::new(), ts.clone()), ts);
        let mut g = Token::ident("x");
        g.hs.insert(name("g"));
        let f: HideSet = [name("f")].into_iter().collect();
        assert_eq!(render(&hsadd(&f, vec![g]), true), "x^{f,g}");
        let once = hsadd(&f, ts.clone());
        assert_eq!(hsadd(&f, once.clone()), once);
        assert_eq!(render(&once, true), "x^{f} , 1 (^{f} y^{f} )^{f}");
    }

    #[test]
    fn malformed_calls() {
        let (m, call) = parse_cpp("#define f(x, y) x\nf(a)").unwrap();
        assert!(matches!(expand(call, &m), Err(CppError::MalformedCall { .. })));
        let (m, call) = parse_cpp("#define f(x) x\nf(a").unwrap();
        assert!(matches!(expand(call, &m), Err(CppError::MalformedCall { .. })));
        let (m, call) = parse_cpp("#define k() c\nk() k").unwrap();
        assert_eq!(render(&expand(call, &m).unwrap(), false), "c k");
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_cpp("#define X 1"), Err(CppError::Syntax { line: 1, .. })));
        assert!(matches!(parse_cpp("#include <x>"), Err(CppError::Syntax { .. })));
        assert!(matches!(parse_cpp("#define f(x) x\n#define f(y) y"), Err(CppError::Syntax { .. })));
    }

    #[test]
    fn step_limit() {
        // Three invocations are needed.
        let (m, call) = parse_cpp("#define f(x) x\nf(f(f(a)))").unwrap();
        let mut ex = Expander::new(&m, 2);
        assert_eq!(ex.expand(call), Err(CppError::StepLimit(2)));
    }

    #[test]
    fn token_limit() {
        // d(d(d(a))) has 8 copies of `a`: 2^3 + 2^2 + 2 leaves are copied.
        let (m, call) = parse_cpp("#define d(x) p(x, x)\nd(d(d(a)))").unwrap();
        let mut ex = Expander::new(&m, 100).with_token_limit(40);
        assert_eq!(ex.expand(call.clone()), Err(CppError::TokenLimit(40)));
        let mut ex = Expander::new(&m, 100);
        let out = ex.expand(call).unwrap();
        assert_eq!(render(&out, false).matches('a').count(), 8);
        assert!(ex.tokens > 40);
    }

    #[test]
    fn first_order_agreement() {
        let (m, call) = parse_cpp("#define id(a) a\nid(id(int))").unwrap();
        let r = compare_first_order(&m, &call).unwrap();
        assert!(r.agree);
        assert_eq!(r.calculus_normal.as_deref(), Some("int"));
        assert_eq!(r.cpp_output, "int");

        let (m, call) = parse_cpp("#define loop(a) loop(list(a))\nloop(int)").unwrap();
        let r = compare_first_order(&m, &call).unwrap();
        assert!(r.agree && r.cpp_residual);
        assert_eq!(r.calculus_blocked.as_deref(), Some("loop [loop]"));
        assert_eq!(r.cpp_output, "loop ( list ( int ) )");
        assert_eq!(r.residual_equal, Some(true));
    }

    #[test]
    fn nil_is_not_first_order() {
        let (m, call) = parse_cpp(NIL).unwrap();
        let err = compare_first_order(&m, &call).unwrap_err();
        assert!(matches!(&err, CppError::NotFirstOrder(msg) if msg.contains("`G1`")), "{err}");
    }
}
