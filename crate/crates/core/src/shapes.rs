//! Head shapes: the runtime heads a type's values may have, approximated as
//! an `(imm, block)` pair where each side is either every integer (`top`) or
//! a finite set.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// The cheap runtime discriminator of a value: an immediate integer or the
/// tag of a heap block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Head {
    Imm(i64),
    Block(i64),
}

impl Head {
    pub fn side(self) -> Side {
        match self {
            Head::Imm(_) => Side::Imm,
            Head::Block(_) => Side::Block,
        }
    }

    pub fn value(self) -> i64 {
        match self {
            Head::Imm(n) | Head::Block(n) => n,
        }
    }
}

impl fmt::Display for Head {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Head::Imm(n) => write!(f, "Imm {n}"),
            Head::Block(t) => write!(f, "Block {t}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Imm,
    Block,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Imm => "imm",
            Side::Block => "block",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SubShape {
    Top,
    Fin(BTreeSet<i64>),
}

impl SubShape {
    pub fn empty() -> SubShape {
        SubShape::Fin(BTreeSet::new())
    }

    pub fn of<I: IntoIterator<Item = i64>>(values: I) -> SubShape {
        SubShape::Fin(values.into_iter().collect())
    }

    pub fn contains(&self, n: i64) -> bool {
        match self {
            SubShape::Top => true,
            SubShape::Fin(s) => s.contains(&n),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, SubShape::Fin(s) if s.is_empty())
    }

    pub fn union(&self, other: &SubShape) -> SubShape {
        match (self, other) {
            (SubShape::Fin(a), SubShape::Fin(b)) => SubShape::Fin(a.union(b).copied().collect()),
            _ => SubShape::Top,
        }
    }

    /// A value denoted by both sides, if any. Two `top`s overlap everywhere.
    pub fn overlap(&self, other: &SubShape) -> Option<Overlap> {
        match (self, other) {
            (SubShape::Top, SubShape::Top) => Some(Overlap::Top),
            (SubShape::Top, SubShape::Fin(s)) | (SubShape::Fin(s), SubShape::Top) => {
                s.first().map(|&n| Overlap::Value(n))
            }
            (SubShape::Fin(a), SubShape::Fin(b)) => a.intersection(b).next().map(|&n| Overlap::Value(n)),
        }
    }
}

impl fmt::Display for SubShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubShape::Top => f.write_str("top"),
            SubShape::Fin(s) => {
                let vs: Vec<String> = s.iter().map(|n| n.to_string()).collect();
                write!(f, "{{{}}}", vs.join(","))
            }
        }
    }
}

impl Serialize for SubShape {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The value part of a conflict: a concrete shared integer, or two `top`
/// sides overlapping.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Overlap {
    Top,
    Value(i64),
}

impl fmt::Display for Overlap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Overlap::Top => f.write_str("top"),
            Overlap::Value(n) => write!(f, "{n}"),
        }
    }
}

impl Serialize for Overlap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Overlap::Top => s.serialize_str("top"),
            Overlap::Value(n) => s.serialize_i64(*n),
        }
    }
}

/// Two operands of a disjoint union share a head.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Clash {
    pub side: Side,
    pub value: Overlap,
}

impl Clash {
    /// A concrete head in both operands. A `top` overlap is witnessed by 0.
    pub fn head(&self) -> Head {
        let n = match self.value {
            Overlap::Top => 0,
            Overlap::Value(n) => n,
        };
        match self.side {
            Side::Imm => Head::Imm(n),
            Side::Block => Head::Block(n),
        }
    }
}

impl fmt::Display for Clash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.side, self.value) {
            (side, Overlap::Top) => write!(f, "{side} top overlaps {side} top"),
            (Side::Imm, Overlap::Value(n)) => write!(f, "Imm {n}"),
            (Side::Block, Overlap::Value(n)) => write!(f, "Block {n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct HeadShape {
    pub imm: SubShape,
    pub block: SubShape,
}

impl HeadShape {
    pub fn new(imm: SubShape, block: SubShape) -> HeadShape {
        HeadShape { imm, block }
    }

    /// `(∅, ∅)`, the shape of an empty sum.
    pub fn empty() -> HeadShape {
        HeadShape::new(SubShape::empty(), SubShape::empty())
    }

    /// `(top, top)`, the shape of a type variable.
    pub fn top() -> HeadShape {
        HeadShape::new(SubShape::Top, SubShape::Top)
    }

    pub fn imm<I: IntoIterator<Item = i64>>(values: I) -> HeadShape {
        HeadShape::new(SubShape::of(values), SubShape::empty())
    }

    pub fn block<I: IntoIterator<Item = i64>>(tags: I) -> HeadShape {
        HeadShape::new(SubShape::empty(), SubShape::of(tags))
    }

    pub fn is_empty(&self) -> bool {
        self.imm.is_empty() && self.block.is_empty()
    }

    pub fn side(&self, side: Side) -> &SubShape {
        match side {
            Side::Imm => &self.imm,
            Side::Block => &self.block,
        }
    }

    pub fn union(&self, other: &HeadShape) -> HeadShape {
        HeadShape::new(self.imm.union(&other.imm), self.block.union(&other.block))
    }

    /// The union when the denotations are disjoint; otherwise the first
    /// clash found, checking the immediate side first.
    pub fn disjoint_union(&self, other: &HeadShape) -> Result<HeadShape, Clash> {
        for side in [Side::Imm, Side::Block] {
            if let Some(value) = self.side(side).overlap(other.side(side)) {
                return Err(Clash { side, value });
            }
        }
        Ok(self.union(other))
    }

    pub fn contains(&self, h: Head) -> bool {
        match h {
            Head::Imm(n) => self.imm.contains(n),
            Head::Block(t) => self.block.contains(t),
        }
    }
}

pub fn shape_union(a: &HeadShape, b: &HeadShape) -> HeadShape {
    a.union(b)
}

pub fn shape_disjoint_union(a: &HeadShape, b: &HeadShape) -> Result<HeadShape, Clash> {
    a.disjoint_union(b)
}

pub fn shape_mem(h: Head, s: &HeadShape) -> bool {
    s.contains(h)
}

/// Shape of the `index`-th constant (`Imm index`) or non-constant
/// (`Block index`) constructor of a datatype.
pub fn ctor_shape(constant: bool, index: usize) -> HeadShape {
    let i = index as i64;
    if constant {
        HeadShape::imm([i])
    } else {
        HeadShape::block([i])
    }
}

/// Canonical rendering: `(imm: top, block: {255})`.
impl fmt::Display for HeadShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(imm: {}, block: {})", self.imm, self.block)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ShapeError {
    #[error("malformed shape `{text}`: {msg}")]
    Malformed { text: String, msg: String },
    #[error("block tag {0} outside of 0..=255")]
    TagOutOfRange(i64),
    #[error("line {line}: {msg}")]
    PrimTable { line: usize, msg: String },
    #[error("unknown primitive type `{0}`")]
    UnknownPrimitive(String),
}

/// Parses `(imm: top; block: {0,254})`. A comma may replace the semicolon.
pub fn parse_shape(text: &str) -> Result<HeadShape, ShapeError> {
    let bad = |msg: &str| ShapeError::Malformed {
        text: text.to_string(),
        msg: msg.to_string(),
    };
    let inner = text
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| bad("expected parentheses"))?;
    // Split at the separator that is not inside braces.
    let mut depth = 0;
    let mut split = None;
    for (i, c) in inner.char_indices() {
        match c {
            '{' => depth += 1,
            '}' => depth -= 1,
            ';' | ',' if depth == 0 => {
                split = Some(i);
                break;
            }
            _ => {}
        }
    }
    let i = split.ok_or_else(|| bad("expected `;` between the two sides"))?;
    let field = |part: &str, key: &str| -> Result<SubShape, ShapeError> {
        let rest = part
            .trim()
            .strip_prefix(key)
            .and_then(|s| s.trim_start().strip_prefix(':'))
            .ok_or_else(|| bad(&format!("expected `{key}:`")))?;
        parse_subshape(rest.trim()).ok_or_else(|| bad(&format!("bad `{key}` side")))
    };
    let shape = HeadShape::new(field(&inner[..i], "imm")?, field(&inner[i + 1..], "block")?);
    if let SubShape::Fin(tags) = &shape.block {
        if let Some(&t) = tags.iter().find(|&&t| !(0..=255).contains(&t)) {
            return Err(ShapeError::TagOutOfRange(t));
        }
    }
    Ok(shape)
}

fn parse_subshape(s: &str) -> Option<SubShape> {
    if s == "top" {
        return Some(SubShape::Top);
    }
    let body = s.strip_prefix('{')?.strip_suffix('}')?.trim();
    if body.is_empty() {
        return Some(SubShape::empty());
    }
    body.split(',')
        .map(|n| n.trim().parse::<i64>().ok())
        .collect::<Option<BTreeSet<_>>>()
        .map(SubShape::Fin)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimEntry {
    pub shape: HeadShape,
    /// Values may also be represented directly by the argument's value.
    pub lazylike: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimTable {
    entries: BTreeMap<String, PrimEntry>,
}

const DEFAULT_PRIMS: &str = include_str!("../data/prims.txt");

impl Default for PrimTable {
    fn default() -> PrimTable {
        PrimTable::parse(DEFAULT_PRIMS).expect("built-in primitive table")
    }
}

impl PrimTable {
    pub fn parse(text: &str) -> Result<PrimTable, ShapeError> {
        let mut entries = BTreeMap::new();
        for (lno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| ShapeError::PrimTable { line: lno + 1, msg };
            let (name, rest) = line
                .split_once('=')
                .ok_or_else(|| err("expected `name = shape`".into()))?;
            let name = name.trim();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(err(format!("bad primitive name `{name}`")));
            }
            let rest = rest.trim();
            let (shape_text, lazylike) = match rest.strip_suffix("lazylike") {
                Some(s) => (s.trim(), true),
                None => (rest, false),
            };
            let shape = parse_shape(shape_text).map_err(|e| err(e.to_string()))?;
            if entries
                .insert(name.to_string(), PrimEntry { shape, lazylike })
                .is_some()
            {
                return Err(err(format!("primitive `{name}` listed twice")));
            }
        }
        Ok(PrimTable { entries })
    }

    pub fn get(&self, name: &str) -> Option<&PrimEntry> {
        self.entries.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Shape of a primitive applied to arguments of the given shapes. Only
    /// lazylike primitives look at their arguments.
    pub fn shape(&self, name: &str, arg_shapes: &[HeadShape]) -> Result<HeadShape, ShapeError> {
        let e = self
            .get(name)
            .ok_or_else(|| ShapeError::UnknownPrimitive(name.to_string()))?;
        if e.lazylike {
            Ok(arg_shapes.iter().fold(e.shape.clone(), |acc, s| acc.union(s)))
        } else {
            Ok(e.shape.clone())
        }
    }
}
