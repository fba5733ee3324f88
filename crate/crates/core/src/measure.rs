//! Termination measure for annotated reduction.
//!
//! Each node of an annotated term is measured by the multiset of trace keys
//! on its path to the root (itself included); the term is measured by the
//! multiset of its node measures. Keys are ordered by anti-inclusion of
//! traces, with [`TraceKey::Bottom`] below everything, and both multiset
//! levels use the Dershowitz–Manna ordering. Every annotated reduction step
//! strictly decreases this measure; [`assert_decrease`] checks it at runtime.
//! Reduction never consults this module.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::calculus::{AnnTerm, Mode, Name, Trace};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TraceKey {
    /// Variables and (in higher-order mode) name leaves.
    Bottom,
    Trace(Arc<BTreeSet<Name>>),
}

impl TraceKey {
    pub fn of_trace(l: &Trace) -> TraceKey {
        TraceKey::Trace(Arc::new(l.names().iter().cloned().collect()))
    }
}

impl fmt::Display for TraceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceKey::Bottom => f.write_str("_"),
            TraceKey::Trace(s) => {
                let names: Vec<&str> = s.iter().map(|n| &**n).collect();
                write!(f, "[{}]", names.join(","))
            }
        }
    }
}

/// Strict key order: `Bottom` is least; `l < l'` iff `l ⊋ l'`.
pub fn key_less(a: &TraceKey, b: &TraceKey) -> bool {
    match (a, b) {
        (TraceKey::Bottom, TraceKey::Trace(_)) => true,
        (TraceKey::Trace(x), TraceKey::Trace(y)) => x.len() > y.len() && x.is_superset(y),
        _ => false,
    }
}

/// Dershowitz–Manna: `m1 < m2` iff, writing `M` for their intersection,
/// `m1 = M + N1`, `m2 = M + N2`, `N2` is nonempty, and every element of `N1`
/// lies strictly below some element of `N2`. `Ord` is only used to identify
/// equal elements; `lt` is the strict element order.
pub fn multiset_less<T: Ord>(m1: &[T], m2: &[T], lt: impl Fn(&T, &T) -> bool) -> bool {
    let mut a: Vec<&T> = m1.iter().collect();
    let mut b: Vec<&T> = m2.iter().collect();
    a.sort();
    b.sort();
    let (mut n1, mut n2) = (Vec::new(), Vec::new());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(b[j]) {
            std::cmp::Ordering::Less => {
                n1.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                n2.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    n1.extend_from_slice(&a[i..]);
    n2.extend_from_slice(&b[j..]);
    !n2.is_empty() && n1.iter().all(|x| n2.iter().any(|y| lt(x, y)))
}

/// Multiset of the keys on a node's root path, the node included.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeMeasure(Vec<TraceKey>);

impl NodeMeasure {
    pub fn new(mut keys: Vec<TraceKey>) -> NodeMeasure {
        keys.sort();
        NodeMeasure(keys)
    }

    pub fn keys(&self) -> &[TraceKey] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn node_less(a: &NodeMeasure, b: &NodeMeasure) -> bool {
    multiset_less(&a.0, &b.0, key_less)
}

impl fmt::Display for NodeMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let keys: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        write!(f, "{{{}}}", keys.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TreeMeasure(Vec<NodeMeasure>);

impl TreeMeasure {
    pub fn new(mut nodes: Vec<NodeMeasure>) -> TreeMeasure {
        nodes.sort();
        TreeMeasure(nodes)
    }

    pub fn nodes(&self) -> &[NodeMeasure] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Canonical sorted rendering, e.g. `{{[f]}, {[f], [g]}}`.
impl fmt::Display for TreeMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nodes: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
        write!(f, "{{{}}}", nodes.join(", "))
    }
}

pub fn measure_less(a: &TreeMeasure, b: &TreeMeasure) -> bool {
    multiset_less(&a.0, &b.0, node_less)
}

/// Measures every node of `t`.
///
/// First-order terms are measured node-for-node: application nodes keyed by
/// their trace and variable leaves by `Bottom` (heads are part of the call
/// node). Higher-order terms use an explicit application node whose first
/// child is the head, so name leaves are nodes of their own, keyed `Bottom`.
pub fn tree_measure(t: &AnnTerm, mode: Mode) -> TreeMeasure {
    fn go(t: &AnnTerm, mode: Mode, path: &mut Vec<TraceKey>, out: &mut Vec<NodeMeasure>) {
        match t {
            AnnTerm::Var(_) | AnnTerm::Sym(_) => {
                let mut keys = path.clone();
                keys.push(TraceKey::Bottom);
                out.push(NodeMeasure::new(keys));
            }
            AnnTerm::App(a) => {
                path.push(TraceKey::of_trace(&a.trace));
                out.push(NodeMeasure::new(path.clone()));
                if mode == Mode::ClosedHigherOrder {
                    go(&a.head, mode, path, out);
                }
                for arg in &a.args {
                    go(arg, mode, path, out);
                }
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(t, mode, &mut Vec::new(), &mut out);
    TreeMeasure::new(out)
}

/// Whether `after` has a strictly smaller tree measure than `before`.
pub fn assert_decrease(before: &AnnTerm, after: &AnnTerm, mode: Mode) -> bool {
    measure_less(&tree_measure(after, mode), &tree_measure(before, mode))
}
