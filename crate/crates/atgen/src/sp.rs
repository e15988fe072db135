//! Series-parallel attack graphs and their composition algebra.
//!
//! A graph is either a single labelled edge, a sequential composition, or a
//! parallel composition. Compositions are kept in associativity normal form:
//! no sequential node has a sequential child and no parallel node has a
//! parallel child, so [`SpGraph::decompose`] always returns the maximal
//! top-level factor list. Parallel children are stored sorted, making
//! parallel composition commutative under structural equality, while
//! sequential children keep their order.
//!
//! Graphs produced from transition-system paths additionally carry the start
//! and end state of the underlying subpath. These endpoints are metadata:
//! they take no part in equality, ordering, or hashing.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::kripke::{State, StepDelta};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpError {
    #[error("empty composition")]
    EmptyComposition,
    #[error("empty attack set")]
    EmptyAttackSet,
    #[error("empty operand in lifted composition")]
    EmptyLiftOperand,
}

/// Edge label: a bare symbol in the generic pipeline, a state delta when the
/// graph derives from a transition-system path.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeLabel {
    Symbol(String),
    Delta(StepDelta),
}

impl EdgeLabel {
    pub fn symbol(s: impl Into<String>) -> Self {
        EdgeLabel::Symbol(s.into())
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeLabel::Symbol(s) => write!(f, "{s}"),
            EdgeLabel::Delta(d) => write!(f, "{d}"),
        }
    }
}

/// Top-level shape of a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    Simple,
    Sequential,
    Parallel,
}

/// Composition operator, used by the set-lifted operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Composition {
    Sequential,
    Parallel,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum SpNode {
    Leaf(EdgeLabel),
    Seq(Vec<SpGraph>),
    Par(Vec<SpGraph>),
}

/// A series-parallel graph over edge labels; the unit of an attack.
#[derive(Debug, Clone)]
pub struct SpGraph {
    node: SpNode,
    endpoints: Option<Box<(State, State)>>,
}

impl PartialEq for SpGraph {
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node
    }
}

impl Eq for SpGraph {}

impl PartialOrd for SpGraph {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SpGraph {
    fn cmp(&self, other: &Self) -> Ordering {
        self.node.cmp(&other.node)
    }
}

/// Finite attack set, deduplicated under semantic (endpoint-blind) equality
/// with deterministic canonical iteration order.
pub type SpGraphSet = BTreeSet<SpGraph>;

impl SpGraph {
    pub fn leaf(label: EdgeLabel) -> Self {
        SpGraph {
            node: SpNode::Leaf(label),
            endpoints: None,
        }
    }

    pub fn leaf_with_endpoints(label: EdgeLabel, start: State, end: State) -> Self {
        SpGraph {
            node: SpNode::Leaf(label),
            endpoints: Some(Box::new((start, end))),
        }
    }

    pub fn symbol(s: impl Into<String>) -> Self {
        SpGraph::leaf(EdgeLabel::symbol(s))
    }

    pub fn is_simple(&self) -> bool {
        matches!(self.node, SpNode::Leaf(_))
    }

    pub fn kind(&self) -> GraphKind {
        match self.node {
            SpNode::Leaf(_) => GraphKind::Simple,
            SpNode::Seq(_) => GraphKind::Sequential,
            SpNode::Par(_) => GraphKind::Parallel,
        }
    }

    /// The edge label of a simple graph.
    pub fn label(&self) -> Option<&EdgeLabel> {
        match &self.node {
            SpNode::Leaf(l) => Some(l),
            _ => None,
        }
    }

    pub fn endpoints(&self) -> Option<(&State, &State)> {
        self.endpoints.as_deref().map(|(s, e)| (s, e))
    }

    /// Maximal top-level decomposition. Simple graphs decompose into
    /// themselves; composites return their (already maximal) factor list.
    pub fn decompose(&self) -> (GraphKind, Vec<SpGraph>) {
        match &self.node {
            SpNode::Leaf(_) => (GraphKind::Simple, vec![self.clone()]),
            SpNode::Seq(children) => (GraphKind::Sequential, children.clone()),
            SpNode::Par(children) => (GraphKind::Parallel, children.clone()),
        }
    }

    /// Number of leaf edges.
    pub fn edge_count(&self) -> usize {
        match &self.node {
            SpNode::Leaf(_) => 1,
            SpNode::Seq(children) | SpNode::Par(children) => {
                children.iter().map(SpGraph::edge_count).sum()
            }
        }
    }
}

impl fmt::Display for SpGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            SpNode::Leaf(l) => write!(f, "{l}"),
            SpNode::Seq(children) => {
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        write!(f, ".")?;
                    }
                    if c.kind() == GraphKind::Parallel {
                        write!(f, "({c})")?;
                    } else {
                        write!(f, "{c}")?;
                    }
                }
                Ok(())
            }
            SpNode::Par(children) => {
                write!(f, "(")?;
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        write!(f, "|")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Sequential composition, flattened to maximal arity. A singleton list
/// returns its element unchanged. Endpoint metadata is carried over when the
/// first factor's start and last factor's end are known.
pub fn seq_compose(gs: Vec<SpGraph>) -> Result<SpGraph, SpError> {
    if gs.is_empty() {
        return Err(SpError::EmptyComposition);
    }
    if gs.len() == 1 {
        return Ok(gs.into_iter().next().expect("len checked"));
    }
    let start = gs
        .first()
        .and_then(|g| g.endpoints().map(|(s, _)| s.clone()));
    let end = gs
        .last()
        .and_then(|g| g.endpoints().map(|(_, e)| e.clone()));
    let mut children = Vec::new();
    for g in gs {
        match g.node {
            SpNode::Seq(cs) => children.extend(cs),
            _ => children.push(g),
        }
    }
    let endpoints = match (start, end) {
        (Some(s), Some(e)) => Some(Box::new((s, e))),
        _ => None,
    };
    Ok(SpGraph {
        node: SpNode::Seq(children),
        endpoints,
    })
}

/// Parallel composition, flattened to maximal arity and canonically sorted.
/// A singleton list returns its element unchanged; composites drop endpoint
/// metadata, which only sequential path graphs carry.
pub fn par_compose(gs: Vec<SpGraph>) -> Result<SpGraph, SpError> {
    if gs.is_empty() {
        return Err(SpError::EmptyComposition);
    }
    if gs.len() == 1 {
        return Ok(gs.into_iter().next().expect("len checked"));
    }
    let mut children = Vec::new();
    for g in gs {
        match g.node {
            SpNode::Par(cs) => children.extend(cs),
            _ => children.push(g),
        }
    }
    children.sort();
    Ok(SpGraph {
        node: SpNode::Par(children),
        endpoints: None,
    })
}

pub fn compose(kind: Composition, gs: Vec<SpGraph>) -> Result<SpGraph, SpError> {
    match kind {
        Composition::Sequential => seq_compose(gs),
        Composition::Parallel => par_compose(gs),
    }
}

/// Is every member simple-or-sequential, or every member simple-or-parallel?
/// Simple graphs are compatible with both kinds, so a set is heterogeneous
/// exactly when it contains both a sequential and a parallel composite.
pub fn is_homogeneous(s: &SpGraphSet) -> Result<bool, SpError> {
    if s.is_empty() {
        return Err(SpError::EmptyAttackSet);
    }
    let has_seq = s.iter().any(|g| g.kind() == GraphKind::Sequential);
    let has_par = s.iter().any(|g| g.kind() == GraphKind::Parallel);
    Ok(!(has_seq && has_par))
}

/// Set-lifted composition: all pointwise compositions over the Cartesian
/// product of the operand sets, deduplicated.
pub fn set_lift_compose(kind: Composition, sets: &[SpGraphSet]) -> Result<SpGraphSet, SpError> {
    if sets.is_empty() {
        return Err(SpError::EmptyComposition);
    }
    if sets.iter().any(|s| s.is_empty()) {
        return Err(SpError::EmptyLiftOperand);
    }
    let mut tuples: Vec<Vec<SpGraph>> = vec![Vec::new()];
    for set in sets {
        let mut next = Vec::with_capacity(tuples.len() * set.len());
        for tuple in &tuples {
            for g in set {
                let mut t = tuple.clone();
                t.push(g.clone());
                next.push(t);
            }
        }
        tuples = next;
    }
    tuples
        .into_iter()
        .map(|t| compose(kind, t))
        .collect::<Result<SpGraphSet, SpError>>()
}
