//! Attack-tree generation: greedy homogeneous partitioning, factorisation of
//! homogeneous attack sets into AND/SAND refinements via the semiring of
//! [`crate::factor`], and single-graph tree construction.
//!
//! The entry point is [`tree_generation`]: find the optimal root label, then
//! either factorise a homogeneous set directly or partition it into
//! homogeneous blocks with common goals and disjoin the per-block trees. The
//! semantics of the produced tree is exactly the input attack set, and every
//! node label is correct and optimal.
//!
//! OR-rooted children of an OR node are spliced into their parent. This
//! keeps generated trees no larger than the flat disjunction of per-graph
//! trees; semantics and label correctness are unaffected.

use thiserror::Error;

use crate::factor::{Factorisation, Mode, SopExpr, SplitStrategy};
use crate::goals::{Goal, GoalError, GoalRelation};
use crate::sp::{self, Composition, GraphKind, SpGraph, SpGraphSet};
use crate::tree::{AttackTree, TreeOp};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SynthError {
    #[error("empty attack set")]
    EmptyAttackSet,
    #[error("attack set is not homogeneous")]
    NotHomogeneous,
    #[error(transparent)]
    Goal(#[from] GoalError),
}

/// A partition of an attack set into homogeneous blocks that each share a
/// common goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub blocks: Vec<SpGraphSet>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// Greedy partitioning: grow a block over the remaining graphs in canonical
/// order, keeping it homogeneous and on a common goal; a singleton block
/// always qualifies, so the loop terminates with every graph placed.
pub fn partition(rel: &GoalRelation, s: &SpGraphSet) -> Result<Partition, SynthError> {
    if s.is_empty() {
        return Err(SynthError::EmptyAttackSet);
    }
    let mut remaining: Vec<SpGraph> = s.iter().cloned().collect();
    let mut blocks = Vec::new();
    while !remaining.is_empty() {
        let mut block = SpGraphSet::new();
        let mut rest = Vec::new();
        for g in remaining {
            let mut candidate = block.clone();
            candidate.insert(g.clone());
            if sp::is_homogeneous(&candidate).expect("candidate is non-empty")
                && rel.common_goal_exists(&candidate)
            {
                block = candidate;
            } else {
                rest.push(g);
            }
        }
        blocks.push(block);
        remaining = rest;
    }
    Ok(Partition { blocks })
}

/// Generate an optimally-labelled tree whose semantics is exactly `s`.
/// The graphs in `s` must share a common goal.
pub fn tree_generation(rel: &GoalRelation, s: &SpGraphSet) -> Result<AttackTree, SynthError> {
    if s.is_empty() {
        return Err(SynthError::EmptyAttackSet);
    }
    let label = rel.find_optimal_label(s)?;
    if sp::is_homogeneous(s).expect("checked non-empty") {
        return tree_factorisation(rel, s);
    }
    let blocks = partition(rel, s)?;
    let mut children = Vec::new();
    for block in &blocks.blocks {
        push_or_child(&mut children, tree_generation(rel, block)?);
    }
    Ok(AttackTree::node(label, TreeOp::Or, children))
}

/// Add a child to an OR node under construction, splicing OR-rooted
/// subtrees into the parent.
fn push_or_child(children: &mut Vec<AttackTree>, child: AttackTree) {
    match child {
        AttackTree::Node {
            op: TreeOp::Or,
            children: grandchildren,
            ..
        } => children.extend(grandchildren),
        other => children.push(other),
    }
}

/// Composition kind of a homogeneous set: parallel when some member is a
/// parallel composite, sequential otherwise (simple graphs fit either).
fn set_kind(s: &SpGraphSet) -> Composition {
    if s.iter().any(|g| g.kind() == GraphKind::Parallel) {
        Composition::Parallel
    } else {
        Composition::Sequential
    }
}

/// Factorise a homogeneous attack set with a common goal into a tree.
///
/// Singletons build directly. Otherwise the set is encoded as a
/// sum-of-products expression whose atoms are the maximal factors not
/// decomposable by the set's composition kind, and the expression is
/// factorised greedily:
///
/// - a complete product becomes an AND/SAND refinement over the factor sets;
/// - a partial product becomes an OR of the product's expansion and the
///   remainder;
/// - no product (or a factor set without a common goal) yields the flat
///   disjunction of per-graph trees.
pub fn tree_factorisation(rel: &GoalRelation, s: &SpGraphSet) -> Result<AttackTree, SynthError> {
    if s.is_empty() {
        return Err(SynthError::EmptyAttackSet);
    }
    if !sp::is_homogeneous(s).expect("checked non-empty") {
        return Err(SynthError::NotHomogeneous);
    }
    let label = rel.find_optimal_label(s)?;
    if s.len() == 1 {
        return build_tree(rel, s.iter().next().expect("singleton"));
    }

    let kind = set_kind(s);
    let expr = encode_sop(s, kind);
    let strategy = SplitStrategy::Full;
    let fac = expr.factorise(strategy);

    if fac.factors.len() >= 2 && factor_sets_share_goals(rel, &fac, kind) {
        let factor_sets: Vec<SpGraphSet> =
            fac.factors.iter().map(|f| expr_graphs(f, kind)).collect();
        if fac.remainder.is_none() {
            let children = factor_sets
                .iter()
                .map(|set| tree_generation(rel, set))
                .collect::<Result<Vec<_>, _>>()?;
            let op = match kind {
                Composition::Parallel => TreeOp::And,
                Composition::Sequential => TreeOp::Sand,
            };
            let node = AttackTree::node(label.clone(), op, children);
            // Extracting a shared factor is only worth a conjunction node
            // when it saves at least one node over the per-graph trees;
            // otherwise the flat disjunction is smaller.
            let flat_children = s
                .iter()
                .map(|g| build_tree(rel, g))
                .collect::<Result<Vec<_>, _>>()?;
            let flat_budget: usize = flat_children.iter().map(AttackTree::size).sum();
            if node.size() > flat_budget {
                return Ok(AttackTree::node(label, TreeOp::Or, flat_children));
            }
            return Ok(node);
        }
        // Partial factorisation: one branch covers the product's expansion,
        // the others the remainder.
        let mut product = fac.factors[0].clone();
        for f in &fac.factors[1..] {
            product = product.mul(f);
        }
        let product_set = expr_graphs(&product, kind);
        let remainder_set =
            expr_graphs(fac.remainder.as_ref().expect("partial factorisation"), kind);
        let mut children = Vec::new();
        push_or_child(&mut children, tree_generation(rel, &product_set)?);
        push_or_child(&mut children, tree_generation(rel, &remainder_set)?);
        return Ok(AttackTree::node(label, TreeOp::Or, children));
    }

    // Flat disjunction.
    let children = s
        .iter()
        .map(|g| build_tree(rel, g))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AttackTree::node(label, TreeOp::Or, children))
}

/// Build an optimally-labelled tree covering a single graph: a leaf for a
/// simple graph, otherwise an AND/SAND refinement over the maximal factors.
pub fn build_tree(rel: &GoalRelation, g: &SpGraph) -> Result<AttackTree, SynthError> {
    let singleton: SpGraphSet = [g.clone()].into_iter().collect();
    if g.is_simple() {
        return Ok(AttackTree::leaf(leaf_label(rel, g, &singleton)?));
    }
    let label = rel.find_optimal_label(&singleton)?;
    let (kind, factors) = g.decompose();
    let op = match kind {
        GraphKind::Parallel => TreeOp::And,
        GraphKind::Sequential => TreeOp::Sand,
        GraphKind::Simple => unreachable!("simple graphs build leaves"),
    };
    let children = factors
        .iter()
        .map(|f| build_tree(rel, f))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AttackTree::node(label, op, children))
}

/// Label for a leaf covering the simple graph `g`. A leaf denotes the simple
/// graph of its own label, so among the minimal-attack-set candidates the
/// one matching `g`'s edge label is preferred; failing that, the edge label
/// itself is used when the relation accepts it (a correct leaf is optimal).
fn leaf_label(rel: &GoalRelation, g: &SpGraph, singleton: &SpGraphSet) -> Result<Goal, SynthError> {
    let edge = g.label().expect("simple graph");
    let own = Goal::from_edge(edge);
    let mut candidates = rel.optimal_label_candidates(singleton)?;
    if let Some(i) = candidates.iter().position(|c| *c == own) {
        return Ok(candidates.remove(i));
    }
    if rel.sat(g, &own) {
        return Ok(own);
    }
    Ok(candidates.remove(0))
}

/// Encode a homogeneous set as a sum of products: one cube per graph, whose
/// atoms are the maximal factors not decomposable by `kind`.
fn encode_sop(s: &SpGraphSet, kind: Composition) -> SopExpr<SpGraph> {
    let mode = match kind {
        Composition::Parallel => Mode::Commutative,
        Composition::Sequential => Mode::NonCommutative,
    };
    let cubes: Vec<Vec<SpGraph>> = s
        .iter()
        .map(|g| match (kind, g.kind()) {
            (Composition::Sequential, GraphKind::Sequential)
            | (Composition::Parallel, GraphKind::Parallel) => g.decompose().1,
            _ => vec![g.clone()],
        })
        .collect();
    SopExpr::new(mode, cubes).expect("non-empty homogeneous set")
}

/// The graphs denoted by a sub-expression: each cube recomposed under the
/// active kind.
fn expr_graphs(expr: &SopExpr<SpGraph>, kind: Composition) -> SpGraphSet {
    expr.cubes()
        .map(|c| sp::compose(kind, c.atoms().to_vec()).expect("cubes are non-empty"))
        .collect()
}

fn factor_sets_share_goals(
    rel: &GoalRelation,
    fac: &Factorisation<SpGraph>,
    kind: Composition,
) -> bool {
    let factor_ok = fac
        .factors
        .iter()
        .all(|f| rel.common_goal_exists(&expr_graphs(f, kind)));
    let remainder_ok = fac
        .remainder
        .as_ref()
        .map(|r| rel.common_goal_exists(&expr_graphs(r, kind)))
        .unwrap_or(true);
    factor_ok && remainder_ok
}
