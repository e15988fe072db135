//! SAND attack trees: labelled terms over OR, AND, and SAND refinements,
//! with their series-parallel semantics.
//!
//! Every node carries a goal label. OR and AND are commutative, so their
//! children compare as multisets; SAND children keep their order. The
//! semantics of a tree is a set of SP graphs: a leaf denotes the simple
//! graph carrying its goal as edge label, OR takes the union of its
//! children, and AND/SAND take the set-lifted parallel/sequential
//! composition.

use std::cmp::Ordering;
use std::fmt;

use crate::goals::Goal;
use crate::sp::{set_lift_compose, Composition, SpGraph, SpGraphSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TreeOp {
    Or,
    And,
    Sand,
}

impl fmt::Display for TreeOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeOp::Or => write!(f, "OR"),
            TreeOp::And => write!(f, "AND"),
            TreeOp::Sand => write!(f, "SAND"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum AttackTree {
    Leaf {
        label: Goal,
    },
    Node {
        label: Goal,
        op: TreeOp,
        children: Vec<AttackTree>,
    },
}

impl AttackTree {
    pub fn leaf(label: Goal) -> Self {
        AttackTree::Leaf { label }
    }

    pub fn node(label: Goal, op: TreeOp, children: Vec<AttackTree>) -> Self {
        assert!(
            !children.is_empty(),
            "refinement nodes need at least one child"
        );
        AttackTree::Node {
            label,
            op,
            children,
        }
    }

    /// The label at the root.
    pub fn top(&self) -> &Goal {
        match self {
            AttackTree::Leaf { label } | AttackTree::Node { label, .. } => label,
        }
    }

    pub fn op(&self) -> Option<TreeOp> {
        match self {
            AttackTree::Leaf { .. } => None,
            AttackTree::Node { op, .. } => Some(*op),
        }
    }

    pub fn children(&self) -> &[AttackTree] {
        match self {
            AttackTree::Leaf { .. } => &[],
            AttackTree::Node { children, .. } => children,
        }
    }

    /// Node count.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(AttackTree::size).sum::<usize>()
    }

    /// All subtrees including the tree itself, in pre-order.
    pub fn subtrees(&self) -> Vec<&AttackTree> {
        let mut out = vec![self];
        for c in self.children() {
            out.extend(c.subtrees());
        }
        out
    }

    /// The SP semantics of the tree.
    pub fn semantics(&self) -> SpGraphSet {
        match self {
            AttackTree::Leaf { label } => [SpGraph::leaf(label.edge_label())].into_iter().collect(),
            AttackTree::Node { op, children, .. } => {
                let sems: Vec<SpGraphSet> = children.iter().map(AttackTree::semantics).collect();
                match op {
                    TreeOp::Or => sems.into_iter().flatten().collect(),
                    TreeOp::And => set_lift_compose(Composition::Parallel, &sems)
                        .expect("child semantics are non-empty"),
                    TreeOp::Sand => set_lift_compose(Composition::Sequential, &sems)
                        .expect("child semantics are non-empty"),
                }
            }
        }
    }

    pub fn semantically_equal(&self, other: &AttackTree) -> bool {
        self.semantics() == other.semantics()
    }

    /// Canonical form: OR/AND children sorted structurally, SAND children
    /// untouched. Two trees are equal exactly when their canonical forms
    /// coincide structurally.
    pub fn canonical(&self) -> AttackTree {
        match self {
            AttackTree::Leaf { .. } => self.clone(),
            AttackTree::Node {
                label,
                op,
                children,
            } => {
                let mut children: Vec<AttackTree> =
                    children.iter().map(AttackTree::canonical).collect();
                if matches!(op, TreeOp::Or | TreeOp::And) {
                    children.sort_by(structural_cmp);
                }
                AttackTree::Node {
                    label: label.clone(),
                    op: *op,
                    children,
                }
            }
        }
    }
}

fn structural_cmp(a: &AttackTree, b: &AttackTree) -> Ordering {
    match (a, b) {
        (AttackTree::Leaf { label: la }, AttackTree::Leaf { label: lb }) => la.cmp(lb),
        (AttackTree::Leaf { .. }, AttackTree::Node { .. }) => Ordering::Less,
        (AttackTree::Node { .. }, AttackTree::Leaf { .. }) => Ordering::Greater,
        (
            AttackTree::Node {
                label: la,
                op: oa,
                children: ca,
            },
            AttackTree::Node {
                label: lb,
                op: ob,
                children: cb,
            },
        ) => la.cmp(lb).then(oa.cmp(ob)).then_with(|| {
            for (x, y) in ca.iter().zip(cb) {
                let ord = structural_cmp(x, y);
                if ord != Ordering::Equal {
                    return ord;
                }
            }
            ca.len().cmp(&cb.len())
        }),
    }
}

impl PartialEq for AttackTree {
    fn eq(&self, other: &Self) -> bool {
        structural_cmp(&self.canonical(), &other.canonical()) == Ordering::Equal
    }
}

impl Eq for AttackTree {}

impl fmt::Display for AttackTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackTree::Leaf { label } => write!(f, "{label}"),
            AttackTree::Node {
                label,
                op,
                children,
            } => {
                write!(f, "{label} |> {op}(")?;
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
        }
    }
}
