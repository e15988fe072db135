//! Goal relations between attacks and labels, and the labelling conditions
//! on attack trees.
//!
//! A relation pairs a finite attack universe with a satisfaction oracle.
//! Two backends exist: a table-driven relation over an explicit finite goal
//! alphabet, and the delta relation of the transition-system pipeline, whose
//! optimal labels have a closed form and need no enumeration.
//!
//! A tree is correctly labelled when every subtree's semantics is contained
//! in the attacks of its root label. Among correct labels, a node label is
//! optimal when no correct relabelling of that node (children fixed) misses
//! fewer attacks; for a leaf there is no such relabelling game, so a correct
//! leaf is optimal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::kripke::{optimal_delta_label, StepDelta};
use crate::sp::{EdgeLabel, SpGraph, SpGraphSet};
use crate::tree::AttackTree;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GoalError {
    #[error("unknown goal `{0}`")]
    UnknownGoal(String),
    #[error("no common goal")]
    NoCommonGoal,
    #[error("goal relation is not total: graph `{0}` satisfies no goal")]
    NotTotal(String),
    #[error("satisfaction pair references graph index {0} outside the universe")]
    BadGraphIndex(usize),
    #[error("tree is not correctly labelled")]
    NotCorrectlyLabelled,
    #[error("graph carries no endpoint states or delta reading")]
    MissingDelta,
}

/// An attacker goal: a named symbol in the generic pipeline, a state delta
/// in the transition-system pipeline.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Goal {
    Symbol(String),
    Delta(StepDelta),
}

impl Goal {
    pub fn symbol(s: impl Into<String>) -> Self {
        Goal::Symbol(s.into())
    }

    /// The edge label a leaf with this goal denotes.
    pub fn edge_label(&self) -> EdgeLabel {
        match self {
            Goal::Symbol(s) => EdgeLabel::Symbol(s.clone()),
            Goal::Delta(d) => EdgeLabel::Delta(d.clone()),
        }
    }

    pub fn from_edge(label: &EdgeLabel) -> Self {
        match label {
            EdgeLabel::Symbol(s) => Goal::Symbol(s.clone()),
            EdgeLabel::Delta(d) => Goal::Delta(d.clone()),
        }
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Goal::Symbol(s) => write!(f, "{s}"),
            Goal::Delta(d) => write!(f, "{d}"),
        }
    }
}

#[derive(Debug, Clone)]
enum Backend {
    Table {
        goals: BTreeSet<Goal>,
        sat: BTreeMap<SpGraph, BTreeSet<Goal>>,
    },
    Lts,
}

/// A total relation between a finite attack universe and goals.
#[derive(Debug, Clone)]
pub struct GoalRelation {
    universe: SpGraphSet,
    backend: Backend,
}

/// A correctness violation: an attack in a subtree's semantics that does not
/// satisfy the subtree's root label.
#[derive(Debug, Clone)]
pub struct CorrectnessViolation {
    pub subtree: AttackTree,
    pub attack: SpGraph,
}

/// An optimality violation: a correct relabelling of the subtree's root that
/// misses fewer attacks.
#[derive(Debug, Clone)]
pub struct OptimalityViolation {
    pub subtree: AttackTree,
    pub better: Goal,
}

impl GoalRelation {
    /// Table-driven relation. `sat` pairs a universe index with a goal.
    /// Fails when a pair references an unknown goal or graph, or when some
    /// universe graph satisfies no goal at all.
    pub fn table(
        universe: SpGraphSet,
        goals: BTreeSet<Goal>,
        pairs: Vec<(usize, Goal)>,
    ) -> Result<Self, GoalError> {
        let graphs: Vec<&SpGraph> = universe.iter().collect();
        let mut sat: BTreeMap<SpGraph, BTreeSet<Goal>> = universe
            .iter()
            .map(|g| (g.clone(), BTreeSet::new()))
            .collect();
        for (idx, goal) in pairs {
            if !goals.contains(&goal) {
                return Err(GoalError::UnknownGoal(goal.to_string()));
            }
            let g = *graphs.get(idx).ok_or(GoalError::BadGraphIndex(idx))?;
            sat.get_mut(g).expect("graph from universe").insert(goal);
        }
        if let Some((g, _)) = sat.iter().find(|(_, gs)| gs.is_empty()) {
            return Err(GoalError::NotTotal(g.to_string()));
        }
        Ok(GoalRelation {
            universe,
            backend: Backend::Table { goals, sat },
        })
    }

    /// The delta relation over a subpath universe; satisfaction is the
    /// endpoint-difference check and every graph satisfies the empty goal,
    /// so the relation is total by construction.
    pub fn lts(universe: SpGraphSet) -> Self {
        GoalRelation {
            universe,
            backend: Backend::Lts,
        }
    }

    pub fn universe(&self) -> &SpGraphSet {
        &self.universe
    }

    /// The finite goal alphabet, when one exists (table backend).
    pub fn goal_alphabet(&self) -> Option<&BTreeSet<Goal>> {
        match &self.backend {
            Backend::Table { goals, .. } => Some(goals),
            Backend::Lts => None,
        }
    }

    /// Does attack `g` satisfy `goal`?
    pub fn sat(&self, g: &SpGraph, goal: &Goal) -> bool {
        match &self.backend {
            Backend::Table { sat, .. } => sat.get(g).map(|gs| gs.contains(goal)).unwrap_or(false),
            Backend::Lts => match goal {
                Goal::Symbol(_) => false,
                Goal::Delta(d) => match crate::kripke::cumulative_delta(g) {
                    Some(net) => d.removed.is_subset(&net.removed) && d.added.is_subset(&net.added),
                    // No delta reading: only the empty goal is achieved.
                    None => d.is_empty(),
                },
            },
        }
    }

    /// All universe attacks satisfying `goal`.
    pub fn attacks(&self, goal: &Goal) -> Result<SpGraphSet, GoalError> {
        if let Backend::Table { goals, .. } = &self.backend {
            if !goals.contains(goal) {
                return Err(GoalError::UnknownGoal(goal.to_string()));
            }
        } else if matches!(goal, Goal::Symbol(_)) {
            return Err(GoalError::UnknownGoal(goal.to_string()));
        }
        Ok(self
            .universe
            .iter()
            .filter(|g| self.sat(g, goal))
            .cloned()
            .collect())
    }

    /// Is there a goal satisfied by every graph in `s`?
    pub fn common_goal_exists(&self, s: &SpGraphSet) -> bool {
        match &self.backend {
            // The empty delta goal is satisfied by everything.
            Backend::Lts => true,
            Backend::Table { sat, .. } => {
                let mut iter = s.iter();
                let Some(first) = iter.next() else {
                    return false;
                };
                let Some(mut common) = sat.get(first).cloned() else {
                    return false;
                };
                for g in iter {
                    match sat.get(g) {
                        None => return false,
                        Some(gs) => common = common.intersection(gs).cloned().collect(),
                    }
                    if common.is_empty() {
                        return false;
                    }
                }
                true
            }
        }
    }

    /// All goals covering `s` whose attack set has minimal cardinality, in
    /// goal order. For the delta backend this is the closed-form label.
    pub(crate) fn optimal_label_candidates(&self, s: &SpGraphSet) -> Result<Vec<Goal>, GoalError> {
        if s.is_empty() {
            return Err(GoalError::NoCommonGoal);
        }
        match &self.backend {
            Backend::Table { goals, .. } => {
                let mut best: Vec<Goal> = Vec::new();
                let mut best_size: Option<usize> = None;
                for goal in goals {
                    let attacks = self.attacks(goal)?;
                    if !s.is_subset(&attacks) {
                        continue;
                    }
                    match best_size {
                        Some(size) if attacks.len() > size => {}
                        Some(size) if attacks.len() == size => best.push(goal.clone()),
                        _ => {
                            best_size = Some(attacks.len());
                            best = vec![goal.clone()];
                        }
                    }
                }
                if best.is_empty() {
                    return Err(GoalError::NoCommonGoal);
                }
                Ok(best)
            }
            Backend::Lts => {
                let delta = optimal_delta_label(s).ok_or(GoalError::MissingDelta)?;
                Ok(vec![Goal::Delta(delta)])
            }
        }
    }

    /// A goal `b` with `s ⊆ attacks(b)` and `|attacks(b)|` minimal, ties
    /// broken towards the smallest goal.
    pub fn find_optimal_label(&self, s: &SpGraphSet) -> Result<Goal, GoalError> {
        Ok(self.optimal_label_candidates(s)?.remove(0))
    }

    /// Check that every subtree's semantics is contained in the attacks of
    /// its root label; returns every violating (subtree, attack) pair.
    pub fn correctness_violations(&self, tree: &AttackTree) -> Vec<CorrectnessViolation> {
        let mut out = Vec::new();
        for sub in tree.subtrees() {
            let label = sub.top();
            for attack in sub.semantics() {
                if !self.sat(&attack, label) {
                    out.push(CorrectnessViolation {
                        subtree: sub.clone(),
                        attack,
                    });
                }
            }
        }
        out
    }

    pub fn is_correctly_labelled(&self, tree: &AttackTree) -> bool {
        self.correctness_violations(tree).is_empty()
    }

    /// Number of missed attacks of the root label: attacks the label
    /// announces that the tree does not cover.
    pub fn missed_attacks(&self, tree: &AttackTree) -> Result<usize, GoalError> {
        let attacks = self.attacks(tree.top())?;
        let sem = tree.semantics();
        Ok(attacks.difference(&sem).count())
    }

    /// Smallest attack-set cardinality among goals covering `s`.
    fn minimal_cover_size(&self, s: &SpGraphSet) -> Result<usize, GoalError> {
        let best = self.optimal_label_candidates(s)?;
        Ok(self.attacks(&best[0])?.len())
    }

    /// Check optimal labelling. Errors on incorrectly-labelled input; on
    /// success returns every refinement node whose label could be correctly
    /// replaced by one missing fewer attacks.
    pub fn optimality_violations(
        &self,
        tree: &AttackTree,
    ) -> Result<Vec<OptimalityViolation>, GoalError> {
        if !self.is_correctly_labelled(tree) {
            return Err(GoalError::NotCorrectlyLabelled);
        }
        let mut out = Vec::new();
        for sub in tree.subtrees() {
            // Leaves admit no relabelling with the same children, so
            // correctness is all that is required of them.
            if sub.op().is_none() {
                continue;
            }
            let sem = sub.semantics();
            let have = self.attacks(sub.top())?.len();
            let minimal = self.minimal_cover_size(&sem)?;
            if have > minimal {
                let better = self
                    .optimal_label_candidates(&sem)?
                    .into_iter()
                    .next()
                    .expect("minimal cover exists");
                out.push(OptimalityViolation {
                    subtree: sub.clone(),
                    better,
                });
            }
        }
        Ok(out)
    }

    pub fn is_optimally_labelled(&self, tree: &AttackTree) -> Result<bool, GoalError> {
        Ok(self.optimality_violations(tree)?.is_empty())
    }
}
