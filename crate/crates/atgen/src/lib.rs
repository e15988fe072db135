//! Synthesis of SAND attack trees from sets of attacks expressed as
//! series-parallel graphs, together with a guarded-rule transition-system
//! front end that produces those attacks by bounded path enumeration.
//!
//! The pipeline, end to end:
//!
//! 1. [`kripke`] — predicate-state transition systems, breadth-first path
//!    enumeration to breach states, and the path → SP-graph transformation
//!    with state-delta edge labels.
//! 2. [`sp`] — the series-parallel graph algebra: sequential/parallel
//!    composition, maximal decomposition, homogeneity.
//! 3. [`goals`] — goal relations between attacks and labels, label
//!    correctness/optimality checking, optimal-label search.
//! 4. [`factor`] — sum-of-products expressions over an idempotent semiring
//!    without multiplicative identity, and the greedy factorisation
//!    heuristic that drives tree minimisation.
//! 5. [`synth`] — the generation algorithms: homogeneous partitioning,
//!    factorisation of homogeneous attack sets into AND/SAND refinements,
//!    and single-graph tree construction.
//! 6. [`tree`] — the SAND attack-tree term language and its SP semantics.
//!
//! [`format`] holds the JSON wire formats, [`render`] the DOT/text tree
//! renderers, and [`cli`] the `atgen` command-line surface.

pub mod cli;
pub mod factor;
pub mod format;
pub mod goals;
pub mod kripke;
pub mod render;
pub mod sp;
pub mod synth;
pub mod tree;

pub use goals::{Goal, GoalRelation};
pub use kripke::{KripkeSystem, Path, Predicate, State, StepDelta};
pub use sp::{EdgeLabel, SpGraph, SpGraphSet};
pub use tree::{AttackTree, TreeOp};
