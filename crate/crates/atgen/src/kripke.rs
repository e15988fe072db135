//! Mixed Kripke structures: predicate-set states, guarded transition rules,
//! bounded breadth-first path enumeration to breach states, and the
//! transformation of paths into series-parallel attack graphs labelled with
//! state deltas.
//!
//! A transition `s --a--> s'` is condensed into the delta
//! `(s \ s', s' \ s)`: the properties the step removed from and added to the
//! system. Deltas double as SP-graph edge labels and as attack goals, which
//! is what makes the optimal-label search closed-form here (see
//! [`lts_optimal_label`]).

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::goals::GoalRelation;
use crate::sp::{EdgeLabel, SpGraph, SpGraphSet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KripkeError {
    #[error("empty path")]
    EmptyPath,
    #[error("no paths to build a goal relation from")]
    NoPaths,
    #[error("graph carries no endpoint states")]
    MissingEndpoints,
    #[error("rule `{rule}`: variable `{var}` is not declared")]
    UndeclaredVariable { rule: String, var: String },
    #[error("rule `{rule}`: sort `{sort}` of variable `{var}` is not declared")]
    UnknownSort {
        rule: String,
        var: String,
        sort: String,
    },
}

/// A ground predicate, e.g. `knows(alice, pa)`. Constants are plain symbols.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Predicate {
    pub name: String,
    pub args: Vec<String>,
}

impl Predicate {
    pub fn new(name: impl Into<String>, args: Vec<String>) -> Self {
        Predicate {
            name: name.into(),
            args,
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            write!(f, "{}", self.name)
        } else {
            write!(f, "{}({})", self.name, self.args.join(","))
        }
    }
}

/// A state is the set of properties that hold in it.
pub type State = BTreeSet<Predicate>;

/// The properties removed from and added to the system across a transition
/// or subpath. Also the goal language of the transition-system pipeline: a
/// graph achieves `(removed, added)` when it removes at least `removed` and
/// adds at least `added`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StepDelta {
    pub removed: BTreeSet<Predicate>,
    pub added: BTreeSet<Predicate>,
}

impl StepDelta {
    pub fn new(removed: BTreeSet<Predicate>, added: BTreeSet<Predicate>) -> Self {
        debug_assert!(removed.is_disjoint(&added));
        StepDelta { removed, added }
    }

    /// Delta between two adjacent states.
    pub fn between(from: &State, to: &State) -> Self {
        StepDelta {
            removed: from.difference(to).cloned().collect(),
            added: to.difference(from).cloned().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.removed.is_empty() && self.added.is_empty()
    }
}

fn fmt_predicate_set(f: &mut fmt::Formatter<'_>, set: &BTreeSet<Predicate>) -> fmt::Result {
    write!(f, "{{")?;
    for (i, p) in set.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{p}")?;
    }
    write!(f, "}}")
}

impl fmt::Display for StepDelta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(-")?;
        fmt_predicate_set(f, &self.removed)?;
        write!(f, " +")?;
        fmt_predicate_set(f, &self.added)?;
        write!(f, ")")
    }
}

/// Argument slot of a rule pattern: a sorted variable or a constant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum PatternArg {
    Var(String),
    Const(String),
}

/// A predicate pattern, possibly containing variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PredPattern {
    pub name: String,
    pub args: Vec<PatternArg>,
}

/// The action term labelling a transition, before instantiation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TermPattern {
    pub name: String,
    pub args: Vec<PatternArg>,
}

/// A ground action term, e.g. `login(mallory,server)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroundTerm {
    pub name: String,
    pub args: Vec<String>,
}

impl fmt::Display for GroundTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            write!(f, "{}", self.name)
        } else {
            write!(f, "{}({})", self.name, self.args.join(","))
        }
    }
}

/// A guarded transition rule. Premises must all be present in the current
/// state (variables are implicitly universally quantified over their sorts);
/// firing removes `removals` and adds `additions`.
#[derive(Debug, Clone)]
pub struct TransitionRule {
    pub name: String,
    /// variable -> sort name
    pub vars: BTreeMap<String, String>,
    pub premises: Vec<PredPattern>,
    pub action: TermPattern,
    pub additions: Vec<PredPattern>,
    pub removals: Vec<PredPattern>,
}

/// A transition system over predicate-set states with an initial state and a
/// breach condition describing the final (attacked) states.
#[derive(Debug, Clone)]
pub struct KripkeSystem {
    /// sort name -> constants
    pub sorts: BTreeMap<String, Vec<String>>,
    pub rules: Vec<TransitionRule>,
    pub initial: State,
    /// Predicate patterns that must all hold (under one consistent variable
    /// assignment) for a state to count as a breach.
    pub breach: Vec<PredPattern>,
}

/// One transition taken along a path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub action: GroundTerm,
    pub delta: StepDelta,
}

/// An alternating state/transition sequence ending at the first breach
/// state. `states.len() == steps.len() + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub states: Vec<State>,
    pub steps: Vec<Step>,
}

impl Path {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Action labels along the path, rendered.
    pub fn action_labels(&self) -> Vec<String> {
        self.steps.iter().map(|s| s.action.to_string()).collect()
    }
}

type Binding = BTreeMap<String, String>;

fn instantiate_arg(arg: &PatternArg, binding: &Binding) -> Option<String> {
    match arg {
        PatternArg::Const(c) => Some(c.clone()),
        PatternArg::Var(v) => binding.get(v).cloned(),
    }
}

fn instantiate_pred(pat: &PredPattern, binding: &Binding) -> Option<Predicate> {
    let args = pat
        .args
        .iter()
        .map(|a| instantiate_arg(a, binding))
        .collect::<Option<Vec<_>>>()?;
    Some(Predicate::new(pat.name.clone(), args))
}

/// Try to extend `binding` so that `pat` matches the ground predicate `p`.
/// `var_accepts` vetoes candidate values for freshly bound variables (sort
/// membership for rule premises, unconstrained for breach patterns).
fn unify_with_check(
    pat: &PredPattern,
    p: &Predicate,
    binding: &Binding,
    var_accepts: impl Fn(&str, &str) -> bool,
) -> Option<Binding> {
    if pat.name != p.name || pat.args.len() != p.args.len() {
        return None;
    }
    let mut next = binding.clone();
    for (a, c) in pat.args.iter().zip(&p.args) {
        match a {
            PatternArg::Const(k) => {
                if k != c {
                    return None;
                }
            }
            PatternArg::Var(v) => match next.get(v) {
                Some(bound) => {
                    if bound != c {
                        return None;
                    }
                }
                None => {
                    if !var_accepts(v, c) {
                        return None;
                    }
                    next.insert(v.clone(), c.clone());
                }
            },
        }
    }
    Some(next)
}

impl KripkeSystem {
    /// Check rule well-formedness: every variable used anywhere is declared
    /// with a known sort.
    pub fn validate(&self) -> Result<(), KripkeError> {
        for rule in &self.rules {
            for (var, sort) in &rule.vars {
                if !self.sorts.contains_key(sort) {
                    return Err(KripkeError::UnknownSort {
                        rule: rule.name.clone(),
                        var: var.clone(),
                        sort: sort.clone(),
                    });
                }
            }
            let check_args = |args: &[PatternArg]| -> Result<(), KripkeError> {
                for a in args {
                    if let PatternArg::Var(v) = a {
                        if !rule.vars.contains_key(v) {
                            return Err(KripkeError::UndeclaredVariable {
                                rule: rule.name.clone(),
                                var: v.clone(),
                            });
                        }
                    }
                }
                Ok(())
            };
            check_args(&rule.action.args)?;
            for pat in rule
                .premises
                .iter()
                .chain(&rule.additions)
                .chain(&rule.removals)
            {
                check_args(&pat.args)?;
            }
        }
        Ok(())
    }

    fn sort_members(&self, sort: &str) -> &[String] {
        self.sorts.get(sort).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// All variable bindings under which every premise of `rule` is present
    /// in `state`. Variables left unconstrained by the premises range over
    /// their whole sort.
    fn rule_bindings(&self, rule: &TransitionRule, state: &State) -> Vec<Binding> {
        let accepts = |v: &str, c: &str| -> bool {
            match rule.vars.get(v) {
                Some(sort) => self.sort_members(sort).iter().any(|m| m == c),
                None => false,
            }
        };
        let mut partial = vec![Binding::new()];
        for premise in &rule.premises {
            let mut next = Vec::new();
            for binding in &partial {
                for p in state {
                    if let Some(b) = unify_with_check(premise, p, binding, accepts) {
                        next.push(b);
                    }
                }
            }
            partial = next;
            if partial.is_empty() {
                return partial;
            }
        }
        // Enumerate variables the premises did not bind.
        let mut complete = partial;
        for (var, sort) in &rule.vars {
            let members = self.sort_members(sort);
            let mut next = Vec::new();
            for binding in &complete {
                if binding.contains_key(var) {
                    next.push(binding.clone());
                } else {
                    for c in members {
                        let mut b = binding.clone();
                        b.insert(var.clone(), c.clone());
                        next.push(b);
                    }
                }
            }
            complete = next;
        }
        complete
    }

    /// All enabled transitions from `state`: ground instantiations whose
    /// premises hold, excluding self-loops. Deterministically ordered by
    /// (action, successor state).
    pub fn apply_rules(&self, state: &State) -> Vec<(GroundTerm, State)> {
        let mut out: BTreeSet<(GroundTerm, State)> = BTreeSet::new();
        for rule in &self.rules {
            for binding in self.rule_bindings(rule, state) {
                let action_args = rule
                    .action
                    .args
                    .iter()
                    .map(|a| instantiate_arg(a, &binding))
                    .collect::<Option<Vec<_>>>();
                let Some(args) = action_args else { continue };
                let action = GroundTerm {
                    name: rule.action.name.clone(),
                    args,
                };
                let mut next = state.clone();
                for pat in &rule.removals {
                    if let Some(p) = instantiate_pred(pat, &binding) {
                        next.remove(&p);
                    }
                }
                for pat in &rule.additions {
                    if let Some(p) = instantiate_pred(pat, &binding) {
                        next.insert(p);
                    }
                }
                if next != *state {
                    out.insert((action, next));
                }
            }
        }
        out.into_iter().collect()
    }

    /// Does `state` satisfy the breach condition? Breach patterns are matched
    /// existentially under one consistent assignment.
    pub fn is_breach(&self, state: &State) -> bool {
        fn rec(patterns: &[PredPattern], state: &State, binding: &Binding) -> bool {
            match patterns.split_first() {
                None => true,
                Some((pat, rest)) => state.iter().any(|p| {
                    unify_with_check(pat, p, binding, |_, _| true)
                        .map(|b| rec(rest, state, &b))
                        .unwrap_or(false)
                }),
            }
        }
        rec(&self.breach, state, &Binding::new())
    }
}

/// Breadth-first enumeration of simple paths from the initial state to the
/// first breach state. Paths never revisit a state; exploration stops at
/// `max_depth` transitions and the result list is truncated at `max_paths`.
pub fn enumerate_paths(sys: &KripkeSystem, max_depth: usize, max_paths: usize) -> Vec<Path> {
    if max_paths == 0 {
        return Vec::new();
    }
    if sys.is_breach(&sys.initial) {
        return vec![Path {
            states: vec![sys.initial.clone()],
            steps: Vec::new(),
        }];
    }

    struct Node {
        states: Vec<State>,
        steps: Vec<Step>,
        visited: BTreeSet<State>,
    }

    let mut results = Vec::new();
    let mut frontier = VecDeque::new();
    frontier.push_back(Node {
        states: vec![sys.initial.clone()],
        steps: Vec::new(),
        visited: BTreeSet::from([sys.initial.clone()]),
    });

    while let Some(node) = frontier.pop_front() {
        if node.steps.len() >= max_depth {
            continue;
        }
        let current = node.states.last().expect("non-empty state list");
        for (action, next) in sys.apply_rules(current) {
            if node.visited.contains(&next) {
                continue;
            }
            let delta = StepDelta::between(current, &next);
            let mut states = node.states.clone();
            let mut steps = node.steps.clone();
            states.push(next.clone());
            steps.push(Step { action, delta });
            if sys.is_breach(&next) {
                results.push(Path { states, steps });
                if results.len() >= max_paths {
                    return results;
                }
            } else {
                let mut visited = node.visited.clone();
                visited.insert(next);
                frontier.push_back(Node {
                    states,
                    steps,
                    visited,
                });
            }
        }
    }
    results
}

/// Transform a path into the sequential composition of its step-delta simple
/// graphs, carrying the first and last state as endpoint metadata.
pub fn path_to_spgraph(path: &Path) -> Result<SpGraph, KripkeError> {
    subpath_graph(path, 0, path.steps.len())
}

/// The SP graph of the subpath spanning steps `i..j` (j exclusive, j > i).
pub fn subpath_graph(path: &Path, i: usize, j: usize) -> Result<SpGraph, KripkeError> {
    if i >= j || j > path.steps.len() {
        return Err(KripkeError::EmptyPath);
    }
    let leaves: Vec<SpGraph> = (i..j)
        .map(|k| {
            SpGraph::leaf_with_endpoints(
                EdgeLabel::Delta(path.steps[k].delta.clone()),
                path.states[k].clone(),
                path.states[k + 1].clone(),
            )
        })
        .collect();
    Ok(crate::sp::seq_compose(leaves).expect("non-empty by construction"))
}

/// Net delta of a graph: what an attacker running it removes from and adds
/// to the system. Computed from endpoint states when present, otherwise
/// reconstructed from the delta sequence of a purely sequential graph.
/// `None` when the graph has no delta reading (parallel composition or
/// symbolic labels).
pub fn cumulative_delta(g: &SpGraph) -> Option<StepDelta> {
    if let Some((start, end)) = g.endpoints() {
        return Some(StepDelta::between(start, end));
    }
    let deltas = delta_sequence(g)?;
    #[derive(Clone, Copy, PartialEq)]
    enum Op {
        Add,
        Remove,
    }
    let mut first: BTreeMap<&Predicate, Op> = BTreeMap::new();
    let mut last: BTreeMap<&Predicate, Op> = BTreeMap::new();
    for d in &deltas {
        for p in &d.removed {
            first.entry(p).or_insert(Op::Remove);
            last.insert(p, Op::Remove);
        }
        for p in &d.added {
            first.entry(p).or_insert(Op::Add);
            last.insert(p, Op::Add);
        }
    }
    let mut removed = BTreeSet::new();
    let mut added = BTreeSet::new();
    for (p, f) in &first {
        if *f == last[p] {
            match f {
                Op::Remove => removed.insert((*p).clone()),
                Op::Add => added.insert((*p).clone()),
            };
        }
    }
    Some(StepDelta { removed, added })
}

fn delta_sequence(g: &SpGraph) -> Option<Vec<StepDelta>> {
    fn leaf_delta(g: &SpGraph) -> Option<StepDelta> {
        match g.label()? {
            EdgeLabel::Delta(d) => Some(d.clone()),
            EdgeLabel::Symbol(_) => None,
        }
    }
    if g.is_simple() {
        return Some(vec![leaf_delta(g)?]);
    }
    let (kind, factors) = g.decompose();
    if kind != crate::sp::GraphKind::Sequential {
        return None;
    }
    factors.iter().map(leaf_delta).collect()
}

/// Does a graph carrying endpoint states `(s_i, s_j)` achieve the goal
/// `(P-, P+)`? Both `P- ⊆ s_i \ s_j` and `P+ ⊆ s_j \ s_i` must hold.
pub fn lts_satisfies(g: &SpGraph, goal: &StepDelta) -> Result<bool, KripkeError> {
    let (start, end) = g.endpoints().ok_or(KripkeError::MissingEndpoints)?;
    let net = StepDelta::between(start, end);
    Ok(goal.removed.is_subset(&net.removed) && goal.added.is_subset(&net.added))
}

/// Closed-form optimal label for a set of endpoint-carrying graphs: the
/// pairwise intersection of their endpoint-state differences. No goal
/// enumeration is needed.
pub fn lts_optimal_label(graphs: &SpGraphSet) -> Result<StepDelta, KripkeError> {
    if graphs.iter().any(|g| g.endpoints().is_none()) {
        return Err(KripkeError::MissingEndpoints);
    }
    optimal_delta_label(graphs).ok_or(KripkeError::MissingEndpoints)
}

/// As [`lts_optimal_label`] but accepts endpoint-less sequential delta
/// graphs via their reconstructed net delta.
pub(crate) fn optimal_delta_label(graphs: &SpGraphSet) -> Option<StepDelta> {
    let mut acc: Option<StepDelta> = None;
    for g in graphs {
        let net = cumulative_delta(g)?;
        acc = Some(match acc {
            None => net,
            Some(prev) => StepDelta {
                removed: prev.removed.intersection(&net.removed).cloned().collect(),
                added: prev.added.intersection(&net.added).cloned().collect(),
            },
        });
    }
    acc
}

/// Package the delta goal relation for a set of enumerated paths: the attack
/// universe is every contiguous subpath's graph, satisfaction is the
/// endpoint-difference check, and optimal labels come from
/// [`lts_optimal_label`]'s closed form.
pub fn lts_goal_relation(paths: &[Path]) -> Result<GoalRelation, KripkeError> {
    if paths.is_empty() {
        return Err(KripkeError::NoPaths);
    }
    let mut universe = SpGraphSet::new();
    for path in paths {
        let n = path.steps.len();
        for i in 0..n {
            for j in (i + 1)..=n {
                universe.insert(subpath_graph(path, i, j)?);
            }
        }
    }
    Ok(GoalRelation::lts(universe))
}

/// The full-path attack set of a path list, deduplicated semantically.
pub fn path_attacks(paths: &[Path]) -> Result<SpGraphSet, KripkeError> {
    paths.iter().map(path_to_spgraph).collect()
}
