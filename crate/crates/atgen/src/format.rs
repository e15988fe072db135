//! JSON wire formats for graphs, trees, goals, goal-relation files,
//! transition-system specs, and paths.
//!
//! Shapes:
//!
//! - predicate: `{"p": "knows", "args": ["alice", "pa"]}` (`args` may be
//!   omitted when empty); pattern arguments prefix variables with `?`.
//! - delta / delta goal: `{"removed": [predicate...], "added": [...]}`.
//! - edge label / goal: a bare string or a delta object.
//! - SP graph: `{"leaf": label}`, `{"seq": [graph...]}`, `{"par": [...]}`,
//!   each optionally with `"endpoints": [state, state]` where a state is an
//!   array of predicates.
//! - tree: `{"label": goal}` for leaves, `{"label": goal, "op":
//!   "OR"|"AND"|"SAND", "children": [...]}` otherwise.
//! - goal-relation file: `{"goals": [goal...], "universe": [graph...],
//!   "sat": [[universe-index, goal], ...]}`.
//! - attacks file: a bare array of graphs.
//! - system spec: `{"sorts": {...}, "initial": [...], "rules": [...],
//!   "breach": [...]}` with rules `{"name", "vars": {var: sort},
//!   "premises": [...], "action": "name(?u,?sv)", "add": [...],
//!   "remove": [...]}`.
//! - path: `{"states": [state...], "steps": [{"action": "login(m,sv)",
//!   "delta": {...}}...]}`; a paths file is a bare array of paths.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::goals::{Goal, GoalRelation};
use crate::kripke::{
    GroundTerm, KripkeSystem, Path, PatternArg, PredPattern, Predicate, State, Step, StepDelta,
    TermPattern, TransitionRule,
};
use crate::sp::{par_compose, seq_compose, EdgeLabel, SpGraph, SpGraphSet};
use crate::tree::{AttackTree, TreeOp};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{context}: {message}")]
    Shape {
        context: &'static str,
        message: String,
    },
    #[error("{0}")]
    Relation(#[from] crate::goals::GoalError),
    #[error("{0}")]
    System(#[from] crate::kripke::KripkeError),
}

fn shape(context: &'static str, message: impl Into<String>) -> FormatError {
    FormatError::Shape {
        context,
        message: message.into(),
    }
}

fn as_array<'v>(v: &'v Value, context: &'static str) -> Result<&'v Vec<Value>, FormatError> {
    v.as_array()
        .ok_or_else(|| shape(context, "expected an array"))
}

fn as_object<'v>(
    v: &'v Value,
    context: &'static str,
) -> Result<&'v Map<String, Value>, FormatError> {
    v.as_object()
        .ok_or_else(|| shape(context, "expected an object"))
}

fn as_str<'v>(v: &'v Value, context: &'static str) -> Result<&'v str, FormatError> {
    v.as_str()
        .ok_or_else(|| shape(context, "expected a string"))
}

// ---------------------------------------------------------------- predicates

pub fn predicate_to_value(p: &Predicate) -> Value {
    json!({"p": p.name, "args": p.args})
}

pub fn predicate_from_value(v: &Value) -> Result<Predicate, FormatError> {
    let obj = as_object(v, "predicate")?;
    let name = as_str(
        obj.get("p")
            .ok_or_else(|| shape("predicate", "missing `p`"))?,
        "predicate",
    )?;
    let args = match obj.get("args") {
        None => Vec::new(),
        Some(a) => as_array(a, "predicate args")?
            .iter()
            .map(|x| as_str(x, "predicate argument").map(str::to_owned))
            .collect::<Result<Vec<_>, _>>()?,
    };
    if args.iter().any(|a| a.starts_with('?')) {
        return Err(shape("predicate", "ground predicate contains a variable"));
    }
    Ok(Predicate::new(name, args))
}

fn pattern_from_value(v: &Value) -> Result<PredPattern, FormatError> {
    let obj = as_object(v, "predicate pattern")?;
    let name = as_str(
        obj.get("p")
            .ok_or_else(|| shape("predicate pattern", "missing `p`"))?,
        "predicate pattern",
    )?;
    let args = match obj.get("args") {
        None => Vec::new(),
        Some(a) => as_array(a, "pattern args")?
            .iter()
            .map(|x| as_str(x, "pattern argument").map(parse_arg))
            .collect::<Result<Vec<_>, _>>()?,
    };
    Ok(PredPattern {
        name: name.to_owned(),
        args,
    })
}

fn parse_arg(s: &str) -> PatternArg {
    match s.strip_prefix('?') {
        Some(var) => PatternArg::Var(var.to_owned()),
        None => PatternArg::Const(s.to_owned()),
    }
}

pub fn state_to_value(s: &State) -> Value {
    Value::Array(s.iter().map(predicate_to_value).collect())
}

pub fn state_from_value(v: &Value) -> Result<State, FormatError> {
    as_array(v, "state")?
        .iter()
        .map(predicate_from_value)
        .collect()
}

pub fn delta_to_value(d: &StepDelta) -> Value {
    json!({
        "removed": d.removed.iter().map(predicate_to_value).collect::<Vec<_>>(),
        "added": d.added.iter().map(predicate_to_value).collect::<Vec<_>>(),
    })
}

pub fn delta_from_value(v: &Value) -> Result<StepDelta, FormatError> {
    let obj = as_object(v, "delta")?;
    let read = |key: &str| -> Result<BTreeSet<Predicate>, FormatError> {
        match obj.get(key) {
            None => Ok(BTreeSet::new()),
            Some(a) => as_array(a, "delta set")?
                .iter()
                .map(predicate_from_value)
                .collect(),
        }
    };
    let removed = read("removed")?;
    let added = read("added")?;
    if !removed.is_disjoint(&added) {
        return Err(shape("delta", "removed and added sets overlap"));
    }
    Ok(StepDelta::new(removed, added))
}

// -------------------------------------------------------------------- labels

pub fn label_to_value(l: &EdgeLabel) -> Value {
    match l {
        EdgeLabel::Symbol(s) => Value::String(s.clone()),
        EdgeLabel::Delta(d) => delta_to_value(d),
    }
}

pub fn label_from_value(v: &Value) -> Result<EdgeLabel, FormatError> {
    match v {
        Value::String(s) => Ok(EdgeLabel::Symbol(s.clone())),
        Value::Object(_) => Ok(EdgeLabel::Delta(delta_from_value(v)?)),
        _ => Err(shape("label", "expected a string or a delta object")),
    }
}

pub fn goal_to_value(g: &Goal) -> Value {
    match g {
        Goal::Symbol(s) => Value::String(s.clone()),
        Goal::Delta(d) => delta_to_value(d),
    }
}

pub fn goal_from_value(v: &Value) -> Result<Goal, FormatError> {
    match v {
        Value::String(s) => Ok(Goal::Symbol(s.clone())),
        Value::Object(_) => Ok(Goal::Delta(delta_from_value(v)?)),
        _ => Err(shape("goal", "expected a string or a delta object")),
    }
}

// -------------------------------------------------------------------- graphs

pub fn graph_to_value(g: &SpGraph) -> Value {
    let mut obj = Map::new();
    match g.kind() {
        crate::sp::GraphKind::Simple => {
            obj.insert(
                "leaf".into(),
                label_to_value(g.label().expect("simple graph")),
            );
        }
        crate::sp::GraphKind::Sequential => {
            let (_, children) = g.decompose();
            obj.insert(
                "seq".into(),
                Value::Array(children.iter().map(graph_to_value).collect()),
            );
        }
        crate::sp::GraphKind::Parallel => {
            let (_, children) = g.decompose();
            obj.insert(
                "par".into(),
                Value::Array(children.iter().map(graph_to_value).collect()),
            );
        }
    }
    if let Some((start, end)) = g.endpoints() {
        obj.insert(
            "endpoints".into(),
            Value::Array(vec![state_to_value(start), state_to_value(end)]),
        );
    }
    Value::Object(obj)
}

pub fn graph_from_value(v: &Value) -> Result<SpGraph, FormatError> {
    let obj = as_object(v, "graph")?;
    let endpoints = match obj.get("endpoints") {
        None => None,
        Some(e) => {
            let arr = as_array(e, "endpoints")?;
            if arr.len() != 2 {
                return Err(shape("endpoints", "expected exactly two states"));
            }
            Some((state_from_value(&arr[0])?, state_from_value(&arr[1])?))
        }
    };
    let graph = if let Some(l) = obj.get("leaf") {
        let label = label_from_value(l)?;
        match endpoints {
            Some((s, e)) => return Ok(SpGraph::leaf_with_endpoints(label, s, e)),
            None => SpGraph::leaf(label),
        }
    } else if let Some(children) = obj.get("seq") {
        let children = as_array(children, "seq children")?
            .iter()
            .map(graph_from_value)
            .collect::<Result<Vec<_>, _>>()?;
        seq_compose(children).map_err(|e| shape("seq", e.to_string()))?
    } else if let Some(children) = obj.get("par") {
        let children = as_array(children, "par children")?
            .iter()
            .map(graph_from_value)
            .collect::<Result<Vec<_>, _>>()?;
        par_compose(children).map_err(|e| shape("par", e.to_string()))?
    } else {
        return Err(shape("graph", "expected one of `leaf`, `seq`, `par`"));
    };
    // Composition derives endpoints from the children; an explicit
    // annotation on a composite is informative only and must agree when the
    // children carry none.
    Ok(graph)
}

pub fn attacks_to_value(s: &SpGraphSet) -> Value {
    Value::Array(s.iter().map(graph_to_value).collect())
}

pub fn attacks_from_value(v: &Value) -> Result<SpGraphSet, FormatError> {
    as_array(v, "attacks")?
        .iter()
        .map(graph_from_value)
        .collect()
}

// --------------------------------------------------------------------- trees

pub fn tree_to_value(t: &AttackTree) -> Value {
    match t {
        AttackTree::Leaf { label } => json!({"label": goal_to_value(label)}),
        AttackTree::Node {
            label,
            op,
            children,
        } => json!({
            "label": goal_to_value(label),
            "op": op.to_string(),
            "children": children.iter().map(tree_to_value).collect::<Vec<_>>(),
        }),
    }
}

pub fn tree_from_value(v: &Value) -> Result<AttackTree, FormatError> {
    let obj = as_object(v, "tree")?;
    let label = goal_from_value(
        obj.get("label")
            .ok_or_else(|| shape("tree", "missing `label`"))?,
    )?;
    match obj.get("op") {
        None => Ok(AttackTree::leaf(label)),
        Some(op) => {
            let op = match as_str(op, "tree op")? {
                "OR" => TreeOp::Or,
                "AND" => TreeOp::And,
                "SAND" => TreeOp::Sand,
                other => return Err(shape("tree op", format!("unknown operator `{other}`"))),
            };
            let children = obj
                .get("children")
                .ok_or_else(|| shape("tree", "missing `children`"))
                .and_then(|c| as_array(c, "tree children"))?
                .iter()
                .map(tree_from_value)
                .collect::<Result<Vec<_>, _>>()?;
            if children.is_empty() {
                return Err(shape("tree", "refinement node with no children"));
            }
            Ok(AttackTree::node(label, op, children))
        }
    }
}

// ----------------------------------------------------------- relation files

pub fn relation_from_value(v: &Value) -> Result<GoalRelation, FormatError> {
    let obj = as_object(v, "goal relation")?;
    let goals: BTreeSet<Goal> = obj
        .get("goals")
        .ok_or_else(|| shape("goal relation", "missing `goals`"))
        .and_then(|g| as_array(g, "goals"))?
        .iter()
        .map(goal_from_value)
        .collect::<Result<_, _>>()?;
    let universe_values = obj
        .get("universe")
        .ok_or_else(|| shape("goal relation", "missing `universe`"))
        .and_then(|u| as_array(u, "universe"))?;
    let listed: Vec<SpGraph> = universe_values
        .iter()
        .map(graph_from_value)
        .collect::<Result<_, _>>()?;
    let universe: SpGraphSet = listed.iter().cloned().collect();
    let pairs = obj
        .get("sat")
        .ok_or_else(|| shape("goal relation", "missing `sat`"))
        .and_then(|s| as_array(s, "sat"))?
        .iter()
        .map(|pair| -> Result<(usize, Goal), FormatError> {
            let arr = as_array(pair, "sat pair")?;
            if arr.len() != 2 {
                return Err(shape("sat pair", "expected [graph-index, goal]"));
            }
            let file_idx = arr[0]
                .as_u64()
                .ok_or_else(|| shape("sat pair", "expected a graph index"))?
                as usize;
            let graph = listed
                .get(file_idx)
                .ok_or(crate::goals::GoalError::BadGraphIndex(file_idx))?;
            let canonical_idx = universe
                .iter()
                .position(|g| g == graph)
                .expect("graph is in the universe");
            Ok((canonical_idx, goal_from_value(&arr[1])?))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GoalRelation::table(universe, goals, pairs)?)
}

// -------------------------------------------------------------------- terms

fn term_args(s: &str, context: &'static str) -> Result<(String, Vec<String>), FormatError> {
    let s = s.trim();
    match s.split_once('(') {
        None => Ok((s.to_owned(), Vec::new())),
        Some((name, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| shape(context, format!("unterminated term `{s}`")))?;
            let args = if inner.trim().is_empty() {
                Vec::new()
            } else {
                inner.split(',').map(|a| a.trim().to_owned()).collect()
            };
            Ok((name.trim().to_owned(), args))
        }
    }
}

pub fn term_pattern_from_str(s: &str) -> Result<TermPattern, FormatError> {
    let (name, args) = term_args(s, "action pattern")?;
    Ok(TermPattern {
        name,
        args: args.iter().map(|a| parse_arg(a)).collect(),
    })
}

pub fn ground_term_from_str(s: &str) -> Result<GroundTerm, FormatError> {
    let (name, args) = term_args(s, "action")?;
    if args.iter().any(|a| a.starts_with('?')) {
        return Err(shape("action", "ground action contains a variable"));
    }
    Ok(GroundTerm { name, args })
}

// ------------------------------------------------------------- system specs

pub fn system_from_value(v: &Value) -> Result<KripkeSystem, FormatError> {
    let obj = as_object(v, "system")?;
    let sorts: BTreeMap<String, Vec<String>> = as_object(
        obj.get("sorts")
            .ok_or_else(|| shape("system", "missing `sorts`"))?,
        "sorts",
    )?
    .iter()
    .map(
        |(name, members)| -> Result<(String, Vec<String>), FormatError> {
            let members = as_array(members, "sort members")?
                .iter()
                .map(|m| as_str(m, "sort member").map(str::to_owned))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((name.clone(), members))
        },
    )
    .collect::<Result<_, _>>()?;

    let initial: State = obj
        .get("initial")
        .ok_or_else(|| shape("system", "missing `initial`"))
        .and_then(state_from_value)?;

    let patterns = |v: Option<&Value>| -> Result<Vec<PredPattern>, FormatError> {
        match v {
            None => Ok(Vec::new()),
            Some(v) => as_array(v, "pattern list")?
                .iter()
                .map(pattern_from_value)
                .collect(),
        }
    };

    let rules = obj
        .get("rules")
        .ok_or_else(|| shape("system", "missing `rules`"))
        .and_then(|r| as_array(r, "rules"))?
        .iter()
        .map(|r| -> Result<TransitionRule, FormatError> {
            let r = as_object(r, "rule")?;
            let name = as_str(
                r.get("name")
                    .ok_or_else(|| shape("rule", "missing `name`"))?,
                "rule name",
            )?;
            let vars: BTreeMap<String, String> = match r.get("vars") {
                None => BTreeMap::new(),
                Some(v) => as_object(v, "rule vars")?
                    .iter()
                    .map(|(var, sort)| {
                        as_str(sort, "variable sort").map(|s| (var.clone(), s.to_owned()))
                    })
                    .collect::<Result<_, _>>()?,
            };
            let action = term_pattern_from_str(as_str(
                r.get("action")
                    .ok_or_else(|| shape("rule", "missing `action`"))?,
                "rule action",
            )?)?;
            Ok(TransitionRule {
                name: name.to_owned(),
                vars,
                premises: patterns(r.get("premises"))?,
                action,
                additions: patterns(r.get("add"))?,
                removals: patterns(r.get("remove"))?,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let breach = patterns(Some(
        obj.get("breach")
            .ok_or_else(|| shape("system", "missing `breach`"))?,
    ))?;

    let sys = KripkeSystem {
        sorts,
        rules,
        initial,
        breach,
    };
    sys.validate()?;
    Ok(sys)
}

pub fn parse_system(text: &str) -> Result<KripkeSystem, FormatError> {
    system_from_value(&serde_json::from_str(text)?)
}

// --------------------------------------------------------------------- paths

pub fn path_to_value(p: &Path) -> Value {
    json!({
        "states": p.states.iter().map(state_to_value).collect::<Vec<_>>(),
        "steps": p
            .steps
            .iter()
            .map(|s| json!({"action": s.action.to_string(), "delta": delta_to_value(&s.delta)}))
            .collect::<Vec<_>>(),
    })
}

pub fn path_from_value(v: &Value) -> Result<Path, FormatError> {
    let obj = as_object(v, "path")?;
    let states: Vec<State> = obj
        .get("states")
        .ok_or_else(|| shape("path", "missing `states`"))
        .and_then(|s| as_array(s, "path states"))?
        .iter()
        .map(state_from_value)
        .collect::<Result<_, _>>()?;
    let steps: Vec<Step> = obj
        .get("steps")
        .ok_or_else(|| shape("path", "missing `steps`"))
        .and_then(|s| as_array(s, "path steps"))?
        .iter()
        .map(|s| -> Result<Step, FormatError> {
            let s = as_object(s, "path step")?;
            let action = ground_term_from_str(as_str(
                s.get("action")
                    .ok_or_else(|| shape("path step", "missing `action`"))?,
                "path step action",
            )?)?;
            let delta = delta_from_value(
                s.get("delta")
                    .ok_or_else(|| shape("path step", "missing `delta`"))?,
            )?;
            Ok(Step { action, delta })
        })
        .collect::<Result<_, _>>()?;
    if states.len() != steps.len() + 1 {
        return Err(shape("path", "expected one more state than steps"));
    }
    for (i, step) in steps.iter().enumerate() {
        if step.delta != StepDelta::between(&states[i], &states[i + 1]) {
            return Err(shape(
                "path",
                format!("step {i} delta disagrees with adjacent states"),
            ));
        }
    }
    Ok(Path { states, steps })
}

pub fn paths_to_value(paths: &[Path]) -> Value {
    Value::Array(paths.iter().map(path_to_value).collect())
}

pub fn paths_from_value(v: &Value) -> Result<Vec<Path>, FormatError> {
    as_array(v, "paths")?.iter().map(path_from_value).collect()
}

/// Pretty-printed JSON with a trailing newline; key order is deterministic.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable value");
    s.push('\n');
    s
}

// --------------------------------------------------------- expression texts

/// Parse the factor-verb expression grammar: sums of products of atoms with
/// parentheses, e.g. `a.a.a + b.(a + c)`.
pub fn parse_expression(text: &str) -> Result<ExprAst, FormatError> {
    let mut parser = ExprParser {
        text: text.as_bytes(),
        pos: 0,
    };
    let ast = parser.sum()?;
    parser.skip_ws();
    if parser.pos != parser.text.len() {
        return Err(shape(
            "expression",
            format!("trailing input at byte {}", parser.pos),
        ));
    }
    Ok(ast)
}

/// Expression syntax tree for the factor verb.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprAst {
    Atom(String),
    Product(Vec<ExprAst>),
    Sum(Vec<ExprAst>),
}

impl ExprAst {
    /// Normalize to sum-of-products form over string atoms.
    pub fn to_sop(
        &self,
        mode: crate::factor::Mode,
    ) -> Result<crate::factor::SopExpr<String>, FormatError> {
        fn cubes(ast: &ExprAst) -> Vec<Vec<String>> {
            match ast {
                ExprAst::Atom(a) => vec![vec![a.clone()]],
                ExprAst::Sum(parts) => parts.iter().flat_map(cubes).collect(),
                ExprAst::Product(parts) => {
                    let mut acc: Vec<Vec<String>> = vec![Vec::new()];
                    for part in parts {
                        let rhs = cubes(part);
                        let mut next = Vec::new();
                        for a in &acc {
                            for b in &rhs {
                                let mut cube = a.clone();
                                cube.extend(b.iter().cloned());
                                next.push(cube);
                            }
                        }
                        acc = next;
                    }
                    acc
                }
            }
        }
        crate::factor::SopExpr::new(mode, cubes(self))
            .map_err(|e| shape("expression", e.to_string()))
    }
}

struct ExprParser<'t> {
    text: &'t [u8],
    pos: usize,
}

impl ExprParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<ExprAst, FormatError> {
        let mut parts = vec![self.product()?];
        while self.peek() == Some(b'+') {
            self.pos += 1;
            parts.push(self.product()?);
        }
        Ok(if parts.len() == 1 {
            parts.remove(0)
        } else {
            ExprAst::Sum(parts)
        })
    }

    fn product(&mut self) -> Result<ExprAst, FormatError> {
        let mut parts = vec![self.factor()?];
        while self.peek() == Some(b'.') {
            self.pos += 1;
            parts.push(self.factor()?);
        }
        Ok(if parts.len() == 1 {
            parts.remove(0)
        } else {
            ExprAst::Product(parts)
        })
    }

    fn factor(&mut self) -> Result<ExprAst, FormatError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(shape("expression", "expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_alphanumeric() || c == b'_' || c == b'-' => {
                let start = self.pos;
                while self
                    .text
                    .get(self.pos)
                    .map(|c| c.is_ascii_alphanumeric() || *c == b'_' || *c == b'-')
                    .unwrap_or(false)
                {
                    self.pos += 1;
                }
                Ok(ExprAst::Atom(
                    String::from_utf8(self.text[start..self.pos].to_vec())
                        .expect("ascii atom name"),
                ))
            }
            other => Err(shape(
                "expression",
                format!("expected an atom or `(`, found {:?}", other.map(char::from)),
            )),
        }
    }
}
