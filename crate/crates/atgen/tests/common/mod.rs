//! Shared fixtures and instance generators for the integration suites.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use atgen::goals::{Goal, GoalRelation};
use atgen::kripke::{
    enumerate_paths, KripkeSystem, Path, PredPattern, Predicate, State, StepDelta, TermPattern,
    TransitionRule,
};
use atgen::sp::{self, par_compose, seq_compose, EdgeLabel, GraphKind, SpGraph, SpGraphSet};
use atgen::tree::{AttackTree, TreeOp};

pub fn fixture_path(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn graph(s: &str) -> SpGraph {
    SpGraph::symbol(s)
}

pub fn chain(labels: &[&str]) -> SpGraph {
    seq_compose(labels.iter().map(|l| graph(l)).collect()).unwrap()
}

pub fn goal(s: &str) -> Goal {
    Goal::symbol(s)
}

pub fn set(gs: &[SpGraph]) -> SpGraphSet {
    gs.iter().cloned().collect()
}

/// The worked server-access relation over nine graphs and eight goals.
pub fn fig1_relation() -> GoalRelation {
    let universe: Vec<SpGraph> = vec![
        graph("w"),
        graph("ec"),
        graph("l"),
        graph("b"),
        graph("x"),
        chain(&["w", "ec"]),
        chain(&["w", "ec", "l"]),
        chain(&["b", "l"]),
        chain(&["x", "l"]),
    ];
    let ordered: SpGraphSet = universe.iter().cloned().collect();
    let index = |target: &SpGraph| ordered.iter().position(|h| h == target).unwrap();
    let goals: BTreeSet<Goal> = ["w", "ec", "l", "b", "x", "eu", "c", "access"]
        .map(goal)
        .into_iter()
        .collect();
    let mut pairs = Vec::new();
    for s in ["w", "ec", "l", "b", "x"] {
        pairs.push((index(&graph(s)), goal(s)));
    }
    pairs.push((index(&chain(&["w", "ec"])), goal("eu")));
    pairs.push((index(&chain(&["w", "ec"])), goal("c")));
    pairs.push((index(&graph("b")), goal("c")));
    pairs.push((index(&graph("x")), goal("c")));
    pairs.push((index(&chain(&["w", "ec", "l"])), goal("access")));
    pairs.push((index(&chain(&["b", "l"])), goal("access")));
    pairs.push((index(&chain(&["x", "l"])), goal("access")));
    GoalRelation::table(ordered, goals, pairs).unwrap()
}

pub fn fig1_attacks() -> SpGraphSet {
    set(&[
        chain(&["w", "ec", "l"]),
        chain(&["b", "l"]),
        chain(&["x", "l"]),
    ])
}

pub fn fig1_tree() -> AttackTree {
    let leaf = |s: &str| AttackTree::leaf(goal(s));
    AttackTree::node(
        goal("access"),
        TreeOp::Sand,
        vec![
            AttackTree::node(
                goal("c"),
                TreeOp::Or,
                vec![
                    AttackTree::node(goal("eu"), TreeOp::Sand, vec![leaf("w"), leaf("ec")]),
                    leaf("b"),
                    leaf("x"),
                ],
            ),
            leaf("l"),
        ],
    )
}

pub fn network_system() -> KripkeSystem {
    let text = std::fs::read_to_string(fixture_path("network.json")).unwrap();
    atgen::format::parse_system(&text).unwrap()
}

/// Select the three walked-through network paths out of an enumeration.
pub fn paper_paths(paths: &[Path]) -> Option<Vec<Path>> {
    let wanted = [
        vec!["exploit(mallory,server)", "login(mallory,server)"],
        vec!["bruteforce(mallory,server)", "login(mallory,server)"],
        vec![
            "login(alice,server)",
            "eavesdrop(mallory,alice,server,pa)",
            "login(mallory,server)",
        ],
    ];
    wanted
        .iter()
        .map(|actions| {
            paths
                .iter()
                .find(|p| &p.action_labels() == actions)
                .cloned()
        })
        .collect()
}

pub fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0xA77A_C000 ^ salt)
}

// ------------------------------------------------- generic random instances

const ATOM_NAMES: [&str; 4] = ["a", "b", "c", "d"];

/// Random SP graph with at most `atoms` leaf edges.
pub fn random_graph(rng: &mut ChaCha8Rng, atoms: usize) -> SpGraph {
    if atoms <= 1 || rng.gen_bool(0.3) {
        return graph(ATOM_NAMES[rng.gen_range(0..ATOM_NAMES.len())]);
    }
    let parts = rng.gen_range(2..=atoms.min(4));
    let mut budgets = vec![1usize; parts];
    let mut spare = atoms - parts;
    while spare > 0 {
        let i = rng.gen_range(0..parts);
        budgets[i] += 1;
        spare -= 1;
    }
    let children: Vec<SpGraph> = budgets.iter().map(|b| random_graph(rng, *b)).collect();
    if rng.gen_bool(0.5) {
        seq_compose(children).unwrap()
    } else {
        par_compose(children).unwrap()
    }
}

/// Every graph the generation pipeline may ask a goal for: the graph itself,
/// all contiguous sequential sub-compositions or parallel sub-multisets, and
/// the closures of the factors.
pub fn closure(g: &SpGraph, out: &mut SpGraphSet) {
    out.insert(g.clone());
    let (kind, factors) = g.decompose();
    match kind {
        GraphKind::Simple => {}
        GraphKind::Sequential => {
            for i in 0..factors.len() {
                for j in (i + 1)..=factors.len() {
                    out.insert(seq_compose(factors[i..j].to_vec()).unwrap());
                }
            }
            for f in &factors {
                closure(f, out);
            }
        }
        GraphKind::Parallel => {
            for mask in 1u32..(1 << factors.len()) {
                let sub: Vec<SpGraph> = factors
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, f)| f.clone())
                    .collect();
                out.insert(par_compose(sub).unwrap());
            }
            for f in &factors {
                closure(f, out);
            }
        }
    }
}

pub struct GenericInstance {
    pub relation: GoalRelation,
    pub attacks: SpGraphSet,
}

/// Random (relation, attack set) with at most five graphs of at most four
/// atoms and at most eight goals: identity goals for the simple closure
/// graphs, a top goal covering the whole universe (so every set shares a
/// goal), and a few random composite goals that never alias a single simple
/// graph.
pub fn random_generic_instance(rng: &mut ChaCha8Rng) -> GenericInstance {
    let count = rng.gen_range(1..=5);
    let mut attacks = SpGraphSet::new();
    while attacks.len() < count {
        attacks.insert(random_graph(rng, 4));
    }
    let mut universe = SpGraphSet::new();
    for g in &attacks {
        closure(g, &mut universe);
    }

    let mut goals: BTreeSet<Goal> = BTreeSet::new();
    let mut pairs: Vec<(usize, Goal)> = Vec::new();
    let indexed: Vec<SpGraph> = universe.iter().cloned().collect();
    let index = |target: &SpGraph| {
        indexed
            .iter()
            .position(|h| h == target)
            .expect("closure member")
    };

    for g in &indexed {
        if let Some(EdgeLabel::Symbol(s)) = g.label() {
            goals.insert(goal(s));
            pairs.push((index(g), goal(s)));
        }
    }
    goals.insert(goal("top"));
    for (i, _) in indexed.iter().enumerate() {
        pairs.push((i, goal("top")));
    }
    // Extra goals always cover two or more graphs, so no goal can alias a
    // single simple attack away from its identity label.
    let extra = if indexed.len() < 2 {
        0
    } else {
        rng.gen_range(0..=(8 - goals.len()).min(3))
    };
    for e in 0..extra {
        let name = format!("extra{e}");
        let size = rng.gen_range(2..=indexed.len().min(5));
        let mut members = BTreeSet::new();
        while members.len() < size {
            members.insert(rng.gen_range(0..indexed.len()));
        }
        goals.insert(goal(&name));
        for m in members {
            pairs.push((m, goal(&name)));
        }
    }
    let relation = GoalRelation::table(universe, goals, pairs).unwrap();
    GenericInstance { relation, attacks }
}

/// Random instance for the partition oracle: simple and composite graphs
/// with arbitrary overlapping goals, totality backstopped per graph.
pub fn random_partition_instance(rng: &mut ChaCha8Rng) -> (GoalRelation, SpGraphSet) {
    let count = rng.gen_range(1..=6);
    let mut graphs = SpGraphSet::new();
    while graphs.len() < count {
        graphs.insert(random_graph(rng, 3));
    }
    let indexed: Vec<SpGraph> = graphs.iter().cloned().collect();
    let mut goals: BTreeSet<Goal> = BTreeSet::new();
    let mut pairs: Vec<(usize, Goal)> = Vec::new();
    let mut covered = vec![false; indexed.len()];
    for gi in 0..rng.gen_range(1..=4) {
        let name = format!("g{gi}");
        goals.insert(goal(&name));
        for (i, flag) in covered.iter_mut().enumerate() {
            if rng.gen_bool(0.5) {
                pairs.push((i, goal(&name)));
                *flag = true;
            }
        }
    }
    for (i, done) in covered.iter().enumerate() {
        if !done {
            let name = format!("only{i}");
            goals.insert(goal(&name));
            pairs.push((i, goal(&name)));
        }
    }
    (
        GoalRelation::table(graphs.clone(), goals, pairs).unwrap(),
        graphs,
    )
}

/// Exhaustive minimal valid partition (homogeneous blocks with common
/// goals); `None` when no valid partition exists.
pub fn brute_force_min_partition(rel: &GoalRelation, s: &SpGraphSet) -> Option<usize> {
    fn valid(rel: &GoalRelation, block: &SpGraphSet) -> bool {
        sp::is_homogeneous(block).unwrap_or(false) && rel.common_goal_exists(block)
    }
    fn rec(
        rel: &GoalRelation,
        items: &[SpGraph],
        blocks: &mut Vec<SpGraphSet>,
        best: &mut Option<usize>,
    ) {
        match items.split_first() {
            None => {
                let k = blocks.len();
                if best.map(|b| k < b).unwrap_or(true) {
                    *best = Some(k);
                }
            }
            Some((g, rest)) => {
                if let Some(b) = *best {
                    if blocks.len() >= b {
                        return;
                    }
                }
                for i in 0..blocks.len() {
                    blocks[i].insert(g.clone());
                    if valid(rel, &blocks[i]) {
                        rec(rel, rest, blocks, best);
                    }
                    blocks[i].remove(g);
                }
                blocks.push([g.clone()].into_iter().collect());
                if valid(rel, blocks.last().unwrap()) {
                    rec(rel, rest, blocks, best);
                }
                blocks.pop();
            }
        }
    }
    let items: Vec<SpGraph> = s.iter().cloned().collect();
    let mut best = None;
    rec(rel, &items, &mut Vec::new(), &mut best);
    best
}

// ------------------------------------------------------ random LTS systems

pub struct LtsInstance {
    pub system: KripkeSystem,
    pub paths: Vec<Path>,
}

fn ground_pattern(name: &str) -> PredPattern {
    PredPattern {
        name: name.to_owned(),
        args: Vec::new(),
    }
}

/// Random ground-rule transition system over at most `max_preds` zero-arity
/// predicates, retried until some breach path exists within the bounds.
pub fn random_lts_instance(rng: &mut ChaCha8Rng, max_preds: usize) -> LtsInstance {
    loop {
        let npreds = rng.gen_range(3..=max_preds);
        let names: Vec<String> = (0..npreds).map(|i| format!("p{i}")).collect();
        let initial: State = names
            .iter()
            .filter(|_| rng.gen_bool(0.3))
            .map(|n| Predicate::new(n.clone(), vec![]))
            .collect();
        let nrules = rng.gen_range(3..=6);
        let mut rules = Vec::new();
        for r in 0..nrules {
            let pick = |rng: &mut ChaCha8Rng, k: usize| -> Vec<String> {
                let mut chosen = names.clone();
                chosen.shuffle(rng);
                chosen.truncate(k);
                chosen
            };
            let n_premises = rng.gen_range(0..=2);
            let premises = pick(rng, n_premises);
            let n_additions = rng.gen_range(1..=2);
            let additions = pick(rng, n_additions);
            let n_removals = rng.gen_range(0..=1);
            let removals: Vec<String> = pick(rng, n_removals)
                .into_iter()
                .filter(|n| !additions.contains(n))
                .collect();
            rules.push(TransitionRule {
                name: format!("r{r}"),
                vars: BTreeMap::new(),
                premises: premises.iter().map(|n| ground_pattern(n)).collect(),
                action: TermPattern {
                    name: format!("r{r}"),
                    args: Vec::new(),
                },
                additions: additions.iter().map(|n| ground_pattern(n)).collect(),
                removals: removals.iter().map(|n| ground_pattern(n)).collect(),
            });
        }
        let breach: Vec<PredPattern> = {
            let mut chosen = names.clone();
            chosen.shuffle(rng);
            chosen.truncate(rng.gen_range(1..=2));
            chosen.iter().map(|n| ground_pattern(n)).collect()
        };
        let system = KripkeSystem {
            sorts: BTreeMap::new(),
            rules,
            initial,
            breach,
        };
        if system.is_breach(&system.initial) {
            continue;
        }
        let paths = enumerate_paths(&system, 3, 12);
        if !paths.is_empty() {
            return LtsInstance { system, paths };
        }
    }
}

/// Brute-force optimal delta goal over the reachable predicate alphabet:
/// every disjoint (removed, added) pair, satisfaction evaluated directly
/// from endpoint differences. Returns the minimal attack-set size among
/// goals covering `s`.
pub fn brute_force_optimal_label_size(universe: &SpGraphSet, s: &SpGraphSet) -> Option<usize> {
    let mut alphabet: Vec<Predicate> = Vec::new();
    let mut nets: Vec<(BTreeSet<Predicate>, BTreeSet<Predicate>)> = Vec::new();
    for g in universe {
        let (start, end) = g.endpoints().expect("universe graphs carry endpoints");
        let removed: BTreeSet<Predicate> = start.difference(end).cloned().collect();
        let added: BTreeSet<Predicate> = end.difference(start).cloned().collect();
        for p in removed.iter().chain(added.iter()) {
            if !alphabet.contains(p) {
                alphabet.push(p.clone());
            }
        }
        nets.push((removed, added));
    }
    let member_bits = |set: &BTreeSet<Predicate>| -> u32 {
        alphabet
            .iter()
            .enumerate()
            .filter(|(_, p)| set.contains(*p))
            .fold(0, |acc, (i, _)| acc | (1 << i))
    };
    let net_bits: Vec<(u32, u32)> = nets
        .iter()
        .map(|(r, a)| (member_bits(r), member_bits(a)))
        .collect();
    let covered: Vec<bool> = universe.iter().map(|g| s.contains(g)).collect();

    let mut best: Option<usize> = None;
    // Each predicate is in the removed set, the added set, or neither.
    let combos = 3u32.pow(alphabet.len() as u32);
    for combo in 0..combos {
        let mut rm = 0u32;
        let mut ad = 0u32;
        let mut c = combo;
        for bit in 0..alphabet.len() {
            match c % 3 {
                1 => rm |= 1 << bit,
                2 => ad |= 1 << bit,
                _ => {}
            }
            c /= 3;
        }
        let sat = |(r, a): &(u32, u32)| (rm & r) == rm && (ad & a) == ad;
        if covered
            .iter()
            .zip(&net_bits)
            .any(|(is_target, net)| *is_target && !sat(net))
        {
            continue;
        }
        let size = net_bits.iter().filter(|net| sat(net)).count();
        if best.map(|b| size < b).unwrap_or(true) {
            best = Some(size);
        }
    }
    best
}

/// Net delta of an endpoint-carrying graph, computed from the definition.
pub fn endpoint_net(g: &SpGraph) -> StepDelta {
    let (start, end) = g.endpoints().expect("endpoint-carrying graph");
    StepDelta::between(start, end)
}
