//! DOT and plain-text renderings of attack trees.
//!
//! DOT cannot draw the conventional bar/arrow connectors across sibling
//! edges, so refinement types are encoded per node and per edge instead:
//! OR nodes are ellipses with plain child edges, AND nodes are boxes whose
//! child edges are bold and carry the `arc` marker, SAND nodes are boxes
//! whose child edges are arrows carrying the `arrow` marker and an order
//! index. The text mode prints an indented outline with operator markers.

use std::fmt::Write;

use crate::tree::{AttackTree, TreeOp};

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz DOT rendering.
pub fn dot(tree: &AttackTree) -> String {
    let mut out = String::from("digraph attack_tree {\n");
    out.push_str("  node [fontname=\"Helvetica\"];\n");
    out.push_str("  edge [dir=none];\n");
    let mut counter = 0usize;
    emit(tree, &mut out, &mut counter);
    out.push_str("}\n");
    out
}

fn emit(tree: &AttackTree, out: &mut String, counter: &mut usize) -> usize {
    let id = *counter;
    *counter += 1;
    let shape = match tree.op() {
        None => "plaintext",
        Some(TreeOp::Or) => "ellipse",
        Some(TreeOp::And) | Some(TreeOp::Sand) => "box",
    };
    writeln!(
        out,
        "  n{id} [label=\"{}\", shape={shape}];",
        escape(&tree.top().to_string())
    )
    .expect("writing to a string");
    for (i, child) in tree.children().iter().enumerate() {
        let child_id = emit(child, out, counter);
        let attrs = match tree.op() {
            Some(TreeOp::And) => " [style=bold, comment=\"arc\"]".to_string(),
            Some(TreeOp::Sand) => {
                format!(
                    " [dir=forward, arrowhead=vee, comment=\"arrow\", label=\"{}\"]",
                    i + 1
                )
            }
            _ => String::new(),
        };
        writeln!(out, "  n{id} -> n{child_id}{attrs};").expect("writing to a string");
    }
    id
}

/// Indented outline with operator markers.
pub fn text(tree: &AttackTree) -> String {
    let mut out = String::new();
    emit_text(tree, &mut out, 0);
    out
}

fn emit_text(tree: &AttackTree, out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
    match tree.op() {
        None => writeln!(out, "{}", tree.top()).expect("writing to a string"),
        Some(op) => writeln!(out, "{} [{op}]", tree.top()).expect("writing to a string"),
    }
    for child in tree.children() {
        emit_text(child, out, depth + 1);
    }
}
