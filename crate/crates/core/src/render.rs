//! DOT output for trees, finger graphs and diagram linking graphs.
//!
//! Nodes and edges are emitted in storage order, so equal inputs give
//! byte-identical text.

use crate::diagram::{ComponentKind, KirbyDiagram};
use crate::middle::MiddleLevelData;
use crate::tree::SignedTree;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn tree_dot(t: &SignedTree) -> String {
    let mut out = format!("digraph {} {{\n", quote(&t.name));
    for (i, n) in t.nodes.iter().enumerate() {
        let shape = if i == t.root { " shape=doublecircle" } else { "" };
        out.push_str(&format!("  n{i} [label={}{shape}];\n", quote(n)));
    }
    for (i, e) in t.edges.iter().enumerate() {
        let back = if t.is_back_edge(i) { " style=dashed" } else { "" };
        out.push_str(&format!("  n{} -> n{} [label=\"{}\"{back}];\n", e.parent, e.child, e.sign));
    }
    out.push_str("}\n");
    out
}

/// Spheres `A_a` as nodes, one edge per finger labelled with its id.
pub fn finger_graph_dot(m: &MiddleLevelData) -> String {
    let mut out = format!("digraph {} {{\n", quote(&m.name));
    for a in 1..=m.pairs {
        out.push_str(&format!("  A{a} [label=\"A{a}\"];\n"));
    }
    for f in &m.fingers {
        out.push_str(&format!("  A{} -> A{} [label={}];\n", f.from_a, f.through_b, quote(&f.id)));
    }
    out.push_str("}\n");
    out
}

/// Components as nodes, one edge per linked pair labelled `alg/geom`.
pub fn diagram_dot(d: &KirbyDiagram) -> String {
    let mut out = format!("graph {} {{\n", quote(&d.name));
    for (i, c) in d.components().iter().enumerate() {
        let (label, style) = match c.kind {
            ComponentKind::Dotted => (c.id.clone(), " style=dotted"),
            ComponentKind::Framed(f) => (format!("{} [{f}]", c.id), ""),
            ComponentKind::ParenFramed(f) => (format!("{} ({f})", c.id), " style=dashed"),
        };
        out.push_str(&format!("  c{i} [label={}{style}];\n", quote(&label)));
    }
    for i in 0..d.len() {
        for j in (i + 1)..d.len() {
            let (a, g) = (d.alg(i, j), d.geom(i, j));
            if a != 0 || g != 0 {
                out.push_str(&format!("  c{i} -- c{j} [label=\"{a}/{g}\"];\n"));
            }
        }
    }
    out.push_str("}\n");
    out
}
