//! Graphviz export of the diagram and of its relevance graph.

use std::fmt::Write;

use crate::maid::{Maid, NodeId, NodeKind};
use crate::relevance::{relevance_graph, scc_ordering};

const PALETTE: [&str; 8] = [
    "#8dd3c7", "#fdb462", "#bebada", "#fb8072", "#80b1d3", "#b3de69", "#fccde5", "#d9d9d9",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DotTarget {
    MaidDiagram,
    RelevanceGraph,
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn agent_color(maid: &Maid, id: NodeId) -> Option<&'static str> {
    let owner = maid.owner(id)?;
    let i = maid.agent_index(owner.as_str())?;
    Some(PALETTE[i % PALETTE.len()])
}

/// DOT text for `target`. Nodes appear in model order and edges in child
/// then parent order, so the output is byte-stable.
pub fn export_dot(maid: &Maid, target: DotTarget) -> String {
    match target {
        DotTarget::MaidDiagram => maid_dot(maid),
        DotTarget::RelevanceGraph => relevance_dot(maid),
    }
}

fn maid_dot(maid: &Maid) -> String {
    let mut out = String::from("digraph maid {\n  rankdir=TB;\n  node [fontname=\"Helvetica\"];\n");
    for id in maid.ids() {
        let node = maid.node(id);
        let shape = match node.kind {
            NodeKind::Chance => "ellipse",
            NodeKind::Decision { .. } => "box",
            NodeKind::Utility { .. } => "diamond",
        };
        let _ = write!(out, "  {} [shape={shape}", quote(&node.id));
        if let Some(color) = agent_color(maid, id) {
            let _ = write!(out, ", style=filled, fillcolor=\"{color}\"");
        }
        out.push_str("];\n");
    }
    for id in maid.ids() {
        for &p in maid.parents(id) {
            let _ = writeln!(out, "  {} -> {};", quote(maid.name(p)), quote(maid.name(id)));
        }
    }
    if !maid.agents().is_empty() {
        out.push_str("  subgraph cluster_legend {\n    label=\"agents\";\n");
        for (i, a) in maid.agents().iter().enumerate() {
            let _ = writeln!(
                out,
                "    {} [shape=plaintext, style=filled, fillcolor=\"{}\"];",
                quote(&format!("agent:{a}")),
                PALETTE[i % PALETTE.len()]
            );
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

fn relevance_dot(maid: &Maid) -> String {
    let rg = relevance_graph(maid);
    let ordering = scc_ordering(&rg);
    let mut out = String::from("digraph relevance {\n  node [fontname=\"Helvetica\", shape=box];\n");
    for (c, members) in ordering.components.iter().enumerate() {
        let _ = writeln!(out, "  subgraph cluster_c{} {{\n    label=\"C{}\";", c + 1, c + 1);
        for &d in members {
            let _ = write!(out, "    {}", quote(maid.name(d)));
            if let Some(color) = agent_color(maid, d) {
                let _ = write!(out, " [style=filled, fillcolor=\"{color}\"]");
            }
            out.push_str(";\n");
        }
        out.push_str("  }\n");
    }
    for (from, to) in rg.edges() {
        let _ = writeln!(out, "  {} -> {};", quote(maid.name(from)), quote(maid.name(to)));
    }
    out.push_str("}\n");
    out
}
