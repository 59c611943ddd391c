//! Graphviz export of the dependency graph and its skeleton.

use std::fmt::Write;

use slin_core::depgraph::{SccDecomposition, SkeletonGraph, Wdg};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// One digraph with two clusters: the WDG with `d f_j / d x_i` on each edge
/// `i -> j`, and the skeleton with one `u_k` node per strong component.
pub fn render(g: &Wdg, scc: &SccDecomposition, skeleton: &SkeletonGraph) -> String {
    let names = g.space().names();
    let mut s = String::new();
    s.push_str("digraph slin {\n");
    s.push_str("  subgraph cluster_wdg {\n    label=\"weighted dependency graph\";\n");
    for (i, name) in names.iter().enumerate() {
        let _ = writeln!(s, "    v{i} [label={}];", quote(name));
    }
    for (i, j, w) in g.edges() {
        let style = if scc.component_of(i) == scc.component_of(j) { "" } else { ", style=dashed" };
        let _ = writeln!(s, "    v{i} -> v{j} [label={}{style}];", quote(&w.to_string()));
    }
    s.push_str("  }\n");
    s.push_str("  subgraph cluster_skeleton {\n    label=\"skeleton\";\n");
    for u in 0..skeleton.num_nodes() {
        let members: Vec<&str> = skeleton.members(u).iter().map(|&v| names[v].as_str()).collect();
        let _ = writeln!(
            s,
            "    u{u} [label={}, tooltip={}];",
            quote(&format!("u_{u}")),
            quote(&members.join(", "))
        );
    }
    for (a, b) in skeleton.edges() {
        let _ = writeln!(s, "    u{a} -> u{b};");
    }
    for layer in skeleton.layers() {
        let nodes: Vec<String> = layer.iter().map(|u| format!("u{u}")).collect();
        let _ = writeln!(s, "    {{ rank=same; {}; }}", nodes.join("; "));
    }
    s.push_str("  }\n}\n");
    s
}
