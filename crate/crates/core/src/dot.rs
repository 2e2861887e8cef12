//! Graphviz export of Hasse diagrams.

use std::fmt::Write;

use crate::error::Result;
use crate::module::FinModule;

/// The Hasse diagram of the induced order, smaller elements at the bottom:
/// one quoted node per element and one edge per covering pair.
pub fn hasse_dot(m: &FinModule, graph_name: &str) -> Result<String> {
    let order = m.induced_order()?;
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(graph_name)).unwrap();
    writeln!(out, "  rankdir=BT;").unwrap();
    writeln!(out, "  node [shape=plaintext];").unwrap();
    for a in m.elements() {
        writeln!(out, "  n{a} [label={}];", quote(m.name(a))).unwrap();
    }
    for (a, b) in order.covers() {
        writeln!(out, "  n{a} -> n{b} [arrowhead=none];").unwrap();
    }
    out.push_str("}\n");
    Ok(out)
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}
