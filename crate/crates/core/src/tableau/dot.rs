use std::fmt::Write;

use super::{Mark, Tree};
use crate::semantics::{print_trace, Run};

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\l")
}

/// Graphviz rendering of a recorded tableau. Poised nodes have a double
/// border, closed leaves name the rule that closed them, and the accepted
/// leaf carries the witness.
pub fn to_dot(tree: &Tree, witness: Option<&Run>) -> String {
    let mut out = String::from("digraph tableau {\n  node [shape=box, fontname=\"monospace\"];\n");
    for n in &tree.nodes {
        let mut text = n.label.to_string();
        let mut attrs = String::new();
        if n.poised_index.is_some() {
            attrs.push_str(", peripheries=2");
        }
        match &n.mark {
            Some(Mark::Accepted) => {
                text.push_str("\nACCEPTED (EMPTY)");
                if let Some(w) = witness {
                    text.push('\n');
                    text.push_str(print_trace(w).trim_end());
                }
                attrs.push_str(", color=darkgreen");
            }
            Some(Mark::Rejected(rule)) => {
                let _ = write!(text, "\nREJECTED {rule}");
                attrs.push_str(", color=red");
            }
            Some(Mark::Cut) => {
                text.push_str("\nCUT (step bound)");
                attrs.push_str(", style=dashed");
            }
            None => {}
        }
        let _ = writeln!(out, "  n{} [label=\"{}\\l\"{}];", n.id, escape(&text), attrs);
        if let Some(p) = n.parent {
            let _ = writeln!(out, "  n{p} -> n{};", n.id);
        }
    }
    out.push_str("}\n");
    out
}
