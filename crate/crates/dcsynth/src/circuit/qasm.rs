//! Flattened QASM-3-style text export with `if` blocks, for human
//! inspection. The JSON schema is the canonical format; this export is not
//! round-tripped.

use std::fmt::Write;

use super::dynamic::{DynamicCircuit, SegmentNode};
use super::gates::GateKind;
use super::param::ParamCircuit;

/// Renders the circuit as QASM-like text. Measurements appear as
/// `c[k] = measure q[k];`, branches as `if (c == i) { ... }` where `c`
/// compares the bits measured by that cycle.
pub fn to_qasm(dc: &DynamicCircuit, params: &[f64]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "OPENQASM 3.0;");
    let _ = writeln!(out, "qubit[{}] q;", dc.n_qubits);
    let _ = writeln!(out, "bit[{}] c;", dc.n_qubits);
    let live: Vec<usize> = (0..dc.n_qubits).collect();
    render_node(&dc.root, &live, params, 0, &mut out);
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn render_segment(
    seg: &ParamCircuit,
    live: &[usize],
    params: &[f64],
    level: usize,
    out: &mut String,
) {
    for p in &seg.placements {
        indent(out, level);
        let qs: Vec<String> =
            p.qubits.iter().map(|&q| format!("q[{}]", live[q])).collect();
        let vals: Vec<String> =
            p.param_slots.iter().map(|&s| format!("{:.10}", params[s])).collect();
        let name = match &p.kind {
            GateKind::U3 => "u3".to_string(),
            GateKind::Cnot => "cx".to_string(),
            GateKind::Cz => "cz".to_string(),
            GateKind::Cs => "cs".to_string(),
            GateKind::Rzz => "rzz".to_string(),
            GateKind::Rxx => "rxx".to_string(),
            GateKind::Ryy => "ryy".to_string(),
            GateKind::H => "h".to_string(),
            GateKind::X => "x".to_string(),
            GateKind::Ry => "ry".to_string(),
            GateKind::Custom(m) => format!("custom_{}q", m.rows().trailing_zeros()),
        };
        if vals.is_empty() {
            let _ = writeln!(out, "{}({});", name, qs.join(", "));
        } else {
            let _ = writeln!(out, "{}({}) {};", name, vals.join(", "), qs.join(", "));
        }
    }
}

fn render_node(
    node: &SegmentNode,
    live: &[usize],
    params: &[f64],
    level: usize,
    out: &mut String,
) {
    render_segment(&node.segment, live, params, level, out);
    if node.is_leaf() {
        return;
    }
    for &m in &node.measured {
        indent(out, level);
        let _ = writeln!(out, "c[{m}] = measure q[{m}];");
    }
    let next: Vec<usize> = live.iter().copied().filter(|q| !node.measured.contains(q)).collect();
    for (outcome, ch) in node.children.iter().enumerate() {
        indent(out, level);
        let cond: Vec<String> = node
            .measured
            .iter()
            .enumerate()
            .map(|(k, &m)| {
                let bit = (outcome >> (node.measured.len() - 1 - k)) & 1;
                format!("c[{m}] == {bit}")
            })
            .collect();
        let _ = writeln!(out, "if ({}) {{", cond.join(" && "));
        render_node(ch, &next, params, level + 1, out);
        indent(out, level);
        let _ = writeln!(out, "}}");
    }
}

/// Structural smoke check used in tests: every `if` opens and closes, and
/// the qubit/bit declarations parse.
pub fn parses_structurally(text: &str) -> bool {
    let mut depth = 0i64;
    let mut saw_qubits = false;
    for line in text.lines() {
        let t = line.trim();
        if t.starts_with("qubit[") {
            saw_qubits = true;
        }
        depth += t.matches('{').count() as i64;
        depth -= t.matches('}').count() as i64;
        if depth < 0 {
            return false;
        }
    }
    saw_qubits && depth == 0
}
