//! Circuit metrics: gate counts, multi-qubit depth, measurement cycles, and
//! critical-path time.
//!
//! Depth counts only multi-qubit gates. A measurement cycle acts as a
//! barrier: child segments are classically conditioned on its outcome, so
//! every later gate depends on it (in both the depth DAG and the schedule).
//! Counts are taken over the worst root-to-leaf path, per metric.

use serde::{Deserialize, Serialize};

use super::dynamic::{DynamicCircuit, SegmentNode};
use super::param::ParamCircuit;

/// Per-kind gate durations in seconds.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GateTimes {
    pub one_qubit: f64,
    pub two_qubit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitMetrics {
    /// Total qubit count N (system + ancillas).
    pub n_qubits: usize,
    /// One-qubit gates on the worst-case path.
    pub n1: usize,
    /// Multi-qubit gates on the worst-case path.
    pub n2: usize,
    /// Measurement cycles M on the worst-case path; simultaneous
    /// measurements count once.
    pub mcm_cycles: usize,
    /// Individual ancilla measurements on the worst-case path.
    pub mcm_total: usize,
    /// Multi-qubit depth on the worst-case path.
    pub depth: usize,
    /// Critical-path time C_T in seconds, including t_meas + t_ff per
    /// measurement cycle on the path.
    pub critical_path_time: f64,
}

#[derive(Clone)]
struct Clocks {
    depth: Vec<usize>,
    time: Vec<f64>,
}

#[derive(Clone, Copy, Default)]
struct PathAcc {
    n1: usize,
    n2: usize,
    cycles: usize,
    mcm: usize,
}

#[derive(Default)]
struct Best {
    n1: usize,
    n2: usize,
    cycles: usize,
    mcm: usize,
    depth: usize,
    time: f64,
}

/// Metrics of a dynamic circuit under the given durations.
pub fn metrics(dc: &DynamicCircuit, times: GateTimes, t_ff: f64, t_meas: f64) -> CircuitMetrics {
    let mut best = Best::default();
    let live: Vec<usize> = (0..dc.n_qubits).collect();
    let clocks =
        Clocks { depth: vec![0; dc.n_qubits], time: vec![0.0; dc.n_qubits] };
    walk(&dc.root, &live, clocks, PathAcc::default(), times, t_ff, t_meas, &mut best);
    CircuitMetrics {
        n_qubits: dc.n_qubits,
        n1: best.n1,
        n2: best.n2,
        mcm_cycles: best.cycles,
        mcm_total: best.mcm,
        depth: best.depth,
        critical_path_time: best.time,
    }
}

/// Metrics of a plain unitary circuit (no measurement).
pub fn metrics_unitary(circuit: &ParamCircuit, times: GateTimes) -> CircuitMetrics {
    let mut clocks =
        Clocks { depth: vec![0; circuit.n_qubits], time: vec![0.0; circuit.n_qubits] };
    let map: Vec<usize> = (0..circuit.n_qubits).collect();
    let mut acc = PathAcc::default();
    apply_segment(circuit, &map, &mut clocks, &mut acc, times);
    CircuitMetrics {
        n_qubits: circuit.n_qubits,
        n1: acc.n1,
        n2: acc.n2,
        mcm_cycles: 0,
        mcm_total: 0,
        depth: clocks.depth.iter().copied().max().unwrap_or(0),
        critical_path_time: clocks.time.iter().copied().fold(0.0, f64::max),
    }
}

/// Multi-qubit depth of a plain circuit.
pub fn depth_2q(circuit: &ParamCircuit) -> usize {
    metrics_unitary(circuit, GateTimes { one_qubit: 0.0, two_qubit: 0.0 }).depth
}

fn apply_segment(
    seg: &ParamCircuit,
    qubit_map: &[usize],
    clocks: &mut Clocks,
    acc: &mut PathAcc,
    times: GateTimes,
) {
    for p in &seg.placements {
        let qs: Vec<usize> = p.qubits.iter().map(|&q| qubit_map[q]).collect();
        if qs.len() == 1 {
            acc.n1 += 1;
            clocks.time[qs[0]] += times.one_qubit;
        } else {
            acc.n2 += 1;
            let d = qs.iter().map(|&q| clocks.depth[q]).max().unwrap() + 1;
            let t = qs.iter().map(|&q| clocks.time[q]).fold(0.0, f64::max) + times.two_qubit;
            for &q in &qs {
                clocks.depth[q] = d;
                clocks.time[q] = t;
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn walk(
    node: &SegmentNode,
    live: &[usize],
    mut clocks: Clocks,
    mut acc: PathAcc,
    times: GateTimes,
    t_ff: f64,
    t_meas: f64,
    best: &mut Best,
) {
    apply_segment(&node.segment, live, &mut clocks, &mut acc, times);
    if node.is_leaf() {
        best.n1 = best.n1.max(acc.n1);
        best.n2 = best.n2.max(acc.n2);
        best.cycles = best.cycles.max(acc.cycles);
        best.mcm = best.mcm.max(acc.mcm);
        best.depth = best.depth.max(clocks.depth.iter().copied().max().unwrap_or(0));
        best.time = best.time.max(clocks.time.iter().copied().fold(0.0, f64::max));
        return;
    }
    acc.cycles += 1;
    acc.mcm += node.measured.len();
    // Measurement cycle: measured ancillas finish together, and the
    // feed-forward signal gates everything that follows.
    let meas_start =
        node.measured.iter().map(|&q| clocks.time[q]).fold(0.0, f64::max);
    let ready = meas_start + t_meas + t_ff;
    let depth_barrier = node.measured.iter().map(|&q| clocks.depth[q]).max().unwrap_or(0);
    let next: Vec<usize> = live.iter().copied().filter(|q| !node.measured.contains(q)).collect();
    for &q in &node.measured {
        clocks.time[q] = meas_start + t_meas;
    }
    for &q in &next {
        clocks.time[q] = clocks.time[q].max(ready);
        clocks.depth[q] = clocks.depth[q].max(depth_barrier);
    }
    for ch in &node.children {
        walk(ch, &next, clocks.clone(), acc, times, t_ff, t_meas, best);
    }
}
