//! DC-QSearch: bottom-up best-first synthesis of dynamic circuits.
//!
//! Templates start from a U3 layer on every qubit; each successor appends
//! one block (a CNOT followed by a U3 on each endpoint) on a topology edge.
//! Every node is scored by instantiating the full dynamic circuit — base
//! segment plus one feed-forward U3 layer per branch — and the frontier is
//! ordered by instantiated cost plus a small per-block penalty, so the
//! search returns the first converged template, preferring fewer blocks and
//! then shallower depth.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use rayon::prelude::*;

use super::{AncillaStrategy, SearchConfig, SearchCost, SynthesisReport};
use crate::circuit::{build, depth_2q, DynamicCircuit, ParamCircuit, Structure, Topology};
use crate::cost::CostSpec;
use crate::error::{DcError, Result};
use crate::instantiate::{instantiate, InstantiateResult};
use crate::targets::Target;

/// Synthesizes a dynamic circuit preparing `target` with `a` ancillas on
/// the given topology. The topology covers system + ancilla qubits.
pub fn dc_qsearch(
    target: &Target,
    a: usize,
    topo: &Topology,
    cfg: &SearchConfig,
) -> Result<SynthesisReport> {
    let s = target.system_qubits();
    if topo.n_qubits != s + a {
        return Err(DcError::InvalidShape(format!(
            "topology spans {} qubits, target needs {}",
            topo.n_qubits,
            s + a
        )));
    }
    let placements: Vec<Vec<usize>> = match &cfg.ancilla_strategy {
        AncillaStrategy::Fixed(list) => {
            if list.len() != a {
                return Err(DcError::InvalidTarget(format!(
                    "{} ancilla positions given, {a} requested",
                    list.len()
                )));
            }
            vec![list.clone()]
        }
        AncillaStrategy::EnumerateAll => combinations(topo.n_qubits, a),
    };
    let start = Instant::now();
    let mut best: Option<SynthesisReport> = None;
    let mut total_nodes = 0usize;
    for anc in &placements {
        match search_with_ancillas(target, anc, topo, cfg) {
            Ok(mut report) => {
                total_nodes += report.nodes_expanded;
                report.nodes_expanded = total_nodes;
                report.wall_time = start.elapsed().as_secs_f64();
                let better = match &best {
                    None => true,
                    Some(b) => {
                        (report.cnot_count, report.depth, report.final_cost.to_bits())
                            < (b.cnot_count, b.depth, b.final_cost.to_bits())
                    }
                };
                if better {
                    best = Some(report);
                }
            }
            Err(DcError::NotFound { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    best.ok_or(DcError::NotFound { best_cost: f64::NAN })
}

/// All size-k subsets of 0..n, lexicographic.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for q in start..n {
            cur.push(q);
            rec(q + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

struct Scored {
    score: f64,
    blocks: usize,
    depth: usize,
    seq: u64,
    edges: Vec<(usize, usize)>,
    dc: DynamicCircuit,
    result: InstantiateResult,
}

impl PartialEq for Scored {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_key() == other.cmp_key()
    }
}
impl Eq for Scored {}
impl Scored {
    fn cmp_key(&self) -> (u64, usize, usize, u64) {
        (self.score.to_bits(), self.blocks, self.depth, self.seq)
    }
}
impl Ord for Scored {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; invert for min ordering.
        other.cmp_key().cmp(&self.cmp_key())
    }
}
impl PartialOrd for Scored {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn search_with_ancillas(
    target: &Target,
    ancillas: &[usize],
    topo: &Topology,
    cfg: &SearchConfig,
) -> Result<SynthesisReport> {
    let start = Instant::now();
    let spec = cost_spec(target, &cfg.cost)?;
    let score_node = |edges: &[(usize, usize)], seq: u64| -> Result<Scored> {
        let dc = assemble(topo.n_qubits, ancillas, edges, cfg.structure)?;
        let mut icfg = cfg.instantiate.clone();
        icfg.seed = icfg.seed ^ edge_hash(edges);
        let result = instantiate(&spec, &dc, &icfg);
        let blocks = edges.len();
        let depth = super::circuit_counts(&dc).depth;
        let score =
            cfg.cost_weight * result.cost + cfg.block_weight * blocks as f64;
        Ok(Scored { score, blocks, depth, seq, edges: edges.to_vec(), dc, result })
    };

    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(score_node(&[], seq)?);
    let mut expanded = 0usize;
    let mut best_cost = f64::INFINITY;

    while let Some(node) = heap.pop() {
        best_cost = best_cost.min(node.result.cost);
        if node.result.converged {
            return Ok(SynthesisReport::from_circuit(
                node.dc,
                node.result.params,
                node.result.cost,
                expanded,
                start.elapsed().as_secs_f64(),
            ));
        }
        if node.edges.len() >= cfg.max_blocks {
            continue;
        }
        expanded += 1;
        let successors: Vec<Result<Scored>> = topo
            .edges
            .par_iter()
            .enumerate()
            .map(|(k, &e)| {
                let mut edges = node.edges.clone();
                edges.push(e);
                score_node(&edges, seq + 1 + k as u64)
            })
            .collect();
        seq += 1 + topo.edges.len() as u64;
        for s in successors {
            heap.push(s?);
        }
    }
    Err(DcError::NotFound { best_cost })
}

fn edge_hash(edges: &[(usize, usize)]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &(a, b) in edges {
        for byte in [a as u8, b as u8] {
            h ^= byte as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    h
}

fn cost_spec(target: &Target, cost: &SearchCost) -> Result<CostSpec> {
    match (target, cost) {
        (Target::State(v), SearchCost::Auto) => Ok(CostSpec::state(v.clone())),
        (Target::Unitary(u), SearchCost::Auto) => Ok(CostSpec::dyn2(u.clone())),
        (Target::Unitary(u), SearchCost::Dyn1 { policy, fixed_w }) => {
            let mut spec = CostSpec::dyn1(u.clone(), *policy);
            spec.fixed_w = fixed_w.clone();
            Ok(spec)
        }
        (Target::Unitary(u), SearchCost::Bqskit0 { f0_qubits }) => {
            Ok(CostSpec::bqskit0(u.clone(), f0_qubits.clone()))
        }
        (Target::Unitary(u), SearchCost::Hs) => Ok(CostSpec::hs(u.clone())),
        (Target::State(_), _) => Err(DcError::InvalidTarget(
            "state targets use the state cost (Auto)".into(),
        )),
    }
}

/// Builds the dynamic circuit for a block sequence: initial U3 layer, the
/// blocks, one simultaneous (or nested) measurement of the ancillas, and a
/// U3 feed-forward layer per branch.
pub fn assemble(
    n_qubits: usize,
    ancillas: &[usize],
    edges: &[(usize, usize)],
    structure: Structure,
) -> Result<DynamicCircuit> {
    let mut ub = ParamCircuit::new(n_qubits);
    ub.push_u3_layer();
    for &(x, y) in edges {
        ub.push_block(x, y);
    }
    let u3_layer = |live: &[usize]| {
        let mut c = ParamCircuit::new(live.len());
        c.push_u3_layer();
        c
    };
    if ancillas.len() <= 1 || structure == Structure::Simultaneous {
        build::simultaneous(n_qubits, ancillas, ub, |_, live| u3_layer(live))
    } else {
        build::nested(
            structure,
            n_qubits,
            ancillas,
            ub,
            |_, live| u3_layer(live),
            |live| u3_layer(live),
            |_, live| u3_layer(live),
        )
    }
}

/// Plain unitary synthesis (no ancilla measurement): the same search with
/// zero ancillas. Used for block resynthesis and projected-initial-state
/// targets.
pub fn unitary_qsearch(
    target: &Target,
    topo: &Topology,
    cfg: &SearchConfig,
) -> Result<SynthesisReport> {
    let mut cfg = cfg.clone();
    cfg.ancilla_strategy = AncillaStrategy::Fixed(Vec::new());
    if matches!(cfg.cost, SearchCost::Auto) {
        if let Target::Unitary(_) = target {
            cfg.cost = SearchCost::Hs;
        }
    }
    dc_qsearch(target, 0, topo, &cfg)
}

pub(crate) fn template_depth(
    n_qubits: usize,
    edges: &[(usize, usize)],
) -> usize {
    let mut c = ParamCircuit::new(n_qubits);
    for &(x, y) in edges {
        c.push_block(x, y);
    }
    depth_2q(&c)
}
