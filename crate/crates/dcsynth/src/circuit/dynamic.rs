//! Dynamic circuits: a tree of circuit segments separated by ancilla
//! measurements, with classically-selected children per outcome.
//!
//! Conventions used throughout:
//! - Qubits are numbered globally 0..n; ancillas can sit at any position.
//! - The "live" qubits of a node are those not yet measured on the path to
//!   it; a segment's local qubit k is the k-th smallest live global index.
//! - A node's `measured` list is ascending; child `2^k` outcome indices use
//!   the first listed qubit as the most significant bit.
//! - The full-outcome index of a branch orders all ancillas ascending, the
//!   lowest ancilla index as the most significant bit. This matches the
//!   trailing-ancilla-block matrix convention of [`crate::linalg`].

use serde::{Deserialize, Serialize};

use super::param::ParamCircuit;
use crate::error::{DcError, Result};

/// Where mid-circuit measurements are placed when several ancillas exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Structure {
    /// All ancillas measured at once in a single cycle.
    Simultaneous,
    /// One ancilla per cycle; the feed-forward layer after each cycle and
    /// the following base segment are shared across earlier outcomes.
    Independent,
    /// One ancilla per cycle; only the |1⟩ branch keeps measuring.
    AsymmetricNested,
    /// One ancilla per cycle; every branch keeps measuring, with its own
    /// segments.
    SymmetricNested,
}

/// One tree node: a segment, then (optionally) a measurement cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentNode {
    /// Circuit over the node's live qubits (local indices).
    pub segment: ParamCircuit,
    /// Global qubit indices measured after the segment; empty at leaves.
    pub measured: Vec<usize>,
    /// One child per outcome (2^measured.len()), or none at a leaf.
    pub children: Vec<SegmentNode>,
}

impl SegmentNode {
    pub fn leaf(segment: ParamCircuit) -> Self {
        SegmentNode { segment, measured: Vec::new(), children: Vec::new() }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// A dynamic circuit over `n_qubits` qubits with `ancillas` measured
/// somewhere in the tree. Parameters live in one global vector; segments
/// reference slots in it, so feed-forward layers can share parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicCircuit {
    pub n_qubits: usize,
    pub structure: Structure,
    pub n_params: usize,
    pub root: SegmentNode,
    ancillas: Vec<usize>,
}

impl DynamicCircuit {
    /// Wraps a tree, deriving the ancilla set (union of all `measured`
    /// lists) and validating the structural invariants.
    pub fn new(structure: Structure, n_qubits: usize, root: SegmentNode) -> Result<Self> {
        let mut ancillas: Vec<usize> = Vec::new();
        collect_measured(&root, &mut ancillas);
        ancillas.sort_unstable();
        ancillas.dedup();
        let mut n_params = 0usize;
        max_slot(&root, &mut n_params);
        let dc = DynamicCircuit { n_qubits, structure, n_params, root, ancillas };
        dc.validate()?;
        Ok(dc)
    }

    /// Sorted global indices of the measured ancillas.
    pub fn ancillas(&self) -> &[usize] {
        &self.ancillas
    }

    /// Sorted global indices of the system qubits.
    pub fn system_qubits(&self) -> Vec<usize> {
        (0..self.n_qubits).filter(|q| !self.ancillas.contains(q)).collect()
    }

    pub fn s_qubits(&self) -> usize {
        self.n_qubits - self.ancillas.len()
    }

    pub fn a_qubits(&self) -> usize {
        self.ancillas.len()
    }

    fn validate(&self) -> Result<()> {
        if self.root.segment.n_qubits != self.n_qubits {
            return Err(DcError::MalformedDynamicCircuit(format!(
                "root segment spans {} qubits, circuit has {}",
                self.root.segment.n_qubits, self.n_qubits
            )));
        }
        let live: Vec<usize> = (0..self.n_qubits).collect();
        validate_node(&self.root, &live, self.n_params)?;
        if self.structure == Structure::Simultaneous {
            let expect = 1usize << self.a_qubits();
            let mut leaves = 0usize;
            count_leaves(&self.root, &mut leaves);
            if leaves != expect {
                return Err(DcError::MalformedDynamicCircuit(format!(
                    "simultaneous structure must have {expect} leaves, found {leaves}"
                )));
            }
        }
        Ok(())
    }

    /// Visits every node with its live-qubit list, parents first.
    pub fn visit<F: FnMut(&SegmentNode, &[usize])>(&self, mut f: F) {
        let live: Vec<usize> = (0..self.n_qubits).collect();
        visit_node(&self.root, &live, &mut f);
    }

    /// Total 2-qubit gates over the whole tree (every branch counted once).
    pub fn total_2q(&self) -> usize {
        let mut n = 0;
        self.visit(|node, _| n += node.segment.count_2q());
        n
    }

    /// Full-outcome index of a path's collapsed bits: ancillas ascending,
    /// lowest index as the most significant bit. Unmeasured ancillas on the
    /// path contribute the supplied residual bits.
    pub fn outcome_index(&self, bits: &[(usize, usize)]) -> usize {
        let a = self.a_qubits();
        let mut idx = 0usize;
        for (rank, &anc) in self.ancillas.iter().enumerate() {
            let bit = bits.iter().find(|(q, _)| *q == anc).map(|(_, b)| *b).unwrap_or(0);
            idx |= bit << (a - 1 - rank);
        }
        idx
    }
}

fn collect_measured(node: &SegmentNode, acc: &mut Vec<usize>) {
    acc.extend_from_slice(&node.measured);
    for ch in &node.children {
        collect_measured(ch, acc);
    }
}

fn max_slot(node: &SegmentNode, acc: &mut usize) {
    *acc = (*acc).max(node.segment.n_params);
    for ch in &node.children {
        max_slot(ch, acc);
    }
}

fn count_leaves(node: &SegmentNode, acc: &mut usize) {
    if node.is_leaf() {
        *acc += 1;
    }
    for ch in &node.children {
        count_leaves(ch, acc);
    }
}

fn visit_node<F: FnMut(&SegmentNode, &[usize])>(node: &SegmentNode, live: &[usize], f: &mut F) {
    f(node, live);
    if node.is_leaf() {
        return;
    }
    let next: Vec<usize> = live.iter().copied().filter(|q| !node.measured.contains(q)).collect();
    for ch in &node.children {
        visit_node(ch, &next, f);
    }
}

fn validate_node(node: &SegmentNode, live: &[usize], n_params: usize) -> Result<()> {
    if node.segment.n_qubits != live.len() {
        return Err(DcError::MalformedDynamicCircuit(format!(
            "segment spans {} qubits but {} are live",
            node.segment.n_qubits,
            live.len()
        )));
    }
    for p in &node.segment.placements {
        for &q in &p.qubits {
            if q >= live.len() {
                return Err(DcError::MalformedDynamicCircuit(format!(
                    "placement qubit {q} out of live range {}",
                    live.len()
                )));
            }
        }
        for &s in &p.param_slots {
            if s >= n_params {
                return Err(DcError::MalformedDynamicCircuit(format!(
                    "slot {s} out of range {n_params}"
                )));
            }
        }
    }
    let mut sorted = node.measured.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted != node.measured {
        return Err(DcError::MalformedDynamicCircuit(
            "measured list must be ascending and distinct".into(),
        ));
    }
    for &m in &node.measured {
        if !live.contains(&m) {
            return Err(DcError::MalformedDynamicCircuit(format!(
                "qubit {m} measured twice on one path (or out of range)"
            )));
        }
    }
    let expect = if node.measured.is_empty() { 0 } else { 1usize << node.measured.len() };
    if node.children.len() != expect {
        return Err(DcError::MalformedDynamicCircuit(format!(
            "node with {} measured qubits must have {expect} children, found {}",
            node.measured.len(),
            node.children.len()
        )));
    }
    let next: Vec<usize> = live.iter().copied().filter(|q| !node.measured.contains(q)).collect();
    for ch in &node.children {
        validate_node(ch, &next, n_params)?;
    }
    Ok(())
}

/// Rebases a locally-numbered segment so its slots start at `*offset`, and
/// advances the offset. Used by the structure builders below.
fn rebase(mut seg: ParamCircuit, offset: &mut usize) -> ParamCircuit {
    let local = seg.n_params;
    if *offset > 0 {
        seg.offset_slots(*offset);
    }
    *offset += local;
    seg
}

/// Builders assembling the four measurement structures from segment
/// factories. Factories receive the live global qubit list and return a
/// segment with locally-numbered parameter slots.
pub mod build {
    use super::*;

    /// `U_b` on all qubits, one simultaneous measurement of every ancilla,
    /// then one leaf segment per outcome.
    pub fn simultaneous(
        n_qubits: usize,
        ancillas: &[usize],
        ub: ParamCircuit,
        mut leaf: impl FnMut(usize, &[usize]) -> ParamCircuit,
    ) -> Result<DynamicCircuit> {
        let mut anc = ancillas.to_vec();
        anc.sort_unstable();
        let system: Vec<usize> = (0..n_qubits).filter(|q| !anc.contains(q)).collect();
        let mut offset = 0usize;
        let mut root_seg = rebase(ub, &mut offset);
        if anc.is_empty() {
            // Nothing to measure: fold the single branch into the segment.
            let branch = rebase(leaf(0, &system), &mut offset);
            for p in &branch.placements {
                root_seg.push_with_slots(p.kind.clone(), p.qubits.clone(), p.param_slots.clone());
            }
            return DynamicCircuit::new(
                Structure::Simultaneous,
                n_qubits,
                SegmentNode::leaf(root_seg),
            );
        }
        let children: Vec<SegmentNode> = (0..1usize << anc.len())
            .map(|out| SegmentNode::leaf(rebase(leaf(out, &system), &mut offset)))
            .collect();
        DynamicCircuit::new(
            Structure::Simultaneous,
            n_qubits,
            SegmentNode { segment: root_seg, measured: anc, children },
        )
    }

    /// One measurement per cycle, highest-index ancilla first. Depending on
    /// the structure, intermediate segments are shared or per-branch:
    ///
    /// - `SymmetricNested`: every branch gets fresh segments.
    /// - `Independent`: the outcome layer at each cycle depends only on that
    ///   cycle's outcome, and the base segment that follows is shared, so
    ///   parameters are reused across earlier branches.
    /// - `AsymmetricNested`: only the |1⟩ branch keeps measuring; the |0⟩
    ///   branch ends with a segment over its remaining live qubits.
    ///
    /// `mid(outcome, live)` produces the feed-forward layer applied after a
    /// cycle; `base(live)` the following entangling segment (Independent
    /// only); `leaf(outcome, live)` the final branch segments.
    pub fn nested(
        structure: Structure,
        n_qubits: usize,
        ancillas: &[usize],
        ub: ParamCircuit,
        mut mid: impl FnMut(usize, &[usize]) -> ParamCircuit,
        mut base: impl FnMut(&[usize]) -> ParamCircuit,
        mut leaf: impl FnMut(usize, &[usize]) -> ParamCircuit,
    ) -> Result<DynamicCircuit> {
        assert!(matches!(
            structure,
            Structure::Independent | Structure::AsymmetricNested | Structure::SymmetricNested
        ));
        let mut anc = ancillas.to_vec();
        anc.sort_unstable();
        let live: Vec<usize> = (0..n_qubits).collect();
        let mut offset = 0usize;
        let root_seg = rebase(ub, &mut offset);

        let root = match structure {
            Structure::SymmetricNested => {
                fn grow(
                    seg: ParamCircuit,
                    live: &[usize],
                    remaining: &[usize],
                    offset: &mut usize,
                    mid: &mut impl FnMut(usize, &[usize]) -> ParamCircuit,
                    leaf: &mut impl FnMut(usize, &[usize]) -> ParamCircuit,
                ) -> SegmentNode {
                    if remaining.is_empty() {
                        return SegmentNode::leaf(seg);
                    }
                    let target = *remaining.last().unwrap();
                    let next_live: Vec<usize> =
                        live.iter().copied().filter(|&q| q != target).collect();
                    let next_rem = &remaining[..remaining.len() - 1];
                    let children = (0..2)
                        .map(|out| {
                            let child_seg = if next_rem.is_empty() {
                                rebase(leaf(out, &next_live), offset)
                            } else {
                                rebase(mid(out, &next_live), offset)
                            };
                            grow(child_seg, &next_live, next_rem, offset, mid, leaf)
                        })
                        .collect();
                    SegmentNode { segment: seg, measured: vec![target], children }
                }
                grow(root_seg, &live, &anc, &mut offset, &mut mid, &mut leaf)
            }
            Structure::Independent => {
                // Segments for each cycle are built once and cloned into
                // every branch, sharing slots.
                fn build_level(
                    anc: &[usize],
                    level: usize,
                    live: Vec<usize>,
                    offset: &mut usize,
                    mid: &mut impl FnMut(usize, &[usize]) -> ParamCircuit,
                    base: &mut impl FnMut(&[usize]) -> ParamCircuit,
                    leaf: &mut impl FnMut(usize, &[usize]) -> ParamCircuit,
                ) -> Vec<SegmentNode> {
                    // `level` counts measured cycles so far; the next target
                    // is the highest remaining ancilla.
                    let remaining = &anc[..anc.len() - level];
                    let target = *remaining.last().unwrap();
                    let next_live: Vec<usize> =
                        live.iter().copied().filter(|&q| q != target).collect();
                    let last_cycle = remaining.len() == 1;
                    if last_cycle {
                        let leaves: Vec<ParamCircuit> =
                            (0..2).map(|out| rebase(leaf(out, &next_live), offset)).collect();
                        leaves.into_iter().map(SegmentNode::leaf).collect()
                    } else {
                        let mut segs: Vec<ParamCircuit> = (0..2)
                            .map(|out| rebase(mid(out, &next_live), offset))
                            .collect();
                        let shared_base = rebase(base(&next_live), offset);
                        for seg in &mut segs {
                            for p in &shared_base.placements {
                                seg.push_with_slots(
                                    p.kind.clone(),
                                    p.qubits.clone(),
                                    p.param_slots.clone(),
                                );
                            }
                        }
                        // Children below this cycle are built once, then
                        // cloned so both outcomes share them.
                        let below = build_level(
                            anc,
                            level + 1,
                            next_live.clone(),
                            offset,
                            mid,
                            base,
                            leaf,
                        );
                        let next_target = anc[anc.len() - level - 2];
                        segs.into_iter()
                            .map(|seg| SegmentNode {
                                segment: seg,
                                measured: vec![next_target],
                                children: below.clone(),
                            })
                            .collect()
                    }
                }
                let children = build_level(
                    &anc,
                    0,
                    live.clone(),
                    &mut offset,
                    &mut mid,
                    &mut base,
                    &mut leaf,
                );
                SegmentNode { segment: root_seg, measured: vec![*anc.last().unwrap()], children }
            }
            Structure::AsymmetricNested => {
                fn grow(
                    seg: ParamCircuit,
                    live: &[usize],
                    remaining: &[usize],
                    offset: &mut usize,
                    mid: &mut impl FnMut(usize, &[usize]) -> ParamCircuit,
                    leaf: &mut impl FnMut(usize, &[usize]) -> ParamCircuit,
                ) -> SegmentNode {
                    if remaining.is_empty() {
                        return SegmentNode::leaf(seg);
                    }
                    let target = *remaining.last().unwrap();
                    let next_live: Vec<usize> =
                        live.iter().copied().filter(|&q| q != target).collect();
                    let next_rem = &remaining[..remaining.len() - 1];
                    // Outcome 0 stops measuring; outcome 1 continues.
                    let zero = SegmentNode::leaf(rebase(leaf(0, &next_live), offset));
                    let one = if next_rem.is_empty() {
                        SegmentNode::leaf(rebase(leaf(1, &next_live), offset))
                    } else {
                        let seg1 = rebase(mid(1, &next_live), offset);
                        grow(seg1, &next_live, next_rem, offset, mid, leaf)
                    };
                    SegmentNode { segment: seg, measured: vec![target], children: vec![zero, one] }
                }
                grow(root_seg, &live, &anc, &mut offset, &mut mid, &mut leaf)
            }
            Structure::Simultaneous => unreachable!(),
        };
        DynamicCircuit::new(structure, n_qubits, root)
    }
}
