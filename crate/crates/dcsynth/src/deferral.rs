//! Deferred-measurement evaluation of dynamic circuits.
//!
//! A dynamic circuit's measurements can be deferred: each measurement node
//! becomes a sum of projector-controlled continuations, yielding one large
//! unitary U over system + ancillas. This module builds U, simulates the
//! circuit branch by branch (the dual route used to cross-check deferral),
//! and extracts the Kraus operators of the induced channel.
//!
//! Matrices returned here use the math convention: system qubits first (in
//! ascending physical order), ancillas as the trailing index block.

use num_complex::Complex64;

use crate::circuit::{project_qubit, DynamicCircuit, SegmentNode, Structure};
use crate::error::{DcError, Result};
use crate::linalg::{CMatrix, CVector, ZERO};

/// One measurement branch: its outcome index, probability, and the system
/// state it leaves behind.
#[derive(Debug, Clone)]
pub struct BranchOutcome {
    /// Full ancilla outcome index (ancillas ascending, lowest index as the
    /// most significant bit).
    pub outcome_bits: usize,
    /// Squared norm of the projected state before normalization.
    pub probability: f64,
    /// Normalized post-measurement system state (unnormalized remnant when
    /// the probability is below 1e-12).
    pub post_state: CVector,
}

/// Physical-to-math index bookkeeping for a circuit's qubit layout.
pub(crate) struct Layout {
    pub n: usize,
    pub system: Vec<usize>,
    pub ancillas: Vec<usize>,
}

impl Layout {
    pub fn of(dc: &DynamicCircuit) -> Layout {
        Layout {
            n: dc.n_qubits,
            system: dc.system_qubits(),
            ancillas: dc.ancillas().to_vec(),
        }
    }

    /// Physical basis index for (system index p, ancilla index i).
    pub fn phys_index(&self, p: usize, i: usize) -> usize {
        let mut x = 0usize;
        let s = self.system.len();
        for (k, &q) in self.system.iter().enumerate() {
            if (p >> (s - 1 - k)) & 1 == 1 {
                x |= 1 << (self.n - 1 - q);
            }
        }
        let a = self.ancillas.len();
        for (k, &q) in self.ancillas.iter().enumerate() {
            if (i >> (a - 1 - k)) & 1 == 1 {
                x |= 1 << (self.n - 1 - q);
            }
        }
        x
    }
}

/// Walks every root-to-leaf branch: applies segments on the live qubits and
/// projects measured ancillas onto each outcome. The visitor receives the
/// collapsed (qubit, bit) pairs of the path and the full-space state.
fn walk<F: FnMut(&[(usize, usize)], &[Complex64])>(
    node: &SegmentNode,
    live: &[usize],
    n: usize,
    state: Vec<Complex64>,
    collapsed: &mut Vec<(usize, usize)>,
    params: &[f64],
    f: &mut F,
) {
    let mut state = state;
    node.segment.apply_mapped(&mut state, n, live, params);
    if node.is_leaf() {
        f(collapsed, &state);
        return;
    }
    let next: Vec<usize> = live.iter().copied().filter(|q| !node.measured.contains(q)).collect();
    let k = node.measured.len();
    for (out, ch) in node.children.iter().enumerate() {
        let mut branch = state.clone();
        for (b, &q) in node.measured.iter().enumerate() {
            let bit = (out >> (k - 1 - b)) & 1;
            project_qubit(&mut branch, n, q, bit);
            collapsed.push((q, bit));
        }
        walk(ch, &next, n, branch, collapsed, params, f);
        collapsed.truncate(collapsed.len() - k);
    }
}

fn walk_circuit<F: FnMut(&[(usize, usize)], &[Complex64])>(
    dc: &DynamicCircuit,
    params: &[f64],
    initial: Vec<Complex64>,
    f: &mut F,
) {
    let live: Vec<usize> = (0..dc.n_qubits).collect();
    let mut collapsed = Vec::new();
    walk(&dc.root, &live, dc.n_qubits, initial, &mut collapsed, params, f);
}

/// The deferred-measurement unitary U(θ): every measurement node replaced
/// by its projector-controlled sum of continuations.
pub fn deferred_unitary(dc: &DynamicCircuit, params: &[f64]) -> Result<CMatrix> {
    check_params(dc, params)?;
    let layout = Layout::of(dc);
    let dim = 1usize << dc.n_qubits;
    let (ds, da) = (1usize << dc.s_qubits(), 1usize << dc.a_qubits());
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    for col in 0..dim {
        let p = col / da;
        let i = col % da;
        let mut input = vec![ZERO; dim];
        input[layout.phys_index(p, i)] = Complex64::new(1.0, 0.0);
        let mut acc = vec![ZERO; dim];
        walk_circuit(dc, params, input, &mut |_, state| {
            for (a, s) in acc.iter_mut().zip(state) {
                *a += s;
            }
        });
        // Gather back into math ordering.
        let mut math_col = vec![ZERO; dim];
        for pp in 0..ds {
            for ii in 0..da {
                math_col[pp * da + ii] = acc[layout.phys_index(pp, ii)];
            }
        }
        cols.push(math_col);
    }
    Ok(CMatrix::from_columns(&cols))
}

/// The blocks U_{i,0} = (I ⊗ ⟨i|) U (I ⊗ |0⟩^a) for every ancilla outcome
/// i, computed by branch walking (one walk per system basis state). For a
/// simultaneous structure these are the channel's Kraus operators.
pub fn branch_blocks(dc: &DynamicCircuit, params: &[f64]) -> Result<Vec<CMatrix>> {
    check_params(dc, params)?;
    let layout = Layout::of(dc);
    let dim = 1usize << dc.n_qubits;
    let (ds, da) = (1usize << dc.s_qubits(), 1usize << dc.a_qubits());
    let mut blocks = vec![CMatrix::zeros(ds, ds); da];
    for p in 0..ds {
        let mut input = vec![ZERO; dim];
        input[layout.phys_index(p, 0)] = Complex64::new(1.0, 0.0);
        accumulate_branches(dc, params, input, &layout, |i, sysvec| {
            for (row, &v) in sysvec.iter().enumerate() {
                blocks[i].set(row, p, v);
            }
        });
    }
    Ok(blocks)
}

/// The unnormalized branch vectors φ̃_i = (I ⊗ ⟨i|) U |0...0⟩ for every
/// ancilla outcome i, starting from all qubits in |0⟩.
pub fn branch_vectors(dc: &DynamicCircuit, params: &[f64]) -> Result<Vec<Vec<Complex64>>> {
    check_params(dc, params)?;
    let layout = Layout::of(dc);
    let dim = 1usize << dc.n_qubits;
    let (ds, da) = (1usize << dc.s_qubits(), 1usize << dc.a_qubits());
    let mut vecs = vec![vec![ZERO; ds]; da];
    let mut input = vec![ZERO; dim];
    input[0] = Complex64::new(1.0, 0.0);
    accumulate_branches(dc, params, input, &layout, |i, sysvec| {
        vecs[i].copy_from_slice(sysvec);
    });
    Ok(vecs)
}

/// Runs the walk and hands each full ancilla outcome's system-space slice
/// to the sink. Ancillas left unmeasured on a path (asymmetric branches)
/// are projected at the end of the circuit, one sub-outcome each.
fn accumulate_branches(
    dc: &DynamicCircuit,
    params: &[f64],
    initial: Vec<Complex64>,
    layout: &Layout,
    mut sink: impl FnMut(usize, &[Complex64]),
) {
    let ds = 1usize << dc.s_qubits();
    let mut sysvec = vec![ZERO; ds];
    walk_circuit(dc, params, initial, &mut |collapsed, state| {
        let residual: Vec<usize> = dc
            .ancillas()
            .iter()
            .copied()
            .filter(|q| !collapsed.iter().any(|(cq, _)| cq == q))
            .collect();
        for r in 0..1usize << residual.len() {
            let mut bits: Vec<(usize, usize)> = collapsed.to_vec();
            for (k, &q) in residual.iter().enumerate() {
                bits.push((q, (r >> (residual.len() - 1 - k)) & 1));
            }
            let i = dc.outcome_index(&bits);
            for p in 0..ds {
                sysvec[p] = state[layout.phys_index(p, i)];
            }
            sink(i, &sysvec);
        }
    });
}

/// Simulates the dynamic circuit on `input` (system qubits; ancillas start
/// in |0⟩), returning one outcome per branch, ordered by outcome index.
pub fn simulate(dc: &DynamicCircuit, params: &[f64], input: &CVector) -> Result<Vec<BranchOutcome>> {
    check_params(dc, params)?;
    let ds = 1usize << dc.s_qubits();
    if input.dim() != ds {
        return Err(DcError::InvalidShape(format!(
            "simulate: input dim {} but system dim is {ds}",
            input.dim()
        )));
    }
    let layout = Layout::of(dc);
    let dim = 1usize << dc.n_qubits;
    let mut initial = vec![ZERO; dim];
    for p in 0..ds {
        initial[layout.phys_index(p, 0)] = input.amplitudes[p];
    }
    let da = 1usize << dc.a_qubits();
    let mut outcomes: Vec<Option<BranchOutcome>> = vec![None; da];
    accumulate_branches(dc, params, initial, &layout, |i, sysvec| {
        let prob: f64 = sysvec.iter().map(|a| a.norm_sqr()).sum();
        let post = if prob > 1e-12 {
            let n = prob.sqrt();
            CVector::from_amplitudes(sysvec.iter().map(|a| a / n).collect())
        } else {
            CVector::from_amplitudes(sysvec.to_vec())
        };
        outcomes[i] = Some(BranchOutcome { outcome_bits: i, probability: prob, post_state: post });
    });
    Ok(outcomes.into_iter().flatten().collect())
}

/// Kraus operators K_j = U_j (I ⊗ ⟨j|) U_b (I ⊗ |0⟩^a) of the channel a
/// simultaneous-measurement circuit applies to the system qubits.
///
/// Only the simultaneous structure is supported; the channel view of the
/// nested placements is not spelled out and is left unimplemented.
pub fn kraus_operators(dc: &DynamicCircuit, params: &[f64]) -> Result<Vec<CMatrix>> {
    if dc.structure != Structure::Simultaneous {
        return Err(DcError::Unsupported(
            "Kraus extraction is only defined for the simultaneous structure".into(),
        ));
    }
    branch_blocks(dc, params)
}

fn check_params(dc: &DynamicCircuit, params: &[f64]) -> Result<()> {
    if params.len() < dc.n_params {
        return Err(DcError::MalformedDynamicCircuit(format!(
            "{} params supplied, tree references {}",
            params.len(),
            dc.n_params
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build, GateKind, ParamCircuit};
    use crate::linalg::{ancilla_block, kron, ONE};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn u3_layer(live: &[usize]) -> ParamCircuit {
        let mut c = ParamCircuit::new(live.len());
        c.push_u3_layer();
        c
    }

    fn random_params(n: usize, rng: &mut impl Rng) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)).collect()
    }

    /// Random segment: a U3 layer plus a few blocks on random pairs.
    fn random_segment(live: &[usize], rng: &mut impl Rng) -> ParamCircuit {
        let mut c = ParamCircuit::new(live.len());
        c.push_u3_layer();
        if live.len() >= 2 {
            for _ in 0..rng.gen_range(0..3) {
                let a = rng.gen_range(0..live.len());
                let mut b = rng.gen_range(0..live.len());
                while b == a {
                    b = rng.gen_range(0..live.len());
                }
                c.push_block(a, b);
            }
        }
        c
    }

    fn random_dc(
        structure: Structure,
        s: usize,
        a: usize,
        rng: &mut impl Rng,
    ) -> (DynamicCircuit, Vec<f64>) {
        // Ancillas at random positions to exercise the layout mapping.
        let n = s + a;
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(rng);
        let mut anc: Vec<usize> = idx.into_iter().take(a).collect();
        anc.sort_unstable();
        let all: Vec<usize> = (0..n).collect();
        let ub = random_segment(&all, rng);
        let dc = match structure {
            Structure::Simultaneous => {
                build::simultaneous(n, &anc, ub, |_, live| u3_layer(live)).unwrap()
            }
            _ => build::nested(
                structure,
                n,
                &anc,
                ub,
                |_, live| u3_layer(live),
                |live| u3_layer(live),
                |_, live| u3_layer(live),
            )
            .unwrap(),
        };
        let params = random_params(dc.n_params, rng);
        (dc, params)
    }

    #[test]
    fn no_measurement_equals_plain_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let all = [0usize, 1];
        let ub = random_segment(&all, &mut rng);
        let dc = build::simultaneous(2, &[], ub.clone(), |_, live| {
            ParamCircuit::new(live.len())
        })
        .unwrap();
        let params = random_params(dc.n_params, &mut rng);
        let u = deferred_unitary(&dc, &params).unwrap();
        assert!(u.max_abs_diff(&ub.evaluate(&params[..ub.n_params])) < 1e-12);
    }

    #[test]
    fn simultaneous_matches_projector_sum() {
        // s=1, a=1, U_b = H⊗H, U_0 = I, U_1 = X:
        // U = Σ_i (U_i ⊗ |i⟩⟨i|)(H⊗H), expanded by hand.
        let mut ub = ParamCircuit::new(2);
        ub.push(GateKind::H, vec![0]);
        ub.push(GateKind::H, vec![1]);
        let dc = build::simultaneous(2, &[1], ub, |out, live| {
            let mut c = ParamCircuit::new(live.len());
            if out == 1 {
                c.push(GateKind::X, vec![0]);
            }
            c
        })
        .unwrap();
        let u = deferred_unitary(&dc, &[]).unwrap();

        let h = GateKind::H.matrix(&[]);
        let x = GateKind::X.matrix(&[]);
        let id = CMatrix::identity(2);
        let p0 = CMatrix::from_fn(2, 2, |i, j| if i == 0 && j == 0 { ONE } else { ZERO });
        let p1 = CMatrix::from_fn(2, 2, |i, j| if i == 1 && j == 1 { ONE } else { ZERO });
        let hh = kron(&h, &h);
        let expect = kron(&id, &p0).matmul(&hh).add(&kron(&x, &p1).matmul(&hh));
        assert!(u.max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn identity_tree_defers_to_identity() {
        let dc = build::nested(
            Structure::SymmetricNested,
            3,
            &[1, 2],
            ParamCircuit::new(3),
            |_, live| ParamCircuit::new(live.len()),
            |live| ParamCircuit::new(live.len()),
            |_, live| ParamCircuit::new(live.len()),
        )
        .unwrap();
        let u = deferred_unitary(&dc, &[]).unwrap();
        assert!(u.max_abs_diff(&CMatrix::identity(8)) < 1e-14);
    }

    #[test]
    fn deferred_is_unitary_for_all_structures() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for structure in [
            Structure::Simultaneous,
            Structure::Independent,
            Structure::AsymmetricNested,
            Structure::SymmetricNested,
        ] {
            for _ in 0..5 {
                let (dc, params) = random_dc(structure, 2, 2, &mut rng);
                let u = deferred_unitary(&dc, &params).unwrap();
                assert!(u.unitarity_error() < 1e-10, "{structure:?} deferred not unitary");
            }
        }
    }

    /// Paper closed forms for two ancillas, assembled by hand from the
    /// segment matrices, with ancillas on the trailing qubits so the math
    /// and physical orderings coincide.
    #[test]
    fn closed_forms_for_two_ancillas() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = 1usize;
        let n = s + 2;
        let anc = [s, s + 1];
        let p: Vec<CMatrix> = (0..2)
            .map(|b| CMatrix::from_fn(2, 2, |i, j| if i == b && j == b { ONE } else { ZERO }))
            .collect();
        let id1 = CMatrix::identity(2);

        for structure in
            [Structure::Independent, Structure::AsymmetricNested, Structure::SymmetricNested]
        {
            // Factories record every segment they hand out, in order.
            let all: Vec<usize> = (0..n).collect();
            let ub = random_segment(&all, &mut rng);
            let mut mids: Vec<ParamCircuit> = Vec::new();
            let mut bases: Vec<ParamCircuit> = Vec::new();
            let mut leaves: Vec<ParamCircuit> = Vec::new();
            let dc = build::nested(
                structure,
                n,
                &anc,
                ub.clone(),
                |_, live| {
                    let c = u3_layer(live);
                    mids.push(c.clone());
                    c
                },
                |live| {
                    let c = u3_layer(live);
                    bases.push(c.clone());
                    c
                },
                |_, live| {
                    let c = u3_layer(live);
                    leaves.push(c.clone());
                    c
                },
            )
            .unwrap();
            let params = random_params(dc.n_params, &mut rng);
            let u = deferred_unitary(&dc, &params).unwrap();

            // Evaluate recorded segments against the same global params.
            // Builders rebase slots in handout order: ub, then mids/bases/
            // leaves in creation order.
            let eval_at = |seg: &ParamCircuit, offset: usize| -> CMatrix {
                let mut c = seg.clone();
                c.offset_slots(offset);
                c.evaluate(&params)
            };
            let ub_m = eval_at(&ub, 0);
            let mut off = ub.n_params;

            let expect = match structure {
                Structure::SymmetricNested => {
                    // U = Σ_i (U_{i+2..} ⊗ |j⟩⟨j| ⊗ I)(U_i ⊗ |i⟩⟨i|) U_b with
                    // fresh leaves per path: creation order is
                    // mid0, (leaf00, leaf01), mid1, (leaf10, leaf11).
                    let m0 = eval_at(&mids[0], off);
                    off += mids[0].n_params;
                    let l00 = eval_at(&leaves[0], off);
                    off += leaves[0].n_params;
                    let l01 = eval_at(&leaves[1], off);
                    off += leaves[1].n_params;
                    let m1 = eval_at(&mids[1], off);
                    off += mids[1].n_params;
                    let l10 = eval_at(&leaves[2], off);
                    off += leaves[2].n_params;
                    let l11 = eval_at(&leaves[3], off);
                    off += leaves[3].n_params;
                    let _ = off;
                    let mut acc = CMatrix::zeros(1 << n, 1 << n);
                    for (mseg, branch_leaves, i) in
                        [(m0, [&l00, &l01], 0usize), (m1, [&l10, &l11], 1usize)]
                    {
                        for (j, leaf) in branch_leaves.into_iter().enumerate() {
                            let term = kron(&kron(leaf, &p[j]), &id1)
                                .matmul(&kron(&mseg, &p[i]))
                                .matmul(&ub_m);
                            acc = acc.add(&term);
                        }
                    }
                    acc
                }
                Structure::Independent => {
                    // U = (Σ_j U_{j+2} ⊗ |j⟩⟨j| ⊗ I)(U_b1 ⊗ I)(Σ_i U_i ⊗ |i⟩⟨i|) U_b0
                    let m0 = eval_at(&mids[0], off);
                    off += mids[0].n_params;
                    let m1 = eval_at(&mids[1], off);
                    off += mids[1].n_params;
                    let b1 = eval_at(&bases[0], off);
                    off += bases[0].n_params;
                    let l0 = eval_at(&leaves[0], off);
                    off += leaves[0].n_params;
                    let l1 = eval_at(&leaves[1], off);
                    off += leaves[1].n_params;
                    let _ = off;
                    let first = kron(&m0, &p[0]).add(&kron(&m1, &p[1]));
                    let second = kron(&b1, &id1);
                    let third = kron(&kron(&l0, &p[0]), &id1)
                        .add(&kron(&kron(&l1, &p[1]), &id1));
                    third.matmul(&second).matmul(&first).matmul(&ub_m)
                }
                Structure::AsymmetricNested => {
                    // U = (Σ_j (U_{j+2} ⊗ |j⟩⟨j| ⊗ I)(U_1 ⊗ |1⟩⟨1|) + U_0 ⊗ |0⟩⟨0|) U_b
                    // Creation order: leaf(0-branch over s+1), mid(1), leaves.
                    let l0w = eval_at(&leaves[0], off); // 0-branch, wide
                    off += leaves[0].n_params;
                    let m1 = eval_at(&mids[0], off);
                    off += mids[0].n_params;
                    let l10 = eval_at(&leaves[1], off);
                    off += leaves[1].n_params;
                    let l11 = eval_at(&leaves[2], off);
                    off += leaves[2].n_params;
                    let _ = off;
                    let zero_term = kron(&l0w, &p[0]);
                    let mut acc = zero_term;
                    for (j, leaf) in [&l10, &l11].into_iter().enumerate() {
                        let term = kron(&kron(leaf, &p[j]), &id1).matmul(&kron(&m1, &p[1]));
                        acc = acc.add(&term);
                    }
                    acc.matmul(&ub_m)
                }
                Structure::Simultaneous => unreachable!(),
            };
            assert!(
                u.max_abs_diff(&expect) < 1e-12,
                "{structure:?} disagrees with its closed form"
            );
        }
    }

    #[test]
    fn simulate_identity_is_trivial() {
        let dc = build::simultaneous(2, &[1], ParamCircuit::new(2), |_, live| {
            ParamCircuit::new(live.len())
        })
        .unwrap();
        let input = CVector::basis(2, 1);
        let outs = simulate(&dc, &[], &input).unwrap();
        assert_eq!(outs.len(), 2);
        assert!((outs[0].probability - 1.0).abs() < 1e-14);
        assert!(outs[1].probability < 1e-14);
        assert!(outs[0].post_state.fidelity(&input) > 1.0 - 1e-14);
    }

    #[test]
    fn deferral_consistency_all_structures() {
        // simulate must agree with projecting the deferred unitary applied
        // to input ⊗ |0⟩^a, for every structure and random circuit.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for structure in [
            Structure::Simultaneous,
            Structure::Independent,
            Structure::AsymmetricNested,
            Structure::SymmetricNested,
        ] {
            for _ in 0..10 {
                let s = rng.gen_range(1..=2);
                let a = rng.gen_range(1..=2);
                let (dc, params) = random_dc(structure, s, a, &mut rng);
                let discrepancy = deferral_discrepancy(&dc, &params, &mut rng);
                assert!(discrepancy < 1e-10, "{structure:?}: {discrepancy}");
            }
        }
    }

    /// Max deviation between the two routes, over a random input.
    pub(crate) fn deferral_discrepancy(
        dc: &DynamicCircuit,
        params: &[f64],
        rng: &mut impl Rng,
    ) -> f64 {
        let ds = 1usize << dc.s_qubits();
        let da = 1usize << dc.a_qubits();
        let raw: Vec<Complex64> = (0..ds)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let input = CVector::from_amplitudes(raw).normalized();

        let outs = simulate(dc, params, &input).unwrap();

        // Route two: deferred unitary on input ⊗ |0^a⟩, then project.
        let u = deferred_unitary(dc, params).unwrap();
        let mut full = vec![ZERO; ds * da];
        for p in 0..ds {
            full[p * da] = input.amplitudes[p];
        }
        let evolved = u.mul_vec(&full);
        let mut worst: f64 = 0.0;
        let mut total = 0.0;
        for i in 0..da {
            let slice: Vec<Complex64> = (0..ds).map(|p| evolved[p * da + i]).collect();
            let prob: f64 = slice.iter().map(|x| x.norm_sqr()).sum();
            total += prob;
            worst = worst.max((prob - outs[i].probability).abs());
            if prob > 1e-9 {
                let post = CVector::from_amplitudes(slice).normalized();
                // States match up to global phase.
                let fid = post.fidelity(&outs[i].post_state);
                worst = worst.max((1.0 - fid).abs());
            }
        }
        worst = worst.max((total - 1.0).abs());
        worst
    }

    #[test]
    fn kraus_completeness_and_block_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..10 {
            let (dc, params) = random_dc(Structure::Simultaneous, 2, 2, &mut rng);
            let kraus = kraus_operators(&dc, &params).unwrap();
            let ds = 1usize << dc.s_qubits();
            let mut sum = CMatrix::zeros(ds, ds);
            for k in &kraus {
                sum = sum.add(&k.dagger().matmul(k));
            }
            assert!(sum.max_abs_diff(&CMatrix::identity(ds)) < 1e-10);

            let u = deferred_unitary(&dc, &params).unwrap();
            for (j, k) in kraus.iter().enumerate() {
                let blk = ancilla_block(&u, dc.s_qubits(), dc.a_qubits(), j, 0).unwrap();
                assert!(k.max_abs_diff(&blk) < 1e-12);
            }
        }
    }

    #[test]
    fn kraus_identity_circuit() {
        let dc = build::simultaneous(3, &[1, 2], ParamCircuit::new(3), |_, live| {
            ParamCircuit::new(live.len())
        })
        .unwrap();
        let kraus = kraus_operators(&dc, &[]).unwrap();
        assert!(kraus[0].max_abs_diff(&CMatrix::identity(2)) < 1e-14);
        for k in &kraus[1..] {
            assert!(k.max_abs_diff(&CMatrix::zeros(2, 2)) < 1e-14);
        }
    }

    #[test]
    fn kraus_rejects_nested_structures() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let (dc, params) = random_dc(Structure::SymmetricNested, 1, 2, &mut rng);
        assert!(matches!(
            kraus_operators(&dc, &params),
            Err(DcError::Unsupported(_))
        ));
    }

    #[test]
    fn probability_completeness_nested() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for structure in [Structure::AsymmetricNested, Structure::Independent] {
            let (dc, params) = random_dc(structure, 2, 2, &mut rng);
            let input = CVector::basis(4, 0);
            let outs = simulate(&dc, &params, &input).unwrap();
            let total: f64 = outs.iter().map(|o| o.probability).sum();
            assert!((total - 1.0).abs() < 1e-10);
            assert_eq!(outs.len(), 4);
        }
    }
}
