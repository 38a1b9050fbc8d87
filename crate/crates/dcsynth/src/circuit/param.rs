//! Parameterized circuit IR and its statevector/unitary evaluation.
//!
//! Qubit 0 is the most-significant bit of a state index. Placements apply in
//! list order: later placements act later (left-multiplied as matrices).

use num_complex::Complex64;

use super::gates::GateKind;
use crate::linalg::{CMatrix, ZERO};

/// One gate at fixed qubit positions, with its parameter slots.
#[derive(Debug, Clone, PartialEq)]
pub struct GatePlacement {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub param_slots: Vec<usize>,
}

/// A sequence of gate placements over `n_qubits` with free real parameters.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamCircuit {
    pub n_qubits: usize,
    pub placements: Vec<GatePlacement>,
    pub n_params: usize,
}

impl ParamCircuit {
    pub fn new(n_qubits: usize) -> Self {
        ParamCircuit { n_qubits, placements: Vec::new(), n_params: 0 }
    }

    /// Appends a gate, allocating fresh parameter slots.
    pub fn push(&mut self, kind: GateKind, qubits: Vec<usize>) -> &mut Self {
        let k = kind.param_count();
        let slots = (self.n_params..self.n_params + k).collect();
        self.n_params += k;
        self.placements.push(GatePlacement { kind, qubits, param_slots: slots });
        self
    }

    /// Appends a gate bound to explicit (possibly shared) slots.
    pub fn push_with_slots(&mut self, kind: GateKind, qubits: Vec<usize>, slots: Vec<usize>) {
        debug_assert_eq!(slots.len(), kind.param_count());
        for &s in &slots {
            self.n_params = self.n_params.max(s + 1);
        }
        self.placements.push(GatePlacement { kind, qubits, param_slots: slots });
    }

    /// One U3 on every qubit.
    pub fn push_u3_layer(&mut self) -> &mut Self {
        for q in 0..self.n_qubits {
            self.push(GateKind::U3, vec![q]);
        }
        self
    }

    /// The synthesis building block: CNOT on (a,b) followed by a U3 on each.
    pub fn push_block(&mut self, a: usize, b: usize) -> &mut Self {
        self.push(GateKind::Cnot, vec![a, b]);
        self.push(GateKind::U3, vec![a]);
        self.push(GateKind::U3, vec![b]);
        self
    }

    /// Shifts every slot index by `offset` (for merging into a global
    /// vector), then recomputes `n_params` from the referenced slots.
    pub fn offset_slots(&mut self, offset: usize) {
        for p in &mut self.placements {
            for s in &mut p.param_slots {
                *s += offset;
            }
        }
        self.n_params = self
            .placements
            .iter()
            .flat_map(|p| &p.param_slots)
            .map(|&s| s + 1)
            .max()
            .unwrap_or(0);
    }

    pub fn count_2q(&self) -> usize {
        self.placements.iter().filter(|p| p.qubits.len() > 1).count()
    }

    pub fn count_1q(&self) -> usize {
        self.placements.iter().filter(|p| p.qubits.len() == 1).count()
    }

    /// Applies the circuit to a state over `n_global` qubits, mapping local
    /// qubit k to `qubit_map[k]`.
    pub fn apply_mapped(
        &self,
        state: &mut [Complex64],
        n_global: usize,
        qubit_map: &[usize],
        params: &[f64],
    ) {
        debug_assert_eq!(qubit_map.len(), self.n_qubits);
        let mut scratch = [ZERO; 16];
        for p in &self.placements {
            let vals: Vec<f64> = p.param_slots.iter().map(|&s| params[s]).collect();
            let m = p.kind.matrix(&vals);
            let qs: Vec<usize> = p.qubits.iter().map(|&q| qubit_map[q]).collect();
            apply_unitary(state, n_global, &m, &qs, &mut scratch);
        }
    }

    /// Applies the circuit in place to a state over its own qubits.
    pub fn apply(&self, state: &mut [Complex64], params: &[f64]) {
        let map: Vec<usize> = (0..self.n_qubits).collect();
        self.apply_mapped(state, self.n_qubits, &map, params);
    }

    /// Evaluates the circuit to its unitary matrix.
    pub fn evaluate(&self, params: &[f64]) -> CMatrix {
        let dim = 1usize << self.n_qubits;
        let cols: Vec<Vec<Complex64>> = (0..dim)
            .map(|j| {
                let mut state = vec![ZERO; dim];
                state[j] = Complex64::new(1.0, 0.0);
                self.apply(&mut state, params);
                state
            })
            .collect();
        CMatrix::from_columns(&cols)
    }
}

/// Applies a k-qubit unitary to the given global qubits of `state`.
///
/// The gate's own basis orders its qubit list most-significant first.
pub fn apply_unitary(
    state: &mut [Complex64],
    n: usize,
    mat: &CMatrix,
    qubits: &[usize],
    scratch: &mut [Complex64],
) {
    match qubits {
        [q] => apply_1q(state, n, mat, *q),
        [q1, q2] => apply_2q(state, n, mat, *q1, *q2),
        _ => apply_kq(state, n, mat, qubits, scratch),
    }
}

fn apply_1q(state: &mut [Complex64], n: usize, m: &CMatrix, q: usize) {
    let pos = n - 1 - q;
    let stride = 1usize << pos;
    let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
    let half = state.len() >> 1;
    for k in 0..half {
        let i0 = ((k >> pos) << (pos + 1)) | (k & (stride - 1));
        let i1 = i0 | stride;
        let (x, y) = (state[i0], state[i1]);
        state[i0] = a * x + b * y;
        state[i1] = c * x + d * y;
    }
}

fn apply_2q(state: &mut [Complex64], n: usize, m: &CMatrix, q1: usize, q2: usize) {
    let p1 = n - 1 - q1;
    let p2 = n - 1 - q2;
    let (hi, lo) = (p1.max(p2), p1.min(p2));
    let (s1, s2) = (1usize << p1, 1usize << p2);
    let quarter = state.len() >> 2;
    for k in 0..quarter {
        // Deposit zeros at bit positions lo and hi.
        let t = ((k >> lo) << (lo + 1)) | (k & ((1 << lo) - 1));
        let base = ((t >> hi) << (hi + 1)) | (t & ((1 << hi) - 1));
        let i = [base, base | s2, base | s1, base | s1 | s2];
        let v = [state[i[0]], state[i[1]], state[i[2]], state[i[3]]];
        for r in 0..4 {
            let mut acc = ZERO;
            for t in 0..4 {
                let g = m.get(r, t);
                if g != ZERO {
                    acc += g * v[t];
                }
            }
            state[i[r]] = acc;
        }
    }
}

fn apply_kq(state: &mut [Complex64], n: usize, m: &CMatrix, qubits: &[usize], scratch: &mut [Complex64]) {
    let k = qubits.len();
    let dk = 1usize << k;
    debug_assert!(scratch.len() >= dk);
    let positions: Vec<usize> = qubits.iter().map(|&q| n - 1 - q).collect();
    let mask: usize = positions.iter().map(|&p| 1usize << p).sum();
    let dim = state.len();
    let offsets: Vec<usize> = (0..dk)
        .map(|t| {
            let mut off = 0usize;
            for (bi, &p) in positions.iter().enumerate() {
                if (t >> (k - 1 - bi)) & 1 == 1 {
                    off |= 1 << p;
                }
            }
            off
        })
        .collect();
    for base in 0..dim {
        if base & mask != 0 {
            continue;
        }
        for t in 0..dk {
            scratch[t] = state[base | offsets[t]];
        }
        for (r, &off) in offsets.iter().enumerate() {
            let mut acc = ZERO;
            for t in 0..dk {
                acc += m.get(r, t) * scratch[t];
            }
            state[base | off] = acc;
        }
    }
}

/// Zeroes every amplitude where `qubit` does not carry `bit`.
pub fn project_qubit(state: &mut [Complex64], n: usize, qubit: usize, bit: usize) {
    let pos = n - 1 - qubit;
    for (idx, amp) in state.iter_mut().enumerate() {
        if (idx >> pos) & 1 != bit {
            *amp = ZERO;
        }
    }
}
