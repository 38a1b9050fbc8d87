//! Named target states and unitaries used across the experiments.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::circuit::{GateKind, ParamCircuit};
use crate::error::{DcError, Result};
use crate::linalg::{CMatrix, CVector, ONE};

/// A synthesis target: either a state on the system qubits or a unitary
/// over them.
#[derive(Debug, Clone)]
pub enum Target {
    State(CVector),
    Unitary(CMatrix),
}

impl Target {
    pub fn system_qubits(&self) -> usize {
        let dim = match self {
            Target::State(v) => v.dim(),
            Target::Unitary(m) => m.rows(),
        };
        dim.trailing_zeros() as usize
    }
}

/// Builds a named target over `n` qubits. Long-range gates act on qubits
/// (0, n−1) with identity in between; `angle` feeds the rotation families
/// (default π/3 when omitted).
///
/// Accepted names: `ghz`, `w`, `dicke:k`, `cnot-long`, `cz-long`,
/// `cs-long`, `rzz-long`, `rxx-long`, `ryy-long`, `toffoli`, `fanout`,
/// `fredkin`, `generic2q:seed`.
pub fn named_target(name: &str, n: usize, angle: Option<f64>) -> Result<Target> {
    let theta = angle.unwrap_or(std::f64::consts::FRAC_PI_3);
    match name {
        "ghz" => Ok(Target::State(ghz_state(n)?)),
        "w" => Ok(Target::State(dicke_state(n, 1)?)),
        "toffoli" => Ok(Target::Unitary(toffoli())),
        "fanout" => Ok(Target::Unitary(fanout())),
        "fredkin" => Ok(Target::Unitary(fredkin())),
        "cnot-long" => long_range(GateKind::Cnot.matrix(&[]), n),
        "cz-long" => long_range(GateKind::Cz.matrix(&[]), n),
        "cs-long" => long_range(GateKind::Cs.matrix(&[]), n),
        "rzz-long" => long_range(GateKind::Rzz.matrix(&[theta]), n),
        "rxx-long" => long_range(GateKind::Rxx.matrix(&[theta]), n),
        "ryy-long" => long_range(GateKind::Ryy.matrix(&[theta]), n),
        _ => {
            if let Some(k) = name.strip_prefix("dicke:") {
                let k: usize = k
                    .parse()
                    .map_err(|_| DcError::InvalidTarget(format!("bad dicke weight '{k}'")))?;
                return Ok(Target::State(dicke_state(n, k)?));
            }
            if let Some(seed) = name.strip_prefix("generic2q") {
                let seed: u64 = match seed.strip_prefix(':') {
                    Some(s) => s
                        .parse()
                        .map_err(|_| DcError::InvalidTarget(format!("bad seed '{s}'")))?,
                    None => 0,
                };
                return long_range(random_two_qubit_unitary(seed), n);
            }
            Err(DcError::InvalidTarget(format!("unknown target '{name}'")))
        }
    }
}

/// (|0...0⟩ + |1...1⟩)/√2.
pub fn ghz_state(n: usize) -> Result<CVector> {
    if n == 0 {
        return Err(DcError::InvalidTarget("ghz needs n ≥ 1".into()));
    }
    let dim = 1usize << n;
    let mut v = CVector::zeros(dim);
    let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v.amplitudes[0] = amp;
    v.amplitudes[dim - 1] = amp;
    Ok(v)
}

/// Uniform superposition of all Hamming-weight-k basis states; k = 1 is
/// the W state.
pub fn dicke_state(n: usize, k: usize) -> Result<CVector> {
    if n == 0 || k > n {
        return Err(DcError::InvalidTarget(format!("dicke k={k} invalid for n={n}")));
    }
    let dim = 1usize << n;
    let idx: Vec<usize> = (0..dim).filter(|x| x.count_ones() as usize == k).collect();
    let amp = Complex64::new(1.0 / (idx.len() as f64).sqrt(), 0.0);
    let mut v = CVector::zeros(dim);
    for i in idx {
        v.amplitudes[i] = amp;
    }
    Ok(v)
}

fn long_range(gate: CMatrix, n: usize) -> Result<Target> {
    if n < 2 {
        return Err(DcError::InvalidTarget("long-range gates need n ≥ 2".into()));
    }
    Ok(Target::Unitary(embed_two_qubit(&gate, n, 0, n - 1)))
}

/// Embeds a 2-qubit gate at the given qubit positions of an n-qubit space.
pub fn embed_two_qubit(gate: &CMatrix, n: usize, a: usize, b: usize) -> CMatrix {
    let mut c = ParamCircuit::new(n);
    c.push(GateKind::Custom(gate.clone()), vec![a, b]);
    c.evaluate(&[])
}

/// Toffoli: flips qubit 2 when qubits 0 and 1 are set.
pub fn toffoli() -> CMatrix {
    permutation(&[0, 1, 2, 3, 4, 5, 7, 6])
}

/// Fanout: copies qubit 0 onto qubits 1 and 2 (CNOT(0→1)·CNOT(0→2)).
pub fn fanout() -> CMatrix {
    permutation(&[0, 1, 2, 3, 7, 6, 5, 4])
}

/// Fredkin: swaps qubits 1 and 2 when qubit 0 is set.
pub fn fredkin() -> CMatrix {
    permutation(&[0, 1, 2, 3, 4, 6, 5, 7])
}

fn permutation(map: &[usize]) -> CMatrix {
    let d = map.len();
    let mut m = CMatrix::zeros(d, d);
    for (col, &row) in map.iter().enumerate() {
        m.set(row, col, ONE);
    }
    m
}

/// A seeded generic 2-qubit unitary: three dressed CNOTs, which reach all
/// of U(4) up to phase.
pub fn random_two_qubit_unitary(seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x5851f42d4c957f2d));
    let mut c = ParamCircuit::new(2);
    c.push_u3_layer();
    for _ in 0..3 {
        c.push_block(0, 1);
    }
    let params: Vec<f64> = (0..c.n_params)
        .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
        .collect();
    c.evaluate(&params)
}
