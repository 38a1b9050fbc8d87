//! Gate library: kinds, parameter arity, and unitary matrices.

use num_complex::Complex64;

use crate::error::{DcError, Result};
use crate::linalg::{CMatrix, ONE, ZERO};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Supported gate kinds. `Custom` carries an explicit unitary.
#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    U3,
    Cnot,
    Cz,
    Cs,
    Rzz,
    Rxx,
    Ryy,
    H,
    X,
    Ry,
    Custom(CMatrix),
}

impl GateKind {
    /// Wire-format name of the kind.
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::U3 => "U3",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
            GateKind::Cs => "CS",
            GateKind::Rzz => "RZZ",
            GateKind::Rxx => "RXX",
            GateKind::Ryy => "RYY",
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Ry => "RY",
            GateKind::Custom(_) => "custom-matrix",
        }
    }

    /// Parses a wire-format name; `custom-matrix` needs its unitary.
    pub fn from_name(name: &str, matrix: Option<CMatrix>) -> Result<Self> {
        Ok(match name {
            "U3" => GateKind::U3,
            "CNOT" => GateKind::Cnot,
            "CZ" => GateKind::Cz,
            "CS" => GateKind::Cs,
            "RZZ" => GateKind::Rzz,
            "RXX" => GateKind::Rxx,
            "RYY" => GateKind::Ryy,
            "H" => GateKind::H,
            "X" => GateKind::X,
            "RY" => GateKind::Ry,
            "custom-matrix" => GateKind::Custom(matrix.ok_or_else(|| {
                DcError::Parse("custom-matrix placement missing its matrix".into())
            })?),
            other => return Err(DcError::Parse(format!("unknown gate kind '{other}'"))),
        })
    }
    /// Number of free parameters the gate consumes.
    pub fn param_count(&self) -> usize {
        match self {
            GateKind::U3 => 3,
            GateKind::Rzz | GateKind::Rxx | GateKind::Ryy | GateKind::Ry => 1,
            _ => 0,
        }
    }

    /// Number of qubits the gate acts on.
    pub fn qubit_count(&self) -> usize {
        match self {
            GateKind::U3 | GateKind::H | GateKind::X | GateKind::Ry => 1,
            GateKind::Custom(m) => m.rows().trailing_zeros() as usize,
            _ => 2,
        }
    }

    /// The unitary for the given parameter values (length = `param_count`).
    pub fn matrix(&self, params: &[f64]) -> CMatrix {
        match self {
            GateKind::U3 => u3_matrix(params[0], params[1], params[2]),
            GateKind::Cnot => CMatrix::from_rows(vec![
                vec![ONE, ZERO, ZERO, ZERO],
                vec![ZERO, ONE, ZERO, ZERO],
                vec![ZERO, ZERO, ZERO, ONE],
                vec![ZERO, ZERO, ONE, ZERO],
            ]),
            GateKind::Cz => diag2q([ONE, ONE, ONE, -ONE]),
            GateKind::Cs => diag2q([ONE, ONE, ONE, c(0.0, 1.0)]),
            GateKind::Rzz => {
                let (p, m) = (phase(params[0] / 2.0), phase(-params[0] / 2.0));
                diag2q([m, p, p, m])
            }
            GateKind::Rxx => {
                let (cc, ss) = ((params[0] / 2.0).cos(), (params[0] / 2.0).sin());
                let (d, o) = (c(cc, 0.0), c(0.0, -ss));
                CMatrix::from_rows(vec![
                    vec![d, ZERO, ZERO, o],
                    vec![ZERO, d, o, ZERO],
                    vec![ZERO, o, d, ZERO],
                    vec![o, ZERO, ZERO, d],
                ])
            }
            GateKind::Ryy => {
                let (cc, ss) = ((params[0] / 2.0).cos(), (params[0] / 2.0).sin());
                let (d, o, op) = (c(cc, 0.0), c(0.0, -ss), c(0.0, ss));
                CMatrix::from_rows(vec![
                    vec![d, ZERO, ZERO, op],
                    vec![ZERO, d, o, ZERO],
                    vec![ZERO, o, d, ZERO],
                    vec![op, ZERO, ZERO, d],
                ])
            }
            GateKind::H => {
                let h = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                CMatrix::from_rows(vec![vec![h, h], vec![h, -h]])
            }
            GateKind::X => CMatrix::from_rows(vec![vec![ZERO, ONE], vec![ONE, ZERO]]),
            GateKind::Ry => {
                let (cc, ss) = ((params[0] / 2.0).cos(), (params[0] / 2.0).sin());
                CMatrix::from_rows(vec![
                    vec![c(cc, 0.0), c(-ss, 0.0)],
                    vec![c(ss, 0.0), c(cc, 0.0)],
                ])
            }
            GateKind::Custom(m) => m.clone(),
        }
    }
}

fn phase(t: f64) -> Complex64 {
    c(t.cos(), t.sin())
}

fn diag2q(d: [Complex64; 4]) -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    for (i, v) in d.into_iter().enumerate() {
        m.set(i, i, v);
    }
    m
}

/// U3(θ,φ,λ) = [[cos(θ/2), −e^{iλ}sin(θ/2)], [e^{iφ}sin(θ/2), e^{i(φ+λ)}cos(θ/2)]].
pub fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> CMatrix {
    let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    CMatrix::from_rows(vec![
        vec![c(ct, 0.0), -phase(lambda) * st],
        vec![phase(phi) * st, phase(phi + lambda) * ct],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn u3_pi_is_x_up_to_phase() {
        let m = u3_matrix(PI, 0.0, PI);
        let x = GateKind::X.matrix(&[]);
        assert!(m.phase_aligned_diff(&x) < 1e-12);
    }

    #[test]
    fn all_kinds_are_unitary() {
        let kinds = [
            GateKind::U3,
            GateKind::Cnot,
            GateKind::Cz,
            GateKind::Cs,
            GateKind::Rzz,
            GateKind::Rxx,
            GateKind::Ryy,
            GateKind::H,
            GateKind::X,
            GateKind::Ry,
        ];
        let params = [0.7, -1.3, 2.1];
        for k in kinds {
            let m = k.matrix(&params[..k.param_count()]);
            assert!(m.unitarity_error() < 1e-12, "{k:?} not unitary");
        }
    }

    #[test]
    fn rzz_matches_kron_of_z_phases() {
        // Rzz(θ) = exp(−iθ/2 Z⊗Z): diagonal phases by parity.
        let t = 0.9;
        let m = GateKind::Rzz.matrix(&[t]);
        for (idx, parity) in [(0usize, 0.0), (1, 1.0), (2, 1.0), (3, 0.0)] {
            let expect = phase((t / 2.0) * if parity > 0.5 { 1.0 } else { -1.0 });
            assert!((m.get(idx, idx) - expect).norm() < 1e-14);
        }
    }
}
