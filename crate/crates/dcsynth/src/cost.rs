//! Cost functions for dynamic-circuit synthesis.
//!
//! All costs are normalized to [0, 1] and faithful: zero exactly when the
//! circuit implements its target (up to global phase, and up to the ancilla
//! state for unitary preparation).
//!
//! - `cost_state`: state preparation, summed branch fidelities.
//! - `cost_dyn1`: unitary preparation with an explicit ancilla state W|0⟩.
//! - `cost_dyn2`: unitary preparation with W optimized out analytically.
//! - `cost_sub`: plain subspace-restricted Hilbert-Schmidt distance.
//! - `cost_bqskit0`: Hilbert-Schmidt distance with projected initial qubits.
//! - `channel_trace_cost`: the Kraus-channel route to `cost_dyn2`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::circuit::DynamicCircuit;
use crate::deferral::{branch_blocks, branch_vectors, deferred_unitary};
use crate::error::{DcError, Result};
use crate::linalg::{CMatrix, CVector};

/// How the ancilla reference state W|0⟩^a is parameterized in `cost_dyn1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AncillaPolicy {
    /// One U3 per ancilla qubit (product-state W), 3a parameters. Fully
    /// general for a single ancilla.
    FreeUnitaryW,
    /// W = D·H^{⊗a} with D a diagonal of phases: 2^a parameters, all
    /// outcome amplitudes pinned to magnitude 2^{-a/2}.
    DiagonalTimesHadamard,
    /// W = H^{⊗a}, no parameters.
    FixedEqualSuperposition,
}

impl AncillaPolicy {
    pub fn param_count(&self, a_qubits: usize) -> usize {
        match self {
            AncillaPolicy::FreeUnitaryW => 3 * a_qubits,
            AncillaPolicy::DiagonalTimesHadamard => 1 << a_qubits,
            AncillaPolicy::FixedEqualSuperposition => 0,
        }
    }

    /// The amplitudes α_i = (W|0⟩^a)_i under this policy.
    pub fn alpha(&self, a_qubits: usize, w_params: &[f64]) -> Vec<Complex64> {
        let da = 1usize << a_qubits;
        match self {
            AncillaPolicy::FreeUnitaryW => {
                let mut alpha = vec![Complex64::new(1.0, 0.0); 1];
                for k in 0..a_qubits {
                    let (t, p, l) =
                        (w_params[3 * k], w_params[3 * k + 1], w_params[3 * k + 2]);
                    let col = crate::circuit::u3_matrix(t, p, l);
                    let amp0 = col.get(0, 0);
                    let amp1 = col.get(1, 0);
                    let mut next = Vec::with_capacity(alpha.len() * 2);
                    for &x in &alpha {
                        next.push(x * amp0);
                        next.push(x * amp1);
                    }
                    alpha = next;
                }
                alpha
            }
            AncillaPolicy::DiagonalTimesHadamard => {
                let norm = 1.0 / (da as f64).sqrt();
                (0..da)
                    .map(|i| Complex64::from_polar(norm, w_params[i]))
                    .collect()
            }
            AncillaPolicy::FixedEqualSuperposition => {
                let norm = 1.0 / (da as f64).sqrt();
                vec![Complex64::new(norm, 0.0); da]
            }
        }
    }
}

/// Which cost a synthesis run minimizes, plus its target data.
#[derive(Debug, Clone)]
pub enum CostKind {
    StateDc,
    Dyn1,
    Dyn2,
    Sub,
    Bqskit0,
    Hs,
}

/// A cost function bound to its target. Exactly one of `target_state` /
/// `target_unitary` is set, matching the kind.
#[derive(Debug, Clone)]
pub struct CostSpec {
    pub kind: CostKind,
    pub target_state: Option<CVector>,
    pub target_unitary: Option<CMatrix>,
    pub ancilla_policy: AncillaPolicy,
    /// Qubits projected onto |0⟩⟨0| by f_0 (Bqskit0 only; physical indices).
    pub f0_qubits: Vec<usize>,
    /// Fixed W parameters for Dyn1 sweeps; when `None` the instantiater
    /// optimizes the policy's parameters alongside the circuit's.
    pub fixed_w: Option<Vec<f64>>,
}

impl CostSpec {
    pub fn state(target: CVector) -> Self {
        CostSpec {
            kind: CostKind::StateDc,
            target_state: Some(target),
            target_unitary: None,
            ancilla_policy: AncillaPolicy::DiagonalTimesHadamard,
            f0_qubits: Vec::new(),
            fixed_w: None,
        }
    }

    pub fn dyn2(target: CMatrix) -> Self {
        CostSpec {
            kind: CostKind::Dyn2,
            target_state: None,
            target_unitary: Some(target),
            ancilla_policy: AncillaPolicy::DiagonalTimesHadamard,
            f0_qubits: Vec::new(),
            fixed_w: None,
        }
    }

    pub fn dyn1(target: CMatrix, policy: AncillaPolicy) -> Self {
        CostSpec {
            kind: CostKind::Dyn1,
            target_state: None,
            target_unitary: Some(target),
            ancilla_policy: policy,
            f0_qubits: Vec::new(),
            fixed_w: None,
        }
    }

    pub fn bqskit0(target: CMatrix, f0_qubits: Vec<usize>) -> Self {
        CostSpec {
            kind: CostKind::Bqskit0,
            target_state: None,
            target_unitary: Some(target),
            ancilla_policy: AncillaPolicy::FixedEqualSuperposition,
            f0_qubits,
            fixed_w: None,
        }
    }

    pub fn hs(target: CMatrix) -> Self {
        CostSpec {
            kind: CostKind::Hs,
            target_state: None,
            target_unitary: Some(target),
            ancilla_policy: AncillaPolicy::FixedEqualSuperposition,
            f0_qubits: Vec::new(),
            fixed_w: None,
        }
    }

    /// Extra parameters appended after the circuit's own (the W parameters
    /// of a Dyn1 spec unless they are pinned).
    pub fn extra_params(&self, dc: &DynamicCircuit) -> usize {
        match (&self.kind, &self.fixed_w) {
            (CostKind::Dyn1, None) => self.ancilla_policy.param_count(dc.a_qubits()),
            _ => 0,
        }
    }

    /// Evaluates the cost; `params` holds the circuit parameters followed
    /// by any W parameters.
    pub fn evaluate(&self, dc: &DynamicCircuit, params: &[f64]) -> Result<f64> {
        match self.kind {
            CostKind::StateDc => {
                let t = self.target_state.as_ref().ok_or_else(|| {
                    DcError::InvalidShape("state cost needs a target state".into())
                })?;
                cost_state(dc, &params[..dc.n_params], t)
            }
            CostKind::Dyn1 => {
                let v = self.unitary()?;
                let w_params: Vec<f64> = match &self.fixed_w {
                    Some(w) => w.clone(),
                    None => params[dc.n_params..].to_vec(),
                };
                cost_dyn1(dc, &params[..dc.n_params], v, &w_params, self.ancilla_policy)
            }
            CostKind::Dyn2 => cost_dyn2(dc, &params[..dc.n_params], self.unitary()?),
            CostKind::Sub => {
                let ut = self.unitary()?;
                let u = deferred_unitary(dc, &params[..dc.n_params])?;
                cost_sub(&u, ut, dc.s_qubits(), dc.a_qubits())
            }
            CostKind::Bqskit0 => {
                let v = self.unitary()?;
                let u = deferred_unitary(dc, &params[..dc.n_params])?;
                cost_bqskit0(&u, v, &self.f0_qubits)
            }
            CostKind::Hs => {
                let v = self.unitary()?;
                let u = deferred_unitary(dc, &params[..dc.n_params])?;
                cost_hs(&u, v)
            }
        }
    }

    fn unitary(&self) -> Result<&CMatrix> {
        self.target_unitary
            .as_ref()
            .ok_or_else(|| DcError::InvalidShape("unitary cost needs a target unitary".into()))
    }
}

/// State-preparation cost: 1 − Σ_i |⟨T ⊗ i | φ_i⟩|² with φ_i the
/// unnormalized branch states.
pub fn cost_state(dc: &DynamicCircuit, params: &[f64], target: &CVector) -> Result<f64> {
    let ds = 1usize << dc.s_qubits();
    if target.dim() != ds {
        return Err(DcError::InvalidShape(format!(
            "target dim {} but system dim is {ds}",
            target.dim()
        )));
    }
    let branches = branch_vectors(dc, params)?;
    let mut overlap = 0.0;
    for phi in &branches {
        let a: Complex64 = target
            .amplitudes
            .iter()
            .zip(phi)
            .map(|(t, x)| t.conj() * x)
            .sum();
        overlap += a.norm_sqr();
    }
    Ok(1.0 - overlap)
}

/// The branch traces T_i = Tr(V† U_{i,0}).
fn branch_traces(dc: &DynamicCircuit, params: &[f64], v: &CMatrix) -> Result<Vec<Complex64>> {
    let ds = 1usize << dc.s_qubits();
    if v.rows() != ds || v.cols() != ds {
        return Err(DcError::InvalidShape(format!(
            "target unitary is {}x{}, system dim is {ds}",
            v.rows(),
            v.cols()
        )));
    }
    let blocks = branch_blocks(dc, params)?;
    Ok(blocks
        .iter()
        .map(|k| {
            let mut t = Complex64::new(0.0, 0.0);
            for (kv, vv) in k.entries().iter().zip(v.entries()) {
                t += vv.conj() * kv;
            }
            t
        })
        .collect())
}

/// Type-1 unitary cost: 1 − |Tr(f₀ (V ⊗ W)† U)| / 2^s with W given by the
/// policy's parameters.
pub fn cost_dyn1(
    dc: &DynamicCircuit,
    params: &[f64],
    v: &CMatrix,
    w_params: &[f64],
    policy: AncillaPolicy,
) -> Result<f64> {
    let traces = branch_traces(dc, params, v)?;
    let alpha = policy.alpha(dc.a_qubits(), w_params);
    let acc: Complex64 =
        alpha.iter().zip(&traces).map(|(a, t)| a.conj() * t).sum();
    Ok(1.0 - acc.norm() / (1usize << dc.s_qubits()) as f64)
}

/// Type-1 cost at the analytically optimal W: 1 − |T⃗| / 2^s.
pub fn cost_dyn1_opt_w(dc: &DynamicCircuit, params: &[f64], v: &CMatrix) -> Result<f64> {
    let traces = branch_traces(dc, params, v)?;
    let norm = traces.iter().map(|t| t.norm_sqr()).sum::<f64>().sqrt();
    Ok(1.0 - norm / (1usize << dc.s_qubits()) as f64)
}

/// A concrete unitary W whose first column realizes the optimal ancilla
/// state α_c = T⃗ / |T⃗| (Gram-Schmidt completion).
pub fn analytic_w(dc: &DynamicCircuit, params: &[f64], v: &CMatrix) -> Result<CMatrix> {
    let traces = branch_traces(dc, params, v)?;
    let norm = traces.iter().map(|t| t.norm_sqr()).sum::<f64>().sqrt();
    let da = traces.len();
    if norm < 1e-300 {
        return Ok(CMatrix::identity(da));
    }
    let alpha: Vec<Complex64> = traces.iter().map(|t| t / norm).collect();
    let mut cols: Vec<Vec<Complex64>> = vec![alpha];
    // Complete with standard basis vectors, orthonormalizing.
    for k in 0..da {
        if cols.len() == da {
            break;
        }
        let mut v: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); da];
        v[k] = Complex64::new(1.0, 0.0);
        for u in &cols {
            let ov: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= ov * y;
            }
        }
        let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-8 {
            for x in v.iter_mut() {
                *x /= n;
            }
            cols.push(v);
        }
    }
    Ok(CMatrix::from_columns(&cols))
}

/// Type-2 unitary cost: 1 − (1/4^s) Σ_i |Tr(U_{i,0} V†)|².
pub fn cost_dyn2(dc: &DynamicCircuit, params: &[f64], v: &CMatrix) -> Result<f64> {
    let traces = branch_traces(dc, params, v)?;
    let s = dc.s_qubits();
    let total: f64 = traces.iter().map(|t| t.norm_sqr()).sum();
    Ok(1.0 - total / 4f64.powi(s as i32))
}

/// Subspace cost: 1 − (1/2^s) |Tr(f₀ U_T† U)| over the ancilla-|0⟩ input
/// subspace, with the global phase optimized out by the absolute value.
pub fn cost_sub(u: &CMatrix, u_t: &CMatrix, s: usize, a: usize) -> Result<f64> {
    let d = 1usize << (s + a);
    if u.rows() != d || u.cols() != d || u_t.rows() != d || u_t.cols() != d {
        return Err(DcError::InvalidShape(format!(
            "cost_sub: expected {d}x{d} operands"
        )));
    }
    let da = 1usize << a;
    // Tr(f0 U_T† U) = Σ_p ⟨U_T e_{p,0}, U e_{p,0}⟩: column dot products on
    // the ancilla-0 columns.
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..1usize << s {
        let j = p * da;
        for r in 0..d {
            acc += u_t.get(r, j).conj() * u.get(r, j);
        }
    }
    Ok(1.0 - acc.norm() / (1usize << s) as f64)
}

/// Projected-initial-state cost: 1 − |Tr(f₀ U V†)| / Tr(f₀) with f₀ the
/// projector onto |0⟩ for `f0_qubits` (any positions) and identity
/// elsewhere.
pub fn cost_bqskit0(u: &CMatrix, v: &CMatrix, f0_qubits: &[usize]) -> Result<f64> {
    if (u.rows(), u.cols()) != (v.rows(), v.cols()) {
        return Err(DcError::InvalidShape(format!(
            "cost_bqskit0: {}x{} vs {}x{}",
            u.rows(),
            u.cols(),
            v.rows(),
            v.cols()
        )));
    }
    let n = u.rows().trailing_zeros() as usize;
    let mask: usize = f0_qubits.iter().map(|&q| 1usize << (n - 1 - q)).sum();
    // Tr(f0 U V†) = Σ_{x: f0 bits clear} Σ_y U[x,y] conj(V[x,y]).
    let mut acc = Complex64::new(0.0, 0.0);
    for x in 0..u.rows() {
        if x & mask != 0 {
            continue;
        }
        for y in 0..u.cols() {
            acc += u.get(x, y) * v.get(x, y).conj();
        }
    }
    let f0_trace = (u.rows() >> f0_qubits.len()) as f64;
    Ok(1.0 - acc.norm() / f0_trace)
}

/// Plain Hilbert-Schmidt cost 1 − |Tr(V† U)| / d.
pub fn cost_hs(u: &CMatrix, v: &CMatrix) -> Result<f64> {
    let ov = crate::linalg::hs_overlap(v, u)?;
    Ok(1.0 - ov.norm() / u.rows() as f64)
}

/// Channel-trace cost 1 − (1/4^s) Σ_j |Tr(V† K_j)|² from an explicit Kraus
/// set; equals `cost_dyn2` when the K_j come from a simultaneous circuit.
pub fn channel_trace_cost(kraus: &[CMatrix], v: &CMatrix) -> Result<f64> {
    if kraus.is_empty() {
        return Err(DcError::InvalidChannel("empty Kraus set".into()));
    }
    let ds = kraus[0].rows();
    let mut sum = CMatrix::zeros(ds, ds);
    for k in kraus {
        if (k.rows(), k.cols()) != (ds, ds) {
            return Err(DcError::InvalidShape("ragged Kraus set".into()));
        }
        sum = sum.add(&k.dagger().matmul(k));
    }
    if sum.max_abs_diff(&CMatrix::identity(ds)) > 1e-8 {
        return Err(DcError::InvalidChannel(
            "Kraus operators do not satisfy Σ K†K = I".into(),
        ));
    }
    if (v.rows(), v.cols()) != (ds, ds) {
        return Err(DcError::InvalidShape("target dim mismatch".into()));
    }
    let s = ds.trailing_zeros() as i32;
    let total: f64 = kraus
        .iter()
        .map(|k| {
            let t: Complex64 = k
                .entries()
                .iter()
                .zip(v.entries())
                .map(|(kv, vv)| vv.conj() * kv)
                .sum();
            t.norm_sqr()
        })
        .sum();
    Ok(1.0 - total / 4f64.powi(s))
}

/// Central finite-difference gradient of `f` with step 1e-6; components
/// evaluate concurrently.
pub fn fd_gradient<F>(f: F, params: &[f64]) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    const H: f64 = 1e-6;
    (0..params.len())
        .into_par_iter()
        .map(|k| {
            let mut plus = params.to_vec();
            plus[k] += H;
            let mut minus = params.to_vec();
            minus[k] -= H;
            (f(&plus) - f(&minus)) / (2.0 * H)
        })
        .collect()
}

/// Finite-difference gradient of a cost spec. Slots not referenced by any
/// placement produce exactly zero components.
pub fn gradient(spec: &CostSpec, dc: &DynamicCircuit, params: &[f64]) -> Vec<f64> {
    fd_gradient(|x| spec.evaluate(dc, x).unwrap_or(f64::INFINITY), params)
}
