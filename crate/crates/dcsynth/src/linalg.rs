//! Dense complex linear algebra sized for small multi-qubit systems.
//!
//! Everything is double-precision, row-major and immutable in practice:
//! operations return new values. Qubit 0 is the most-significant bit of a
//! state index, and ancilla qubits occupy the trailing (least-significant)
//! index block, so `(I ⊗ ⟨i|) U (I ⊗ |j⟩)` is a strided copy.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DcError, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

/// Dense complex vector; for quantum states the dimension is a power of two.
#[derive(Debug, Clone, PartialEq)]
pub struct CVector {
    pub amplitudes: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, entries: vec![ZERO; rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            m.entries[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        debug_assert!(rows.iter().all(|row| row.len() == c));
        CMatrix { rows: r, cols: c, entries: rows.into_iter().flatten().collect() }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        CMatrix { rows, cols, entries }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<Complex64>]) -> Self {
        let c = cols.len();
        let r = if c == 0 { 0 } else { cols[0].len() };
        let mut m = CMatrix::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            debug_assert_eq!(col.len(), r);
            for (i, v) in col.iter().enumerate() {
                m.entries[i * c + j] = *v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn dagger(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn scale(&self, s: Complex64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e * s).collect(),
        }
    }

    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.entries[i * rhs.cols + j] += a * rhs.get(k, j);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn add(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Largest elementwise |a - b|.
    pub fn max_abs_diff(&self, rhs: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// ‖M†M − I‖_max; zero for a unitary matrix.
    pub fn unitarity_error(&self) -> f64 {
        self.dagger().matmul(self).max_abs_diff(&CMatrix::identity(self.cols))
    }

    /// Largest elementwise distance after aligning global phase, i.e.
    /// min over φ of ‖e^{iφ}·self − rhs‖_max, with φ chosen from the
    /// Hilbert-Schmidt overlap.
    pub fn phase_aligned_diff(&self, rhs: &CMatrix) -> f64 {
        let ov = hs_overlap(self, rhs).expect("equal dims required");
        let phase = if ov.norm() > 1e-300 { ov / ov.norm() } else { ONE };
        self.scale(phase).max_abs_diff(rhs)
    }
}

impl CVector {
    pub fn zeros(dim: usize) -> Self {
        CVector { amplitudes: vec![ZERO; dim] }
    }

    /// Computational basis state |k⟩ of the given dimension.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v.amplitudes[k] = ONE;
        v
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Self {
        CVector { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> CVector {
        let n = self.norm();
        CVector { amplitudes: self.amplitudes.iter().map(|a| a / n).collect() }
    }

    /// ⟨self|rhs⟩ with the left argument conjugated.
    pub fn inner(&self, rhs: &CVector) -> Complex64 {
        assert_eq!(self.dim(), rhs.dim());
        self.amplitudes.iter().zip(&rhs.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// |⟨self|rhs⟩|², assuming both sides are normalized.
    pub fn fidelity(&self, rhs: &CVector) -> f64 {
        self.inner(rhs).norm_sqr()
    }
}

/// Kronecker product; dimensions multiply.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.rows * b.rows, a.cols * b.cols);
    for ia in 0..a.rows {
        for ja in 0..a.cols {
            let va = a.get(ia, ja);
            if va == ZERO {
                continue;
            }
            for ib in 0..b.rows {
                for jb in 0..b.cols {
                    out.set(ia * b.rows + ib, ja * b.cols + jb, va * b.get(ib, jb));
                }
            }
        }
    }
    out
}

/// Hilbert-Schmidt overlap Tr(a† b).
pub fn hs_overlap(a: &CMatrix, b: &CMatrix) -> Result<Complex64> {
    if (a.rows, a.cols) != (b.rows, b.cols) {
        return Err(DcError::InvalidShape(format!(
            "hs_overlap: {}x{} vs {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(a.entries.iter().zip(&b.entries).map(|(x, y)| x.conj() * y).sum())
}

/// The 2^s × 2^s block (I^{⊗s} ⊗ ⟨i|) U (I^{⊗s} ⊗ |j⟩) of a 2^(s+a)-dim
/// matrix whose ancillas sit in the trailing index block.
pub fn ancilla_block(u: &CMatrix, s: usize, a: usize, i: usize, j: usize) -> Result<CMatrix> {
    let d = 1usize << (s + a);
    let da = 1usize << a;
    if u.rows != d || u.cols != d {
        return Err(DcError::InvalidShape(format!(
            "ancilla_block: expected {d}x{d}, got {}x{}",
            u.rows, u.cols
        )));
    }
    if i >= da || j >= da {
        return Err(DcError::InvalidShape(format!(
            "ancilla_block: outcome index out of range (i={i}, j={j}, 2^a={da})"
        )));
    }
    let ds = 1usize << s;
    Ok(CMatrix::from_fn(ds, ds, |p, q| u.get(p * da + i, q * da + j)))
}

// JSON wire format: matrices as {"rows","cols","re","im"}, vectors as
// {"dim","re","im"}.

#[derive(Serialize, Deserialize)]
struct MatrixWire {
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct VectorWire {
    dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for CMatrix {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixWire {
            rows: self.rows,
            cols: self.cols,
            re: self.entries.iter().map(|e| e.re).collect(),
            im: self.entries.iter().map(|e| e.im).collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let w = MatrixWire::deserialize(de)?;
        if w.re.len() != w.rows * w.cols || w.im.len() != w.rows * w.cols {
            return Err(serde::de::Error::custom("matrix entry count mismatch"));
        }
        Ok(CMatrix {
            rows: w.rows,
            cols: w.cols,
            entries: w.re.iter().zip(&w.im).map(|(&re, &im)| Complex64::new(re, im)).collect(),
        })
    }
}

impl Serialize for CVector {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        VectorWire {
            dim: self.dim(),
            re: self.amplitudes.iter().map(|e| e.re).collect(),
            im: self.amplitudes.iter().map(|e| e.im).collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for CVector {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let w = VectorWire::deserialize(de)?;
        if w.re.len() != w.dim || w.im.len() != w.dim {
            return Err(serde::de::Error::custom("vector entry count mismatch"));
        }
        Ok(CVector {
            amplitudes: w.re.iter().zip(&w.im).map(|(&re, &im)| Complex64::new(re, im)).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pauli_x() -> CMatrix {
        CMatrix::from_rows(vec![vec![ZERO, ONE], vec![ONE, ZERO]])
    }

    fn pauli_z() -> CMatrix {
        CMatrix::from_rows(vec![vec![ONE, ZERO], vec![ZERO, -ONE]])
    }

    fn random_matrix(rng: &mut impl Rng, n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    /// Gram-Schmidt on random columns; good enough as a random unitary.
    pub(crate) fn random_unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
        let mut cols: Vec<Vec<Complex64>> = Vec::new();
        for _ in 0..n {
            let mut v: Vec<Complex64> =
                (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            for u in &cols {
                let ov: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= ov * y;
                }
            }
            let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            for x in v.iter_mut() {
                *x /= norm;
            }
            cols.push(v);
        }
        CMatrix::from_columns(&cols)
    }

    #[test]
    fn kron_identity_case() {
        let i2 = CMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), CMatrix::identity(4));
    }

    #[test]
    fn kron_x_with_projector() {
        // X ⊗ |0⟩⟨0| has ones exactly at (0,2) and (2,0).
        let p0 = CMatrix::from_rows(vec![vec![ONE, ZERO], vec![ZERO, ZERO]]);
        let m = kron(&pauli_x(), &p0);
        let mut expected = CMatrix::zeros(4, 4);
        expected.set(0, 2, ONE);
        expected.set(2, 0, ONE);
        assert_eq!(m, expected);
    }

    #[test]
    fn kron_mixed_product_property() {
        // (A⊗B)(C⊗D) = AC ⊗ BD, checked against direct multiplication.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let (a, b, cc, d) = (
                random_matrix(&mut rng, 2),
                random_matrix(&mut rng, 2),
                random_matrix(&mut rng, 2),
                random_matrix(&mut rng, 2),
            );
            let lhs = kron(&a, &b).matmul(&kron(&cc, &d));
            let rhs = kron(&a.matmul(&cc), &b.matmul(&d));
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn hs_overlap_basics() {
        for d in [2usize, 4, 8] {
            let id = CMatrix::identity(d);
            let ov = hs_overlap(&id, &id).unwrap();
            assert!((ov - c(d as f64, 0.0)).norm() < 1e-14);
        }
        let ov = hs_overlap(&pauli_x(), &pauli_z()).unwrap();
        assert!(ov.norm() < 1e-14);
    }

    #[test]
    fn hs_overlap_unitary_self() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [2usize, 4, 8] {
            let u = random_unitary(&mut rng, d);
            let ov = hs_overlap(&u, &u).unwrap();
            assert!((ov.norm() - d as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn hs_overlap_shape_mismatch() {
        let e = hs_overlap(&CMatrix::identity(2), &CMatrix::identity(4));
        assert!(matches!(e, Err(DcError::InvalidShape(_))));
    }

    #[test]
    fn ancilla_block_tensor_oracle() {
        // u = V ⊗ W with V on 2 system qubits and W on 1 ancilla:
        // block(i,j) must equal W[i,j]·V by explicit index arithmetic.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v = random_unitary(&mut rng, 4);
        let w = random_unitary(&mut rng, 2);
        let u = kron(&v, &w);
        for i in 0..2 {
            for j in 0..2 {
                let blk = ancilla_block(&u, 2, 1, i, j).unwrap();
                let expect = v.scale(w.get(i, j));
                assert!(blk.max_abs_diff(&expect) < 1e-14);
            }
        }
    }

    #[test]
    fn ancilla_block_identity_cases() {
        let u = CMatrix::identity(1 << 3);
        let b00 = ancilla_block(&u, 2, 1, 0, 0).unwrap();
        assert_eq!(b00, CMatrix::identity(4));
        let b10 = ancilla_block(&u, 2, 1, 1, 0).unwrap();
        assert_eq!(b10, CMatrix::zeros(4, 4));
    }

    #[test]
    fn ancilla_block_reassembles() {
        // Σ_{i,j} |i⟩⟨j|-embedded blocks rebuild U exactly.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (s, a) = (2usize, 2usize);
        let u = random_unitary(&mut rng, 1 << (s + a));
        let da = 1 << a;
        let mut rebuilt = CMatrix::zeros(u.rows(), u.cols());
        for i in 0..da {
            for j in 0..da {
                let blk = ancilla_block(&u, s, a, i, j).unwrap();
                let mut eij = CMatrix::zeros(da, da);
                eij.set(i, j, ONE);
                rebuilt = rebuilt.add(&kron(&blk, &eij));
            }
        }
        assert_eq!(rebuilt, u);
    }

    #[test]
    fn unitary_products_stay_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = random_unitary(&mut rng, 8);
        let b = random_unitary(&mut rng, 8);
        assert!(a.matmul(&b).unitarity_error() < 1e-10);
    }

    #[test]
    fn matrix_json_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let m = random_unitary(&mut rng, 4);
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"rows\":4"));
        let back: CMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(m, back);

        let v = CVector::basis(4, 2);
        let s = serde_json::to_string(&v).unwrap();
        assert!(s.contains("\"dim\":4"));
        let back: CVector = serde_json::from_str(&s).unwrap();
        assert_eq!(v, back);
    }
}
