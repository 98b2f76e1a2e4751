//! Density-matrix representation with the same basis convention as
//! `PureState`. Storage is row-major; entry (r, c) sits at `r * dim + c`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::{Generator, PureState, MAX_QUBITS};
use super::SimError;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    dim: usize,
    mat: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn from_pure(state: &PureState) -> Self {
        let dim = state.dim();
        let amps = state.amplitudes();
        let mut mat = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                mat[r * dim + c] = amps[r] * amps[c].conj();
            }
        }
        DensityMatrix { n_qubits: state.n_qubits(), dim, mat }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let mut mat = vec![Complex64::new(0.0, 0.0); dim * dim];
        let p = 1.0 / dim as f64;
        for r in 0..dim {
            mat[r * dim + r] = Complex64::new(p, 0.0);
        }
        DensityMatrix { n_qubits, dim, mat }
    }

    pub fn zeros(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        DensityMatrix { n_qubits, dim, mat: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    /// The Z_qubit observable as a matrix (trace 0, not a state); usable as
    /// the `observable` argument of the adjoint density-matrix gradient.
    pub fn z_observable(n_qubits: usize, qubit: usize) -> Self {
        let mut obs = Self::zeros(n_qubits);
        let mask = 1usize << (n_qubits - 1 - qubit);
        for r in 0..obs.dim {
            let sign = if r & mask == 0 { 1.0 } else { -1.0 };
            obs.mat[r * obs.dim + r] = Complex64::new(sign, 0.0);
        }
        obs
    }

    /// Validating constructor: Hermitian within 1e-10, trace 1 within 1e-10.
    pub fn from_matrix(n_qubits: usize, mat: Vec<Complex64>) -> Result<Self, SimError> {
        let dim = 1usize << n_qubits;
        if n_qubits < 1 || n_qubits > MAX_QUBITS || mat.len() != dim * dim {
            return Err(SimError::BadStateLength { n_qubits, len: mat.len() });
        }
        let dm = DensityMatrix { n_qubits, dim, mat };
        if dm.hermiticity_defect() > 1e-10 {
            return Err(SimError::NotHermitian { defect: dm.hermiticity_defect() });
        }
        if (dm.trace() - 1.0).abs() > 1e-10 {
            return Err(SimError::BadTrace { trace: dm.trace() });
        }
        Ok(dm)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.mat
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.mat
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        self.mat[r * self.dim + c]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|r| self.mat[r * self.dim + r].re).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in r..self.dim {
                let d = (self.mat[r * self.dim + c] - self.mat[c * self.dim + r].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Tr(rho Z_qubit).
    pub fn expectation_z(&self, qubit: usize) -> Result<f64, SimError> {
        if qubit >= self.n_qubits {
            return Err(SimError::TargetOutOfRange { target: qubit, n_qubits: self.n_qubits });
        }
        let mask = 1usize << (self.n_qubits - 1 - qubit);
        let mut e = 0.0;
        for r in 0..self.dim {
            let d = self.mat[r * self.dim + r].re;
            if r & mask == 0 {
                e += d;
            } else {
                e -= d;
            }
        }
        Ok(e)
    }

    /// Tr(self * other); equals |<a|b>|^2 when both are pure.
    pub fn overlap(&self, other: &DensityMatrix) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let mut s = Complex64::new(0.0, 0.0);
        for r in 0..self.dim {
            for c in 0..self.dim {
                s += self.mat[r * self.dim + c] * other.mat[c * other.dim + r];
            }
        }
        s.re
    }

    /// Eigenvalues of the (Hermitian) matrix, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = DMatrix::from_fn(self.dim, self.dim, |r, c| self.mat[r * self.dim + c]);
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn scaled_add(&mut self, w: f64, other: &DensityMatrix) {
        for (a, b) in self.mat.iter_mut().zip(&other.mat) {
            *a += w * b;
        }
    }

    /// Accumulate w * |psi><psi| without materializing the outer product.
    pub fn scaled_add_pure(&mut self, w: f64, state: &PureState) {
        let amps = state.amplitudes();
        for r in 0..self.dim {
            let ar = amps[r] * w;
            let row = &mut self.mat[r * self.dim..(r + 1) * self.dim];
            for (c, slot) in row.iter_mut().enumerate() {
                *slot += ar * amps[c].conj();
            }
        }
    }
}

/// rho -> (A on qubit q, left) rho: mixes row pairs.
pub(crate) fn left_mul_one(dm: &mut DensityMatrix, q: usize, m: &[Complex64; 4]) {
    let n = dm.n_qubits;
    let dim = dm.dim;
    let mask = 1usize << (n - 1 - q);
    for r in 0..dim {
        if r & mask == 0 {
            let r1 = r | mask;
            for c in 0..dim {
                let a = dm.mat[r * dim + c];
                let b = dm.mat[r1 * dim + c];
                dm.mat[r * dim + c] = m[0] * a + m[1] * b;
                dm.mat[r1 * dim + c] = m[2] * a + m[3] * b;
            }
        }
    }
}

/// rho -> rho (A on qubit q)^dag: mixes column pairs.
pub(crate) fn right_mul_dag_one(dm: &mut DensityMatrix, q: usize, m: &[Complex64; 4]) {
    let n = dm.n_qubits;
    let dim = dm.dim;
    let mask = 1usize << (n - 1 - q);
    let (m00, m01, m10, m11) = (m[0].conj(), m[1].conj(), m[2].conj(), m[3].conj());
    for r in 0..dim {
        let row = &mut dm.mat[r * dim..(r + 1) * dim];
        for c in 0..dim {
            if c & mask == 0 {
                let c1 = c | mask;
                let a = row[c];
                let b = row[c1];
                row[c] = a * m00 + b * m01;
                row[c1] = a * m10 + b * m11;
            }
        }
    }
}

pub(crate) fn left_mul_two(dm: &mut DensityMatrix, q0: usize, q1: usize, m: &[Complex64; 16]) {
    let n = dm.n_qubits;
    let dim = dm.dim;
    let m0 = 1usize << (n - 1 - q0);
    let m1 = 1usize << (n - 1 - q1);
    for r in 0..dim {
        if r & m0 == 0 && r & m1 == 0 {
            let (r00, r01, r10, r11) = (r, r | m1, r | m0, r | m0 | m1);
            for c in 0..dim {
                let a = dm.mat[r00 * dim + c];
                let b = dm.mat[r01 * dim + c];
                let e = dm.mat[r10 * dim + c];
                let d = dm.mat[r11 * dim + c];
                dm.mat[r00 * dim + c] = m[0] * a + m[1] * b + m[2] * e + m[3] * d;
                dm.mat[r01 * dim + c] = m[4] * a + m[5] * b + m[6] * e + m[7] * d;
                dm.mat[r10 * dim + c] = m[8] * a + m[9] * b + m[10] * e + m[11] * d;
                dm.mat[r11 * dim + c] = m[12] * a + m[13] * b + m[14] * e + m[15] * d;
            }
        }
    }
}

pub(crate) fn right_mul_dag_two(dm: &mut DensityMatrix, q0: usize, q1: usize, m: &[Complex64; 16]) {
    let n = dm.n_qubits;
    let dim = dm.dim;
    let m0 = 1usize << (n - 1 - q0);
    let m1 = 1usize << (n - 1 - q1);
    let mut mc = [Complex64::new(0.0, 0.0); 16];
    for i in 0..16 {
        mc[i] = m[i].conj();
    }
    for r in 0..dim {
        let row = &mut dm.mat[r * dim..(r + 1) * dim];
        for c in 0..dim {
            if c & m0 == 0 && c & m1 == 0 {
                let (c00, c01, c10, c11) = (c, c | m1, c | m0, c | m0 | m1);
                let a = row[c00];
                let b = row[c01];
                let e = row[c10];
                let d = row[c11];
                row[c00] = a * mc[0] + b * mc[1] + e * mc[2] + d * mc[3];
                row[c01] = a * mc[4] + b * mc[5] + e * mc[6] + d * mc[7];
                row[c10] = a * mc[8] + b * mc[9] + e * mc[10] + d * mc[11];
                row[c11] = a * mc[12] + b * mc[13] + e * mc[14] + d * mc[15];
            }
        }
    }
}

/// rho -> U rho U^dag for a resolved gate matrix.
pub(crate) fn conjugate_one(dm: &mut DensityMatrix, q: usize, m: &[Complex64; 4]) {
    left_mul_one(dm, q, m);
    right_mul_dag_one(dm, q, m);
}

pub(crate) fn conjugate_two(dm: &mut DensityMatrix, q0: usize, q1: usize, m: &[Complex64; 16]) {
    left_mul_two(dm, q0, q1, m);
    right_mul_dag_two(dm, q0, q1, m);
}

/// Left-multiply by a 1-qubit generator (Pauli or |1><1| projector).
pub(crate) fn left_mul_generator(dm: &mut DensityMatrix, q: usize, g: Generator) {
    let m: [Complex64; 4] = match g {
        Generator::PauliX => [
            Complex64::new(0., 0.),
            Complex64::new(1., 0.),
            Complex64::new(1., 0.),
            Complex64::new(0., 0.),
        ],
        Generator::PauliY => [
            Complex64::new(0., 0.),
            Complex64::new(0., -1.),
            Complex64::new(0., 1.),
            Complex64::new(0., 0.),
        ],
        Generator::PauliZ => [
            Complex64::new(1., 0.),
            Complex64::new(0., 0.),
            Complex64::new(0., 0.),
            Complex64::new(-1., 0.),
        ],
        Generator::Proj1 => [
            Complex64::new(0., 0.),
            Complex64::new(0., 0.),
            Complex64::new(0., 0.),
            Complex64::new(1., 0.),
        ],
    };
    left_mul_one(dm, q, &m);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_projector_has_unit_trace() {
        let s = PureState::zero(3);
        let dm = DensityMatrix::from_pure(&s);
        assert!((dm.trace() - 1.0).abs() < 1e-12);
        assert!(dm.hermiticity_defect() < 1e-12);
        assert!((dm.expectation_z(0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_z_vanishes() {
        let dm = DensityMatrix::maximally_mixed(2);
        for q in 0..2 {
            assert!(dm.expectation_z(q).unwrap().abs() < 1e-12);
        }
        assert!((dm.overlap(&dm) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn overlap_matches_pure_fidelity() {
        let a = PureState::zero(1);
        let mut b = PureState::zero(1);
        let h = crate::qsim::gate::Gate::one(crate::qsim::gate::GateKind::H, 0);
        crate::qsim::state::apply_gate_in_place(&mut b, &h, &[]);
        let da = DensityMatrix::from_pure(&a);
        let db = DensityMatrix::from_pure(&b);
        assert!((da.overlap(&db) - 0.5).abs() < 1e-12);
    }
}
