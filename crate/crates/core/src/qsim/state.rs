//! Pure statevector representation and dense gate-application kernels.
//!
//! Basis convention, fixed project-wide: basis index `i` is read with qubit 0
//! as the *most significant* bit. For `n` qubits, qubit `q` therefore owns
//! bit `n - 1 - q` of the index.

use num_complex::Complex64;

use super::gate::Gate;
use super::SimError;

pub const MAX_QUBITS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl PureState {
    /// |0...0> on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Self {
        assert!(n_qubits >= 1 && n_qubits <= MAX_QUBITS);
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        PureState { n_qubits, amps }
    }

    /// Computational basis state |index>.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut s = Self::zero(n_qubits);
        s.amps[0] = Complex64::new(0.0, 0.0);
        s.amps[index] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self, SimError> {
        if n_qubits < 1 || n_qubits > MAX_QUBITS || amps.len() != 1 << n_qubits {
            return Err(SimError::BadStateLength { n_qubits, len: amps.len() });
        }
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > 1e-10 {
            return Err(SimError::NotNormalized { norm2 });
        }
        Ok(PureState { n_qubits, amps })
    }

    /// Internal constructor for amplitudes known to be normalized.
    pub(crate) fn from_raw(n_qubits: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n_qubits);
        PureState { n_qubits, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// <self|other>.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        debug_assert_eq!(self.n_qubits, other.n_qubits);
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// <psi|Z_qubit|psi>.
    pub fn expectation_z(&self, qubit: usize) -> Result<f64, SimError> {
        if qubit >= self.n_qubits {
            return Err(SimError::TargetOutOfRange { target: qubit, n_qubits: self.n_qubits });
        }
        let mask = 1usize << (self.n_qubits - 1 - qubit);
        let mut e = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if i & mask == 0 {
                e += p;
            } else {
                e -= p;
            }
        }
        Ok(e)
    }
}

/// Apply a gate to a state, returning U|psi>. Parameterized angles must be
/// `Angle::Fixed`; circuit execution resolves slots before reaching here.
pub fn apply_gate(state: &PureState, gate: &Gate) -> Result<PureState, SimError> {
    gate.validate(state.n_qubits)?;
    let mut out = state.clone();
    apply_gate_in_place(&mut out, gate, &[]);
    Ok(out)
}

pub(crate) fn apply_gate_in_place(state: &mut PureState, gate: &Gate, params: &[f64]) {
    let n = state.n_qubits;
    if let Some(m) = gate.matrix1(params) {
        apply_one(&mut state.amps, n, gate.targets[0], &m);
    } else if let Some(m) = gate.matrix2(params) {
        apply_two(&mut state.amps, n, gate.targets[0], gate.targets[1], &m);
    }
}

/// In-place 2x2 kernel on qubit `q` (row-major matrix).
pub(crate) fn apply_one(amps: &mut [Complex64], n: usize, q: usize, m: &[Complex64; 4]) {
    let mask = 1usize << (n - 1 - q);
    let dim = amps.len();
    let mut i = 0usize;
    while i < dim {
        if i & mask == 0 {
            let j = i | mask;
            let a = amps[i];
            let b = amps[j];
            amps[i] = m[0] * a + m[1] * b;
            amps[j] = m[2] * a + m[3] * b;
        }
        i += 1;
    }
}

/// In-place 4x4 kernel on qubits `(q0, q1)`; matrix basis is |q0 q1>.
pub(crate) fn apply_two(amps: &mut [Complex64], n: usize, q0: usize, q1: usize, m: &[Complex64; 16]) {
    let m0 = 1usize << (n - 1 - q0);
    let m1 = 1usize << (n - 1 - q1);
    let dim = amps.len();
    for i in 0..dim {
        if i & m0 == 0 && i & m1 == 0 {
            let i00 = i;
            let i01 = i | m1;
            let i10 = i | m0;
            let i11 = i | m0 | m1;
            let a = amps[i00];
            let b = amps[i01];
            let c = amps[i10];
            let d = amps[i11];
            amps[i00] = m[0] * a + m[1] * b + m[2] * c + m[3] * d;
            amps[i01] = m[4] * a + m[5] * b + m[6] * c + m[7] * d;
            amps[i10] = m[8] * a + m[9] * b + m[10] * c + m[11] * d;
            amps[i11] = m[12] * a + m[13] * b + m[14] * c + m[15] * d;
        }
    }
}

/// Apply a single-qubit Pauli (or |1><1| projector) without building the
/// gate; used by the adjoint differentiation sweeps.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Generator {
    PauliX,
    PauliY,
    PauliZ,
    Proj1,
}

pub(crate) fn apply_generator(amps: &mut [Complex64], n: usize, q: usize, g: Generator) {
    let mask = 1usize << (n - 1 - q);
    let dim = amps.len();
    match g {
        Generator::PauliX => {
            for i in 0..dim {
                if i & mask == 0 {
                    amps.swap(i, i | mask);
                }
            }
        }
        Generator::PauliY => {
            let im = Complex64::new(0.0, 1.0);
            for i in 0..dim {
                if i & mask == 0 {
                    let j = i | mask;
                    let a = amps[i];
                    let b = amps[j];
                    amps[i] = -im * b;
                    amps[j] = im * a;
                }
            }
        }
        Generator::PauliZ => {
            for (i, a) in amps.iter_mut().enumerate() {
                if i & mask != 0 {
                    *a = -*a;
                }
            }
        }
        Generator::Proj1 => {
            for (i, a) in amps.iter_mut().enumerate() {
                if i & mask == 0 {
                    *a = Complex64::new(0.0, 0.0);
                }
            }
        }
    }
}
