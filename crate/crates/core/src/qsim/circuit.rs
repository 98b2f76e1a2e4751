//! Ordered gate list with a parameter-slot map. Circuits are immutable after
//! construction and safe to share across threads; execution is a pure
//! function of (circuit, params, input).

use num_complex::Complex64;

use super::density::{conjugate_one, conjugate_two, DensityMatrix};
use super::gate::{Gate, GateKind};
use super::state::{apply_one, apply_two, PureState};
use super::SimError;
use crate::noise::BoundNoise;

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    n_params: usize,
    gates: Vec<Gate>,
}

/// A gate resolved against a concrete parameter vector.
pub(crate) enum ResolvedOp {
    One { q: usize, m: [Complex64; 4] },
    Two { q0: usize, q1: usize, m: [Complex64; 16] },
}

impl ResolvedOp {
    pub(crate) fn dagger(&self) -> ResolvedOp {
        match self {
            ResolvedOp::One { q, m } => ResolvedOp::One {
                q: *q,
                m: [m[0].conj(), m[2].conj(), m[1].conj(), m[3].conj()],
            },
            ResolvedOp::Two { q0, q1, m } => {
                let mut d = [Complex64::new(0.0, 0.0); 16];
                for r in 0..4 {
                    for c in 0..4 {
                        d[r * 4 + c] = m[c * 4 + r].conj();
                    }
                }
                ResolvedOp::Two { q0: *q0, q1: *q1, m: d }
            }
        }
    }

    pub(crate) fn apply_state(&self, state: &mut PureState) {
        let n = state.n_qubits();
        self.apply_slice(state.amplitudes_mut(), n);
    }

    pub(crate) fn apply_slice(&self, amps: &mut [Complex64], n: usize) {
        match self {
            ResolvedOp::One { q, m } => apply_one(amps, n, *q, m),
            ResolvedOp::Two { q0, q1, m } => apply_two(amps, n, *q0, *q1, m),
        }
    }

    pub(crate) fn conjugate_dm(&self, dm: &mut DensityMatrix) {
        match self {
            ResolvedOp::One { q, m } => conjugate_one(dm, *q, m),
            ResolvedOp::Two { q0, q1, m } => conjugate_two(dm, *q0, *q1, m),
        }
    }
}

impl Circuit {
    pub fn new(n_qubits: usize, n_params: usize) -> Self {
        assert!(n_qubits >= 1 && n_qubits <= super::state::MAX_QUBITS);
        Circuit { n_qubits, n_params, gates: Vec::new() }
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), SimError> {
        gate.validate(self.n_qubits)?;
        if let Some(angle) = gate.kind.angle() {
            if let Some(max_slot) = angle.max_slot() {
                if max_slot >= self.n_params {
                    return Err(SimError::SlotOutOfRange { slot: max_slot, n_params: self.n_params });
                }
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub(crate) fn check_run(&self, params: &[f64], state_qubits: usize) -> Result<(), SimError> {
        if params.len() != self.n_params {
            return Err(SimError::ParamCountMismatch { expected: self.n_params, got: params.len() });
        }
        if state_qubits != self.n_qubits {
            return Err(SimError::WidthMismatch { state_qubits, circuit_qubits: self.n_qubits });
        }
        Ok(())
    }

    pub(crate) fn resolve(&self, index: usize, params: &[f64]) -> ResolvedOp {
        let gate = &self.gates[index];
        if let Some(m) = gate.matrix1(params) {
            ResolvedOp::One { q: gate.targets[0], m }
        } else {
            let m = gate.matrix2(params).expect("gate arity covered");
            ResolvedOp::Two { q0: gate.targets[0], q1: gate.targets[1], m }
        }
    }

    /// Resolve gate `index` with its angle shifted by `delta` (parameter-shift
    /// evaluation point).
    pub(crate) fn resolve_shifted(&self, index: usize, params: &[f64], delta: f64) -> ResolvedOp {
        let gate = &self.gates[index];
        let shifted = match &gate.kind {
            GateKind::Rx(a) => GateKind::Rx(super::gate::Angle::Fixed(a.resolve(params) + delta)),
            GateKind::Ry(a) => GateKind::Ry(super::gate::Angle::Fixed(a.resolve(params) + delta)),
            GateKind::Rz(a) => GateKind::Rz(super::gate::Angle::Fixed(a.resolve(params) + delta)),
            GateKind::Phase(a) => GateKind::Phase(super::gate::Angle::Fixed(a.resolve(params) + delta)),
            _ => unreachable!("shift applies to rotation gates only"),
        };
        let g = Gate { kind: shifted, targets: gate.targets };
        if let Some(m) = g.matrix1(&[]) {
            ResolvedOp::One { q: g.targets[0], m }
        } else {
            unreachable!()
        }
    }

    /// Run on a pure state: gates applied in order, shared slots substituting
    /// the same value into every bound gate.
    pub fn run(&self, params: &[f64], input: &PureState) -> Result<PureState, SimError> {
        self.check_run(params, input.n_qubits())?;
        let mut state = input.clone();
        for i in 0..self.gates.len() {
            self.resolve(i, params).apply_state(&mut state);
        }
        Ok(state)
    }

    /// Run with one gate's angle shifted; used by the parameter-shift rule.
    pub(crate) fn run_with_shift(
        &self,
        params: &[f64],
        input: &PureState,
        gate_index: usize,
        delta: f64,
    ) -> PureState {
        let mut state = input.clone();
        for i in 0..self.gates.len() {
            let op = if i == gate_index {
                self.resolve_shifted(i, params, delta)
            } else {
                self.resolve(i, params)
            };
            op.apply_state(&mut state);
        }
        state
    }

    /// Density-matrix execution: rho -> K(U rho U^dag) per gate, where K is
    /// the channel the noise plan binds to this gate kind/arity (identity
    /// when no noise is supplied).
    pub fn run_dm(
        &self,
        params: &[f64],
        input: &DensityMatrix,
        noise: Option<&BoundNoise>,
    ) -> Result<DensityMatrix, SimError> {
        self.check_run(params, input.n_qubits())?;
        let mut dm = input.clone();
        for i in 0..self.gates.len() {
            let gate = &self.gates[i];
            self.resolve(i, params).conjugate_dm(&mut dm);
            if let Some(plan) = noise {
                plan.apply_after_gate(&mut dm, gate.target_slice())?;
            }
        }
        Ok(dm)
    }

    /// <Z_qubit> after running on `input`.
    pub fn expectation_z(&self, params: &[f64], input: &PureState, qubit: usize) -> Result<f64, SimError> {
        self.run(params, input)?.expectation_z(qubit)
    }
}
