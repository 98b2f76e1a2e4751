//! Dense pure-state and density-matrix simulator for up to 8 qubits, with
//! exact gradients (two-point parameter shift and adjoint back-propagation).

mod circuit;
mod density;
mod gate;
mod gradient;
mod state;

pub use circuit::Circuit;
pub use density::DensityMatrix;
pub use gate::{Angle, Gate, GateKind};
pub use gradient::{gradient_adjoint, gradient_adjoint_dm, gradient_parameter_shift, run_with_jacobian};
pub use state::{apply_gate, PureState, MAX_QUBITS};

pub(crate) use density::{
    left_mul_one, left_mul_two, right_mul_dag_one, right_mul_dag_two,
};
pub(crate) use state::apply_gate_in_place;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("gate target {target} out of range for {n_qubits} qubits")]
    TargetOutOfRange { target: usize, n_qubits: usize },
    #[error("duplicate gate target {target}")]
    DuplicateTargets { target: usize },
    #[error("amplitude vector length {len} does not match {n_qubits} qubits")]
    BadStateLength { n_qubits: usize, len: usize },
    #[error("state norm^2 = {norm2}, expected 1")]
    NotNormalized { norm2: f64 },
    #[error("matrix is not Hermitian (defect {defect})")]
    NotHermitian { defect: f64 },
    #[error("matrix trace = {trace}, expected 1")]
    BadTrace { trace: f64 },
    #[error("parameter slot {slot} >= declared parameter count {n_params}")]
    SlotOutOfRange { slot: usize, n_params: usize },
    #[error("circuit expects {expected} parameters, got {got}")]
    ParamCountMismatch { expected: usize, got: usize },
    #[error("state has {state_qubits} qubits but circuit has {circuit_qubits}")]
    WidthMismatch { state_qubits: usize, circuit_qubits: usize },
    #[error("parameterized gate at index {gate_index} is not a single-parameter rotation; compile the ansatz to rotations + fixed entanglers")]
    NonRotationParameterized { gate_index: usize },
    #[error("no noise channel bound for gate arity {arity}")]
    MissingChannel { arity: usize },
}
