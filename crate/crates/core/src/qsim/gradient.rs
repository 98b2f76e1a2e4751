//! Exact gradients of <Z_q> with respect to circuit parameter slots.
//!
//! Two routes are provided and must agree:
//!
//! * `gradient_parameter_shift` — the two-point rule. Each rotation/phase
//!   gate bound to a slot is shifted by +-pi/2 in its own angle; shared slots
//!   sum the per-gate contributions (product rule).
//! * `gradient_adjoint` / `gradient_adjoint_dm` — adjoint back-propagation.
//!   One forward and one backward sweep give all slot derivatives at once,
//!   which is what the training loops use; cost is independent of the
//!   parameter count.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use super::circuit::Circuit;
use super::density::{left_mul_generator, DensityMatrix};
use super::gate::{Angle, GateKind};
use super::state::{apply_generator, Generator, PureState};
use super::SimError;
use crate::noise::BoundNoise;

fn generator_of(kind: &GateKind) -> Option<(Generator, &Angle)> {
    match kind {
        GateKind::Rx(a) => Some((Generator::PauliX, a)),
        GateKind::Ry(a) => Some((Generator::PauliY, a)),
        GateKind::Rz(a) => Some((Generator::PauliZ, a)),
        GateKind::Phase(a) => Some((Generator::Proj1, a)),
        _ => None,
    }
}

/// d<Z>/d angle for a rotation is Im(t); a phase gate (generator is the
/// |1><1| projector, not a half-angle Pauli) picks up -2 Im(t).
fn generator_weight(g: Generator) -> f64 {
    match g {
        Generator::Proj1 => -2.0,
        _ => 1.0,
    }
}

fn check_differentiable(circuit: &Circuit) -> Result<(), SimError> {
    for (i, gate) in circuit.gates().iter().enumerate() {
        if let Some(angle) = gate.kind.angle() {
            if angle.is_parameterized() && !gate.kind.is_shift_rule_rotation() {
                return Err(SimError::NonRotationParameterized { gate_index: i });
            }
        }
    }
    Ok(())
}

/// Two-point parameter-shift gradient of <Z_qubit> w.r.t. every slot.
pub fn gradient_parameter_shift(
    circuit: &Circuit,
    params: &[f64],
    input: &PureState,
    qubit: usize,
) -> Result<Vec<f64>, SimError> {
    circuit.check_run(params, input.n_qubits())?;
    check_differentiable(circuit)?;
    let mut grads = vec![0.0; circuit.n_params()];
    for (i, gate) in circuit.gates().iter().enumerate() {
        let Some(angle) = gate.kind.angle() else { continue };
        if !angle.is_parameterized() {
            continue;
        }
        let plus = circuit
            .run_with_shift(params, input, i, FRAC_PI_2)
            .expectation_z(qubit)?;
        let minus = circuit
            .run_with_shift(params, input, i, -FRAC_PI_2)
            .expectation_z(qubit)?;
        let d_angle = (plus - minus) / 2.0;
        for (slot, d) in angle.d_slots(params) {
            grads[slot] += d_angle * d;
        }
    }
    Ok(grads)
}

/// Adjoint gradient of <Z_qubit> on the pure-state path.
pub fn gradient_adjoint(
    circuit: &Circuit,
    params: &[f64],
    input: &PureState,
    qubit: usize,
) -> Result<(f64, Vec<f64>), SimError> {
    circuntime_check(circuit, params, input.n_qubits())?;
    let mut psi = circuit.run(params, input)?;
    let value = psi.expectation_z(qubit)?;
    let n = psi.n_qubits();
    let mut lambda = psi.clone();
    apply_generator(lambda.amplitudes_mut(), n, qubit, Generator::PauliZ);
    let mut grads = vec![0.0; circuit.n_params()];
    for i in (0..circuit.gates().len()).rev() {
        let gate = &circuit.gates()[i];
        if let Some((gen, angle)) = generator_of(&gate.kind) {
            if angle.is_parameterized() {
                let mut v = psi.clone();
                apply_generator(v.amplitudes_mut(), n, gate.targets[0], gen);
                let z = lambda.inner(&v);
                let base = generator_weight(gen) * z.im;
                for (slot, d) in angle.d_slots(params) {
                    grads[slot] += base * d;
                }
            }
        }
        let dag = circuit.resolve(i, params).dagger();
        dag.apply_state(&mut psi);
        dag.apply_state(&mut lambda);
    }
    Ok((value, grads))
}

fn circuntime_check(circuit: &Circuit, params: &[f64], state_qubits: usize) -> Result<(), SimError> {
    circuit.check_run(params, state_qubits)?;
    check_differentiable(circuit)
}

/// Forward-mode sweep: the output state together with d psi / d param for
/// every slot, as dense complex columns. Used to differentiate encoding
/// circuits whose "parameters" are data features.
pub fn run_with_jacobian(
    circuit: &Circuit,
    params: &[f64],
    input: &PureState,
) -> Result<(PureState, Vec<Vec<Complex64>>), SimError> {
    circuntime_check(circuit, params, input.n_qubits())?;
    let n = input.n_qubits();
    let dim = input.dim();
    let mut psi = input.clone();
    let mut jac: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); dim]; circuit.n_params()];
    for i in 0..circuit.gates().len() {
        let op = circuit.resolve(i, params);
        op.apply_state(&mut psi);
        for col in jac.iter_mut() {
            op.apply_slice(col, n);
        }
        let gate = &circuit.gates()[i];
        if let Some((gen, angle)) = generator_of(&gate.kind) {
            if angle.is_parameterized() {
                // d psi = (dU/dangle) psi_old = scale * G psi_new
                let mut v = psi.amplitudes().to_vec();
                apply_generator(&mut v, n, gate.targets[0], gen);
                let scale = match gen {
                    Generator::Proj1 => Complex64::new(0.0, 1.0),
                    _ => Complex64::new(0.0, -0.5),
                };
                for (slot, d) in angle.d_slots(params) {
                    let w = scale * d;
                    for (j, col) in jac[slot].iter_mut().enumerate() {
                        *col += w * v[j];
                    }
                }
            }
        }
    }
    Ok((psi, jac))
}

pub(crate) fn trace_prod(a: &DensityMatrix, b: &DensityMatrix) -> Complex64 {
    let dim = a.dim();
    let am = a.entries();
    let bm = b.entries();
    let mut s = Complex64::new(0.0, 0.0);
    for r in 0..dim {
        for c in 0..dim {
            s += am[r * dim + c] * bm[c * dim + r];
        }
    }
    s
}

/// Adjoint gradient of Tr(observable * rho_final) on the density-matrix
/// path, with optional per-gate noise. Returns (value, grads). Forward
/// states are checkpointed every sqrt(L) gates and segments replayed during
/// the backward sweep, so memory stays at ~2 sqrt(L) matrices.
pub fn gradient_adjoint_dm(
    circuit: &Circuit,
    params: &[f64],
    input: &DensityMatrix,
    noise: Option<&BoundNoise>,
    observable: &DensityMatrix,
) -> Result<(f64, Vec<f64>), SimError> {
    circuntime_check(circuit, params, input.n_qubits())?;
    let n_gates = circuit.gates().len();
    let stride = ((n_gates as f64).sqrt().ceil() as usize).max(1);

    // Forward sweep, checkpointing the state *before* gate k*stride.
    let mut checkpoints: Vec<DensityMatrix> = Vec::with_capacity(n_gates / stride + 1);
    let mut dm = input.clone();
    for i in 0..n_gates {
        if i % stride == 0 {
            checkpoints.push(dm.clone());
        }
        step_dm(circuit, params, noise, &mut dm, i)?;
    }
    let value = trace_prod(observable, &dm).re;

    let mut lambda = observable.clone();
    let mut grads = vec![0.0; circuit.n_params()];
    let mut seg_end = n_gates;
    while seg_end > 0 {
        let seg_start = ((seg_end - 1) / stride) * stride;
        // Rebuild the states before each gate of this segment.
        let mut buf: Vec<DensityMatrix> = Vec::with_capacity(seg_end - seg_start);
        let mut s = checkpoints[seg_start / stride].clone();
        for i in seg_start..seg_end {
            buf.push(s.clone());
            step_dm(circuit, params, noise, &mut s, i)?;
        }
        for i in (seg_start..seg_end).rev() {
            let gate = &circuit.gates()[i];
            if let Some(plan) = noise {
                plan.apply_adjoint_after_gate(&mut lambda, gate.target_slice())?;
            }
            if let Some((gen, angle)) = generator_of(&gate.kind) {
                if angle.is_parameterized() {
                    let mut rho_prime = buf[i - seg_start].clone();
                    circuit.resolve(i, params).conjugate_dm(&mut rho_prime);
                    left_mul_generator(&mut rho_prime, gate.targets[0], gen);
                    let t = trace_prod(&lambda, &rho_prime);
                    let base = generator_weight(gen) * t.im;
                    for (slot, d) in angle.d_slots(params) {
                        grads[slot] += base * d;
                    }
                }
            }
            let dag = circuit.resolve(i, params).dagger();
            dag.conjugate_dm(&mut lambda);
        }
        seg_end = seg_start;
    }
    Ok((value, grads))
}

fn step_dm(
    circuit: &Circuit,
    params: &[f64],
    noise: Option<&BoundNoise>,
    dm: &mut DensityMatrix,
    index: usize,
) -> Result<(), SimError> {
    circuit.resolve(index, params).conjugate_dm(dm);
    if let Some(plan) = noise {
        plan.apply_after_gate(dm, circuit.gates()[index].target_slice())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::gate::Gate;

    fn ry_circuit() -> Circuit {
        let mut c = Circuit::new(1, 1);
        c.push(Gate::one(GateKind::Ry(Angle::Slot { slot: 0, coeff: 1.0 }), 0)).unwrap();
        c
    }

    #[test]
    fn shift_rule_matches_analytic_sine() {
        // <Z> = cos(theta); gradient at pi/2 is -1.
        let c = ry_circuit();
        let g = gradient_parameter_shift(&c, &[FRAC_PI_2], &PureState::zero(1), 0).unwrap();
        assert!((g[0] + 1.0).abs() < 1e-10);
    }

    #[test]
    fn unused_slot_has_zero_gradient() {
        let mut c = Circuit::new(1, 2);
        c.push(Gate::one(GateKind::Ry(Angle::Slot { slot: 0, coeff: 1.0 }), 0)).unwrap();
        let g = gradient_parameter_shift(&c, &[0.3, 0.7], &PureState::zero(1), 0).unwrap();
        assert_eq!(g[1], 0.0);
    }

    #[test]
    fn adjoint_matches_shift_rule() {
        let mut c = Circuit::new(2, 3);
        c.push(Gate::one(GateKind::H, 0)).unwrap();
        c.push(Gate::one(GateKind::Ry(Angle::Slot { slot: 0, coeff: 1.0 }), 0)).unwrap();
        c.push(Gate::one(GateKind::Rx(Angle::Slot { slot: 1, coeff: -0.5 }), 1)).unwrap();
        c.push(Gate::two(GateKind::Cnot, 0, 1)).unwrap();
        c.push(Gate::one(GateKind::Phase(Angle::Slot { slot: 2, coeff: 2.0 }), 1)).unwrap();
        c.push(Gate::one(GateKind::H, 1)).unwrap();
        c.push(Gate::one(GateKind::Rz(Angle::Slot { slot: 0, coeff: 1.0 }), 1)).unwrap();
        c.push(Gate::one(GateKind::H, 1)).unwrap();
        let params = [0.37, -1.1, 0.64];
        let input = PureState::zero(2);
        let shift = gradient_parameter_shift(&c, &params, &input, 1).unwrap();
        let (_, adj) = gradient_adjoint(&c, &params, &input, 1).unwrap();
        for (a, b) in shift.iter().zip(&adj) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn dm_adjoint_matches_pure_adjoint_without_noise() {
        let mut c = Circuit::new(2, 2);
        c.push(Gate::one(GateKind::Ry(Angle::Slot { slot: 0, coeff: 1.0 }), 0)).unwrap();
        c.push(Gate::two(GateKind::Cnot, 0, 1)).unwrap();
        c.push(Gate::one(GateKind::Ry(Angle::Slot { slot: 1, coeff: 1.0 }), 1)).unwrap();
        let params = [0.9, -0.4];
        let input = PureState::zero(2);
        let (val_p, grad_p) = gradient_adjoint(&c, &params, &input, 1).unwrap();

        let obs = DensityMatrix::z_observable(2, 1);
        let (val_d, grad_d) =
            gradient_adjoint_dm(&c, &params, &DensityMatrix::from_pure(&input), None, &obs).unwrap();
        assert!((val_p - val_d).abs() < 1e-10);
        for (a, b) in grad_p.iter().zip(&grad_d) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn parameterized_cphase_is_rejected() {
        let mut c = Circuit::new(2, 1);
        c.push(Gate::two(GateKind::CPhase(Angle::Slot { slot: 0, coeff: 1.0 }), 0, 1)).unwrap();
        let r = gradient_parameter_shift(&c, &[0.2], &PureState::zero(2), 0);
        assert!(matches!(r, Err(SimError::NonRotationParameterized { gate_index: 0 })));
    }
}
