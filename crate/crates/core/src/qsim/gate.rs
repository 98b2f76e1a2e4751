//! Gate set for the dense simulator.
//!
//! Every supported gate is either a fixed unitary or a single-parameter
//! rotation/phase whose angle may be read from a parameter slot. Two-qubit
//! entanglers (CNOT, CZ, controlled-phase, generic 4x4) are always fixed or
//! phase-parameterized; trainable circuits compile down to single-qubit
//! rotations plus CNOT so the parameter-shift rule stays applicable.

use num_complex::Complex64;

use super::SimError;

pub(crate) const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Angle source for a parameterized gate: baked in, read from a parameter
/// vector as `coeff * params[slot]`, or a bilinear product of two slots
/// (`coeff * params[a] * params[b]`, used by entangling feature maps). One
/// slot may feed many gates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    Fixed(f64),
    Slot { slot: usize, coeff: f64 },
    SlotProduct { a: usize, b: usize, coeff: f64 },
}

impl Angle {
    pub fn resolve(&self, params: &[f64]) -> f64 {
        match *self {
            Angle::Fixed(a) => a,
            Angle::Slot { slot, coeff } => coeff * params[slot],
            Angle::SlotProduct { a, b, coeff } => coeff * params[a] * params[b],
        }
    }

    pub fn is_parameterized(&self) -> bool {
        !matches!(self, Angle::Fixed(_))
    }

    pub fn max_slot(&self) -> Option<usize> {
        match *self {
            Angle::Fixed(_) => None,
            Angle::Slot { slot, .. } => Some(slot),
            Angle::SlotProduct { a, b, .. } => Some(a.max(b)),
        }
    }

    /// Partial derivatives of the resolved angle: (slot, d angle / d param).
    pub fn d_slots(&self, params: &[f64]) -> Vec<(usize, f64)> {
        match *self {
            Angle::Fixed(_) => Vec::new(),
            Angle::Slot { slot, coeff } => vec![(slot, coeff)],
            Angle::SlotProduct { a, b, coeff } => {
                vec![(a, coeff * params[b]), (b, coeff * params[a])]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    Rx(Angle),
    Ry(Angle),
    Rz(Angle),
    /// diag(1, e^{i a})
    Phase(Angle),
    Cnot,
    Cz,
    /// diag(1, 1, 1, e^{i a})
    CPhase(Angle),
    /// Generic two-qubit unitary, row-major in the |t0 t1> basis.
    TwoQubit(Box<[Complex64; 16]>),
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::X
            | GateKind::Y
            | GateKind::Z
            | GateKind::H
            | GateKind::Rx(_)
            | GateKind::Ry(_)
            | GateKind::Rz(_)
            | GateKind::Phase(_) => 1,
            GateKind::Cnot | GateKind::Cz | GateKind::CPhase(_) | GateKind::TwoQubit(_) => 2,
        }
    }

    pub fn angle(&self) -> Option<&Angle> {
        match self {
            GateKind::Rx(a) | GateKind::Ry(a) | GateKind::Rz(a) | GateKind::Phase(a) | GateKind::CPhase(a) => Some(a),
            _ => None,
        }
    }

    /// True for gates the two-point parameter-shift rule covers.
    pub fn is_shift_rule_rotation(&self) -> bool {
        matches!(
            self,
            GateKind::Rx(_) | GateKind::Ry(_) | GateKind::Rz(_) | GateKind::Phase(_)
        )
    }
}

/// A gate bound to concrete target qubits. For two-qubit gates the first
/// target is the control where the kind is controlled.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: [usize; 2],
}

impl Gate {
    pub fn one(kind: GateKind, q: usize) -> Self {
        debug_assert_eq!(kind.arity(), 1);
        Gate { kind, targets: [q, usize::MAX] }
    }

    pub fn two(kind: GateKind, q0: usize, q1: usize) -> Self {
        debug_assert_eq!(kind.arity(), 2);
        Gate { kind, targets: [q0, q1] }
    }

    pub fn arity(&self) -> usize {
        self.kind.arity()
    }

    pub fn target_slice(&self) -> &[usize] {
        &self.targets[..self.arity()]
    }

    pub fn validate(&self, n_qubits: usize) -> Result<(), SimError> {
        let t = self.target_slice();
        for &q in t {
            if q >= n_qubits {
                return Err(SimError::TargetOutOfRange { target: q, n_qubits });
            }
        }
        if t.len() == 2 && t[0] == t[1] {
            return Err(SimError::DuplicateTargets { target: t[0] });
        }
        Ok(())
    }

    /// 2x2 matrix for single-qubit gates, resolved against `params`.
    pub fn matrix1(&self, params: &[f64]) -> Option<[Complex64; 4]> {
        let m = match &self.kind {
            GateKind::X => [c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)],
            GateKind::Y => [c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)],
            GateKind::Z => [c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)],
            GateKind::H => [
                c(FRAC_1_SQRT_2, 0.),
                c(FRAC_1_SQRT_2, 0.),
                c(FRAC_1_SQRT_2, 0.),
                c(-FRAC_1_SQRT_2, 0.),
            ],
            GateKind::Rx(a) => {
                let t = a.resolve(params) / 2.0;
                [c(t.cos(), 0.), c(0., -t.sin()), c(0., -t.sin()), c(t.cos(), 0.)]
            }
            GateKind::Ry(a) => {
                let t = a.resolve(params) / 2.0;
                [c(t.cos(), 0.), c(-t.sin(), 0.), c(t.sin(), 0.), c(t.cos(), 0.)]
            }
            GateKind::Rz(a) => {
                let t = a.resolve(params) / 2.0;
                [Complex64::from_polar(1.0, -t), c(0., 0.), c(0., 0.), Complex64::from_polar(1.0, t)]
            }
            GateKind::Phase(a) => {
                let t = a.resolve(params);
                [c(1., 0.), c(0., 0.), c(0., 0.), Complex64::from_polar(1.0, t)]
            }
            _ => return None,
        };
        Some(m)
    }

    /// 4x4 matrix for two-qubit gates in the |t0 t1> basis, resolved
    /// against `params`.
    pub fn matrix2(&self, params: &[f64]) -> Option<[Complex64; 16]> {
        let zero = c(0., 0.);
        let one = c(1., 0.);
        let mut m = [zero; 16];
        match &self.kind {
            GateKind::Cnot => {
                m[0] = one;
                m[5] = one;
                m[11] = one;
                m[14] = one;
            }
            GateKind::Cz => {
                m[0] = one;
                m[5] = one;
                m[10] = one;
                m[15] = -one;
            }
            GateKind::CPhase(a) => {
                m[0] = one;
                m[5] = one;
                m[10] = one;
                m[15] = Complex64::from_polar(1.0, a.resolve(params));
            }
            GateKind::TwoQubit(u) => m.copy_from_slice(u.as_ref()),
            _ => return None,
        }
        Some(m)
    }

    /// Max-norm deviation of U^dag U from the identity.
    pub fn unitarity_defect(&self, params: &[f64]) -> f64 {
        if let Some(m) = self.matrix1(params) {
            max_defect(&m, 2)
        } else if let Some(m) = self.matrix2(params) {
            max_defect(&m, 4)
        } else {
            unreachable!()
        }
    }
}

fn max_defect(m: &[Complex64], d: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..d {
                s += m[k * d + i].conj() * m[k * d + j];
            }
            let expect = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((s - Complex64::new(expect, 0.0)).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_gates_are_unitary() {
        let gates = [
            Gate::one(GateKind::X, 0),
            Gate::one(GateKind::Y, 0),
            Gate::one(GateKind::Z, 0),
            Gate::one(GateKind::H, 0),
            Gate::one(GateKind::Rx(Angle::Fixed(0.7)), 0),
            Gate::one(GateKind::Ry(Angle::Fixed(-1.3)), 0),
            Gate::one(GateKind::Rz(Angle::Fixed(2.9)), 0),
            Gate::one(GateKind::Phase(Angle::Fixed(0.4)), 0),
            Gate::two(GateKind::Cnot, 0, 1),
            Gate::two(GateKind::Cz, 0, 1),
            Gate::two(GateKind::CPhase(Angle::Fixed(1.1)), 0, 1),
        ];
        for g in &gates {
            assert!(g.unitarity_defect(&[]) < 1e-10, "{:?}", g.kind);
        }
    }

    #[test]
    fn slot_angle_resolution() {
        let a = Angle::Slot { slot: 1, coeff: -0.5 };
        assert_eq!(a.resolve(&[9.0, 2.0]), -1.0);
        assert_eq!(Angle::Fixed(3.0).resolve(&[]), 3.0);
    }

    #[test]
    fn validate_rejects_bad_targets() {
        let g = Gate::one(GateKind::X, 3);
        assert!(matches!(g.validate(3), Err(SimError::TargetOutOfRange { .. })));
        let g = Gate::two(GateKind::Cnot, 1, 1);
        assert!(matches!(g.validate(3), Err(SimError::DuplicateTargets { .. })));
    }
}
