//! Configurable Kraus-channel noise model for the noisy simulation arm:
//! depolarizing + thermal relaxation after every gate, plus a readout
//! confusion matrix applied at expectation time.
//!
//! Parameter values are stand-ins of the same order as published
//! superconducting-backend medians; they are configuration, not data.

use num_complex::Complex64;

use crate::qsim::{DensityMatrix, SimError};
use crate::qsim::{left_mul_one, left_mul_two, right_mul_dag_one, right_mul_dag_two};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("probability {value} out of [0, 1] for {name}")]
    InvalidProbability { name: &'static str, value: f64 },
    #[error("invalid relaxation times: t1={t1}, t2={t2} (need 0 < t2 <= 2*t1)")]
    InvalidTimes { t1: f64, t2: f64 },
    #[error("negative duration {0}")]
    NegativeDuration(f64),
    #[error("readout confusion matrix malformed: {0}")]
    MalformedConfusion(String),
    #[error("depolarizing channel supports 1 or 2 qubits, got {0}")]
    BadChannelArity(usize),
    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },
}

/// Gate-level noise parameters. Times and durations share one unit
/// (nanoseconds in the shipped config).
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    /// Single-qubit depolarizing probability.
    pub p1: f64,
    /// Two-qubit depolarizing probability.
    pub p2: f64,
    pub t1: f64,
    pub t2: f64,
    pub dur1: f64,
    pub dur2: f64,
    /// Row-stochastic confusion matrix: row = true outcome, column = read
    /// outcome.
    pub readout_flip: [[f64; 2]; 2],
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            p1: 2.5e-4,
            p2: 7.5e-3,
            t1: 220_000.0, // 220 us
            t2: 140_000.0, // 140 us
            dur1: 60.0,
            dur2: 660.0,
            readout_flip: [[1.0 - 0.013, 0.013], [0.013, 1.0 - 0.013]],
        }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<(), NoiseError> {
        for (name, v) in [("p1", self.p1), ("p2", self.p2)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(NoiseError::InvalidProbability { name, value: v });
            }
        }
        if !(self.t1 > 0.0) || !(self.t2 > 0.0) || self.t2 > 2.0 * self.t1 {
            return Err(NoiseError::InvalidTimes { t1: self.t1, t2: self.t2 });
        }
        if self.dur1 < 0.0 {
            return Err(NoiseError::NegativeDuration(self.dur1));
        }
        if self.dur2 < 0.0 {
            return Err(NoiseError::NegativeDuration(self.dur2));
        }
        validate_confusion(&self.readout_flip)?;
        Ok(())
    }

    /// Parse the flat key-value noise config. Keys are exactly
    /// p1, p2, t1_us, t2_us, dur1_ns, dur2_ns, readout_e01, readout_e10;
    /// unknown keys are rejected, missing keys keep their defaults.
    pub fn from_config_str(text: &str) -> Result<Self, NoiseError> {
        let mut model = NoiseModel::default();
        let mut e01 = model.readout_flip[0][1];
        let mut e10 = model.readout_flip[1][0];
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            let Some((key, value)) = s.split_once('=') else {
                return Err(NoiseError::Config { line, reason: format!("expected KEY=VALUE, got {s:?}") });
            };
            let key = key.trim();
            let value: f64 = value.trim().parse().map_err(|_| NoiseError::Config {
                line,
                reason: format!("bad numeric value for {key}"),
            })?;
            match key {
                "p1" => model.p1 = value,
                "p2" => model.p2 = value,
                "t1_us" => model.t1 = value * 1e3,
                "t2_us" => model.t2 = value * 1e3,
                "dur1_ns" => model.dur1 = value,
                "dur2_ns" => model.dur2 = value,
                "readout_e01" => e01 = value,
                "readout_e10" => e10 = value,
                other => {
                    return Err(NoiseError::Config { line, reason: format!("unknown key {other:?}") })
                }
            }
        }
        model.readout_flip = [[1.0 - e01, e01], [e10, 1.0 - e10]];
        model.validate()?;
        Ok(model)
    }
}

fn validate_confusion(m: &[[f64; 2]; 2]) -> Result<(), NoiseError> {
    for row in m {
        for &v in row {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(NoiseError::MalformedConfusion(format!("entry {v} out of [0, 1]")));
            }
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(NoiseError::MalformedConfusion(format!("row sums to {s}")));
        }
    }
    Ok(())
}

/// A list of Kraus operators of uniform square dimension (2 or 4).
#[derive(Debug, Clone)]
pub struct KrausChannel {
    dim: usize,
    ops: Vec<Vec<Complex64>>,
}

impl KrausChannel {
    pub fn new(dim: usize, ops: Vec<Vec<Complex64>>) -> Self {
        debug_assert!(ops.iter().all(|o| o.len() == dim * dim));
        KrausChannel { dim, ops }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[Vec<Complex64>] {
        &self.ops
    }

    /// Max-norm of (sum K^dag K) - I; trace preservation demands ~0.
    pub fn completeness_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut s = Complex64::new(0.0, 0.0);
                for op in &self.ops {
                    for k in 0..d {
                        s += op[k * d + i].conj() * op[k * d + j];
                    }
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - Complex64::new(expect, 0.0)).norm());
            }
        }
        worst
    }

    /// rho -> sum_k K rho K^dag on the given target qubits.
    pub fn apply(&self, dm: &mut DensityMatrix, targets: &[usize]) -> Result<(), SimError> {
        match (self.dim, targets.len()) {
            (2, 1) => {
                let mut acc = DensityMatrix::zeros(dm.n_qubits());
                for op in &self.ops {
                    let m: [Complex64; 4] = op.as_slice().try_into().unwrap();
                    let mut t = dm.clone();
                    left_mul_one(&mut t, targets[0], &m);
                    right_mul_dag_one(&mut t, targets[0], &m);
                    acc.scaled_add(1.0, &t);
                }
                *dm = acc;
                Ok(())
            }
            (4, 2) => {
                let mut acc = DensityMatrix::zeros(dm.n_qubits());
                for op in &self.ops {
                    let m: [Complex64; 16] = op.as_slice().try_into().unwrap();
                    let mut t = dm.clone();
                    left_mul_two(&mut t, targets[0], targets[1], &m);
                    right_mul_dag_two(&mut t, targets[0], targets[1], &m);
                    acc.scaled_add(1.0, &t);
                }
                *dm = acc;
                Ok(())
            }
            _ => Err(SimError::MissingChannel { arity: targets.len() }),
        }
    }
}

const PAULI_1Q: [[Complex64; 4]; 4] = {
    const O: Complex64 = Complex64::new(0.0, 0.0);
    const L: Complex64 = Complex64::new(1.0, 0.0);
    const NL: Complex64 = Complex64::new(-1.0, 0.0);
    const I: Complex64 = Complex64::new(0.0, 1.0);
    const NI: Complex64 = Complex64::new(0.0, -1.0);
    [
        [L, O, O, L],   // I
        [O, L, L, O],   // X
        [O, NI, I, O],  // Y
        [L, O, O, NL],  // Z
    ]
};

/// Depolarizing channel: with probability p the state is replaced by the
/// maximally mixed state on the targeted qubits. p = 0 is the identity.
pub fn depolarizing_channel(p: f64, n_qubits: usize) -> Result<KrausChannel, NoiseError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(NoiseError::InvalidProbability { name: "p", value: p });
    }
    match n_qubits {
        1 => {
            let mut ops = Vec::with_capacity(4);
            for (i, pauli) in PAULI_1Q.iter().enumerate() {
                let w = if i == 0 { (1.0 - 3.0 * p / 4.0).sqrt() } else { (p / 4.0).sqrt() };
                ops.push(pauli.iter().map(|&c| c * w).collect());
            }
            Ok(KrausChannel::new(2, ops))
        }
        2 => {
            let mut ops = Vec::with_capacity(16);
            for a in 0..4 {
                for b in 0..4 {
                    let w = if a == 0 && b == 0 {
                        (1.0 - 15.0 * p / 16.0).sqrt()
                    } else {
                        (p / 16.0).sqrt()
                    };
                    let mut m = vec![Complex64::new(0.0, 0.0); 16];
                    for r0 in 0..2 {
                        for c0 in 0..2 {
                            for r1 in 0..2 {
                                for c1 in 0..2 {
                                    m[(r0 * 2 + r1) * 4 + (c0 * 2 + c1)] =
                                        PAULI_1Q[a][r0 * 2 + c0] * PAULI_1Q[b][r1 * 2 + c1] * w;
                                }
                            }
                        }
                    }
                    ops.push(m);
                }
            }
            Ok(KrausChannel::new(4, ops))
        }
        other => Err(NoiseError::BadChannelArity(other)),
    }
}

/// Thermal relaxation: amplitude damping with gamma = 1 - e^(-d/t1) composed
/// with pure dephasing so off-diagonals decay as e^(-d/t2).
pub fn thermal_relaxation_channel(t1: f64, t2: f64, duration: f64) -> Result<KrausChannel, NoiseError> {
    if !(t1 > 0.0) || !(t2 > 0.0) || t2 > 2.0 * t1 {
        return Err(NoiseError::InvalidTimes { t1, t2 });
    }
    if duration < 0.0 {
        return Err(NoiseError::NegativeDuration(duration));
    }
    Ok(KrausChannel::new(2, thermal_kraus(t1, t2, duration).to_vec().into_iter().map(|m| m.to_vec()).collect()))
}

/// The three 2x2 Kraus operators of the thermal channel.
fn thermal_kraus(t1: f64, t2: f64, duration: f64) -> [[Complex64; 4]; 3] {
    let gamma = 1.0 - (-duration / t1).exp();
    // (1 - 2 p_z) * sqrt(1 - gamma) = e^(-d/t2)
    let residual = (-duration * (1.0 / t2 - 0.5 / t1)).exp();
    let p_z = 0.5 * (1.0 - residual);
    let o = Complex64::new(0.0, 0.0);
    let keep = (1.0 - gamma).sqrt();
    let a = (1.0 - p_z).sqrt();
    let b = p_z.sqrt();
    [
        [Complex64::new(a, 0.0), o, o, Complex64::new(a * keep, 0.0)],
        [Complex64::new(b, 0.0), o, o, Complex64::new(-b * keep, 0.0)],
        [o, Complex64::new(gamma.sqrt(), 0.0), o, o],
    ]
}

/// Readout error on a Z expectation: flip probabilities applied to the
/// implied outcome distribution, returning 2 p'(0) - 1.
pub fn apply_readout_error(z: f64, readout_flip: &[[f64; 2]; 2]) -> Result<f64, NoiseError> {
    validate_confusion(readout_flip)?;
    let p0 = (1.0 + z) / 2.0;
    let p1 = (1.0 - z) / 2.0;
    let p0_read = readout_flip[0][0] * p0 + readout_flip[1][0] * p1;
    Ok(2.0 * p0_read - 1.0)
}

/// Thermal relaxation parameters reduced to their action on a single qubit:
/// populations relax by gamma, coherences shrink by offdiag = e^(-d/t2).
#[derive(Debug, Clone, Copy)]
struct ThermalParams {
    gamma: f64,
    offdiag: f64,
}

fn thermal_params(t1: f64, t2: f64, duration: f64) -> ThermalParams {
    ThermalParams {
        gamma: 1.0 - (-duration / t1).exp(),
        offdiag: (-duration / t2).exp(),
    }
}

/// Direct action of the thermal channel on the target-qubit blocks:
///   rho00 += gamma rho11, rho11 *= 1-gamma, rho01/rho10 *= offdiag.
/// The adjoint flips the population flow: L11 += gamma L00 with L00 kept.
fn apply_thermal(dm: &mut DensityMatrix, q: usize, th: ThermalParams, adjoint: bool) {
    let n = dm.n_qubits();
    let dim = dm.dim();
    let mask = 1usize << (n - 1 - q);
    let keep = 1.0 - th.gamma;
    for r in 0..dim {
        if r & mask != 0 {
            continue;
        }
        let r1 = r | mask;
        for c in 0..dim {
            if c & mask != 0 {
                continue;
            }
            let c1 = c | mask;
            let a00 = dm.entry(r, c);
            let a01 = dm.entry(r, c1);
            let a10 = dm.entry(r1, c);
            let a11 = dm.entry(r1, c1);
            let m = dm.entries_mut();
            if adjoint {
                m[r * dim + c] = a00;
                m[r1 * dim + c1] = keep * a11 + th.gamma * a00;
            } else {
                m[r * dim + c] = a00 + th.gamma * a11;
                m[r1 * dim + c1] = keep * a11;
            }
            m[r * dim + c1] = th.offdiag * a01;
            m[r1 * dim + c] = th.offdiag * a10;
        }
    }
}

/// Noise bound to a circuit's gate inventory: after every single-qubit gate,
/// thermal(dur1) then depolarizing(p1) on the target; after every two-qubit
/// gate, thermal(dur2) on both targets then depolarizing(p2) on the pair.
#[derive(Debug, Clone)]
pub struct BoundNoise {
    p1: f64,
    p2: f64,
    thermal1: ThermalParams,
    thermal2: ThermalParams,
    readout_flip: [[f64; 2]; 2],
    dur1: f64,
    dur2: f64,
    t1: f64,
    t2: f64,
}

/// Build the per-gate noisy execution plan for a circuit. The channel table
/// depends only on gate arity, so the plan validates the model once and is
/// shared across circuits of any size.
pub fn bind_noise(circuit: &crate::qsim::Circuit, model: &NoiseModel) -> Result<BoundNoise, NoiseError> {
    let _ = circuit; // every supported gate kind has a channel entry by arity
    BoundNoise::new(model)
}

impl BoundNoise {
    pub fn new(model: &NoiseModel) -> Result<Self, NoiseError> {
        model.validate()?;
        Ok(BoundNoise {
            p1: model.p1,
            p2: model.p2,
            thermal1: thermal_params(model.t1, model.t2, model.dur1),
            thermal2: thermal_params(model.t1, model.t2, model.dur2),
            readout_flip: model.readout_flip,
            dur1: model.dur1,
            dur2: model.dur2,
            t1: model.t1,
            t2: model.t2,
        })
    }

    pub fn apply_readout(&self, z: f64) -> f64 {
        apply_readout_error(z, &self.readout_flip).expect("validated at construction")
    }

    /// Slope of the readout-error map (it is affine in <Z>).
    pub fn readout_scale(&self) -> f64 {
        self.readout_flip[0][0] - self.readout_flip[1][0]
    }

    pub(crate) fn apply_after_gate(&self, dm: &mut DensityMatrix, targets: &[usize]) -> Result<(), SimError> {
        match targets.len() {
            1 => {
                apply_thermal(dm, targets[0], self.thermal1, false);
                apply_depol1(dm, targets[0], self.p1);
                Ok(())
            }
            2 => {
                apply_thermal(dm, targets[0], self.thermal2, false);
                apply_thermal(dm, targets[1], self.thermal2, false);
                apply_depol2(dm, targets[0], targets[1], self.p2);
                Ok(())
            }
            arity => Err(SimError::MissingChannel { arity }),
        }
    }

    /// Adjoint of `apply_after_gate` (for backward gradient sweeps):
    /// reverse order, adjoint channels. Depolarizing is self-adjoint.
    pub(crate) fn apply_adjoint_after_gate(
        &self,
        dm: &mut DensityMatrix,
        targets: &[usize],
    ) -> Result<(), SimError> {
        match targets.len() {
            1 => {
                apply_depol1(dm, targets[0], self.p1);
                apply_thermal(dm, targets[0], self.thermal1, true);
                Ok(())
            }
            2 => {
                apply_depol2(dm, targets[0], targets[1], self.p2);
                apply_thermal(dm, targets[1], self.thermal2, true);
                apply_thermal(dm, targets[0], self.thermal2, true);
                Ok(())
            }
            arity => Err(SimError::MissingChannel { arity }),
        }
    }

    /// Depth-equivalent aggregate noise standing in for an amplitude-encoding
    /// state-preparation circuit: qubit k of an n-qubit multiplexed-rotation
    /// prep sees ~2^k rotations and ~2^k entanglers into its neighbor, so the
    /// compounded channels grow exponentially with register size.
    pub fn apply_amplitude_prep(&self, dm: &mut DensityMatrix) {
        let n = dm.n_qubits();
        for k in 1..n {
            let count = (1u64 << k) as f64;
            let p_eff = 1.0 - (1.0 - self.p2).powf(count);
            let th = thermal_params(self.t1, self.t2, count * self.dur2);
            apply_thermal(dm, k - 1, th, false);
            apply_thermal(dm, k, th, false);
            apply_depol2(dm, k - 1, k, p_eff);
        }
        for k in 0..n {
            let count = (1u64 << k) as f64;
            let p_eff = 1.0 - (1.0 - self.p1).powf(count);
            let th = thermal_params(self.t1, self.t2, count * self.dur1);
            apply_thermal(dm, k, th, false);
            apply_depol1(dm, k, p_eff);
        }
    }

    /// Adjoint of `apply_amplitude_prep`.
    pub fn apply_amplitude_prep_adjoint(&self, dm: &mut DensityMatrix) {
        let n = dm.n_qubits();
        for k in (0..n).rev() {
            let count = (1u64 << k) as f64;
            let p_eff = 1.0 - (1.0 - self.p1).powf(count);
            let th = thermal_params(self.t1, self.t2, count * self.dur1);
            apply_depol1(dm, k, p_eff);
            apply_thermal(dm, k, th, true);
        }
        for k in (1..n).rev() {
            let count = (1u64 << k) as f64;
            let p_eff = 1.0 - (1.0 - self.p2).powf(count);
            let th = thermal_params(self.t1, self.t2, count * self.dur2);
            apply_depol2(dm, k - 1, k, p_eff);
            apply_thermal(dm, k, th, true);
            apply_thermal(dm, k - 1, th, true);
        }
    }
}

/// Depolarizing via its affine form: (1-p) rho + p (I/2 (x) tr_q rho).
/// Valid for arbitrary operators, and self-adjoint (Pauli Kraus set).
fn apply_depol1(dm: &mut DensityMatrix, q: usize, p: f64) {
    if p == 0.0 {
        return;
    }
    let n = dm.n_qubits();
    let dim = dm.dim();
    let mask = 1usize << (n - 1 - q);
    let keep = 1.0 - p;
    let half = p / 2.0;
    for r in 0..dim {
        if r & mask != 0 {
            continue;
        }
        let r1 = r | mask;
        for c in 0..dim {
            if c & mask != 0 {
                continue;
            }
            let c1 = c | mask;
            let a00 = dm.entry(r, c);
            let a01 = dm.entry(r, c1);
            let a10 = dm.entry(r1, c);
            let a11 = dm.entry(r1, c1);
            let t = a00 + a11;
            let m = dm.entries_mut();
            m[r * dim + c] = keep * a00 + half * t;
            m[r * dim + c1] = keep * a01;
            m[r1 * dim + c] = keep * a10;
            m[r1 * dim + c1] = keep * a11 + half * t;
        }
    }
}

/// Two-qubit depolarizing via its affine form with I/4 (x) tr_{q0 q1} rho.
fn apply_depol2(dm: &mut DensityMatrix, q0: usize, q1: usize, p: f64) {
    if p == 0.0 {
        return;
    }
    let n = dm.n_qubits();
    let dim = dm.dim();
    let m0 = 1usize << (n - 1 - q0);
    let m1 = 1usize << (n - 1 - q1);
    let keep = 1.0 - p;
    let quarter = p / 4.0;
    for r in 0..dim {
        if r & m0 != 0 || r & m1 != 0 {
            continue;
        }
        for c in 0..dim {
            if c & m0 != 0 || c & m1 != 0 {
                continue;
            }
            let rows = [r, r | m1, r | m0, r | m0 | m1];
            let cols = [c, c | m1, c | m0, c | m0 | m1];
            let mut tr = Complex64::new(0.0, 0.0);
            for k in 0..4 {
                tr += dm.entry(rows[k], cols[k]);
            }
            let m = dm.entries_mut();
            for (ri, &rr) in rows.iter().enumerate() {
                for (ci, &cc) in cols.iter().enumerate() {
                    let v = m[rr * dim + cc] * keep;
                    m[rr * dim + cc] = if ri == ci { v + quarter * tr } else { v };
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{apply_gate, Gate, GateKind, PureState};

    #[test]
    fn depolarizing_completeness() {
        for &p in &[0.0, 0.3, 1.0] {
            assert!(depolarizing_channel(p, 1).unwrap().completeness_defect() < 1e-12);
            assert!(depolarizing_channel(p, 2).unwrap().completeness_defect() < 1e-12);
        }
        assert!(depolarizing_channel(1.5, 1).is_err());
        assert!(depolarizing_channel(0.5, 3).is_err());
    }

    #[test]
    fn full_depolarizing_gives_maximally_mixed() {
        let plus = apply_gate(&PureState::zero(1), &Gate::one(GateKind::H, 0)).unwrap();
        let mut dm = DensityMatrix::from_pure(&plus);
        depolarizing_channel(1.0, 1).unwrap().apply(&mut dm, &[0]).unwrap();
        let mm = DensityMatrix::maximally_mixed(1);
        for (a, b) in dm.entries().iter().zip(mm.entries()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn depol_fast_path_matches_kraus_channel() {
        let mut s = PureState::zero(2);
        crate::qsim::apply_gate_in_place(&mut s, &Gate::one(GateKind::H, 0), &[]);
        crate::qsim::apply_gate_in_place(&mut s, &Gate::one(GateKind::Ry(crate::qsim::Angle::Fixed(0.7)), 1), &[]);
        crate::qsim::apply_gate_in_place(&mut s, &Gate::two(GateKind::Cnot, 0, 1), &[]);
        let base = DensityMatrix::from_pure(&s);

        let mut via_kraus = base.clone();
        depolarizing_channel(0.37, 1).unwrap().apply(&mut via_kraus, &[1]).unwrap();
        let mut via_affine = base.clone();
        apply_depol1(&mut via_affine, 1, 0.37);
        for (a, b) in via_kraus.entries().iter().zip(via_affine.entries()) {
            assert!((a - b).norm() < 1e-12);
        }

        let mut via_kraus2 = base.clone();
        depolarizing_channel(0.21, 2).unwrap().apply(&mut via_kraus2, &[0, 1]).unwrap();
        let mut via_affine2 = base.clone();
        apply_depol2(&mut via_affine2, 0, 1, 0.21);
        for (a, b) in via_kraus2.entries().iter().zip(via_affine2.entries()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn thermal_limits() {
        // duration 0 -> identity
        let ch = thermal_relaxation_channel(220e3, 140e3, 0.0).unwrap();
        assert!(ch.completeness_defect() < 1e-12);
        let mut s = PureState::zero(1);
        crate::qsim::apply_gate_in_place(&mut s, &Gate::one(GateKind::H, 0), &[]);
        let base = DensityMatrix::from_pure(&s);
        let mut dm = base.clone();
        ch.apply(&mut dm, &[0]).unwrap();
        for (a, b) in dm.entries().iter().zip(base.entries()) {
            assert!((a - b).norm() < 1e-12);
        }
        // long duration: |1><1| -> |0><0|
        let ch = thermal_relaxation_channel(1.0, 1.0, 1e9).unwrap();
        let mut excited = DensityMatrix::from_pure(&PureState::basis(1, 1));
        ch.apply(&mut excited, &[0]).unwrap();
        assert!((excited.entry(0, 0).re - 1.0).abs() < 1e-9);
        assert!(excited.entry(1, 1).norm() < 1e-9);
    }

    #[test]
    fn thermal_offdiagonal_decay_rate() {
        let (t1, t2, d) = (220e3, 140e3, 500.0);
        let ch = thermal_relaxation_channel(t1, t2, d).unwrap();
        assert!(ch.completeness_defect() < 1e-12);
        let plus = apply_gate(&PureState::zero(1), &Gate::one(GateKind::H, 0)).unwrap();
        let mut dm = DensityMatrix::from_pure(&plus);
        let before = dm.entry(0, 1).norm();
        ch.apply(&mut dm, &[0]).unwrap();
        let after = dm.entry(0, 1).norm();
        assert!((after - before * (-d / t2).exp()).abs() < 1e-12);
    }

    #[test]
    fn bound_noise_thermal_fast_path_matches_kraus_channel() {
        let model = NoiseModel { p1: 0.0, p2: 0.0, ..NoiseModel::default() };
        let bound = BoundNoise::new(&model).unwrap();
        let mut s = PureState::zero(2);
        crate::qsim::apply_gate_in_place(&mut s, &Gate::one(GateKind::H, 0), &[]);
        crate::qsim::apply_gate_in_place(&mut s, &Gate::two(GateKind::Cnot, 0, 1), &[]);
        let base = DensityMatrix::from_pure(&s);

        let mut fast = base.clone();
        bound.apply_after_gate(&mut fast, &[1]).unwrap();
        let mut generic = base.clone();
        thermal_relaxation_channel(model.t1, model.t2, model.dur1)
            .unwrap()
            .apply(&mut generic, &[1])
            .unwrap();
        for (a, b) in fast.entries().iter().zip(generic.entries()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn adjoint_channel_preserves_trace_pairing() {
        // Tr(E(rho) L) == Tr(rho E^dag(L)) for random-ish rho, L
        let bound = BoundNoise::new(&NoiseModel::default()).unwrap();
        let mut s = PureState::zero(2);
        crate::qsim::apply_gate_in_place(&mut s, &Gate::one(GateKind::Ry(crate::qsim::Angle::Fixed(0.8)), 0), &[]);
        crate::qsim::apply_gate_in_place(&mut s, &Gate::two(GateKind::Cnot, 0, 1), &[]);
        let rho = DensityMatrix::from_pure(&s);
        let lam = DensityMatrix::z_observable(2, 1);

        let mut erho = rho.clone();
        bound.apply_after_gate(&mut erho, &[0, 1]).unwrap();
        let lhs = erho.overlap(&lam);

        let mut elam = lam.clone();
        bound.apply_adjoint_after_gate(&mut elam, &[0, 1]).unwrap();
        let rhs = rho.overlap(&elam);
        assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");

        // same pairing for the amplitude-prep aggregate
        let mut prho = rho.clone();
        bound.apply_amplitude_prep(&mut prho);
        let lhs = prho.overlap(&lam);
        let mut plam = lam.clone();
        bound.apply_amplitude_prep_adjoint(&mut plam);
        let rhs = rho.overlap(&plam);
        assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
    }

    #[test]
    fn readout_error_basics() {
        let identity = [[1.0, 0.0], [0.0, 1.0]];
        assert!((apply_readout_error(0.73, &identity).unwrap() - 0.73).abs() < 1e-15);
        let total_flip = [[0.0, 1.0], [1.0, 0.0]];
        assert!((apply_readout_error(0.73, &total_flip).unwrap() + 0.73).abs() < 1e-15);
        let sym = [[0.98, 0.02], [0.02, 0.98]];
        assert!((apply_readout_error(1.0, &sym).unwrap() - 0.96).abs() < 1e-15);
        let bad = [[0.7, 0.2], [0.0, 1.0]];
        assert!(apply_readout_error(0.0, &bad).is_err());
    }

    #[test]
    fn config_roundtrip_and_rejection() {
        let text = "p1 = 1e-4\np2=5e-3\nt1_us = 100\nt2_us = 80\ndur1_ns=50\ndur2_ns=400\nreadout_e01=0.01\nreadout_e10=0.02\n";
        let m = NoiseModel::from_config_str(text).unwrap();
        assert_eq!(m.p1, 1e-4);
        assert_eq!(m.t1, 100e3);
        assert_eq!(m.readout_flip[0][1], 0.01);
        assert_eq!(m.readout_flip[1][0], 0.02);
        let bad = NoiseModel::from_config_str("p3=0.1\n");
        assert!(matches!(bad, Err(NoiseError::Config { line: 1, .. })));
    }

    #[test]
    fn model_validation() {
        let mut m = NoiseModel::default();
        m.t2 = 3.0 * m.t1;
        assert!(m.validate().is_err());
        let mut m = NoiseModel::default();
        m.p2 = 1.2;
        assert!(m.validate().is_err());
        assert!(NoiseModel::default().validate().is_ok());
    }
}
