//! Data-to-state encodings (amplitude, angle, linear ZZ feature map), state
//! fidelity, and the ensemble trace distance used to score embeddings.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::noise::BoundNoise;
use crate::qsim::{
    gradient_adjoint_dm, run_with_jacobian, Angle, Circuit, DensityMatrix, Gate, GateKind,
    PureState, SimError,
};

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("embedding expects {expected} features, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("states have different qubit counts: {a} vs {b}")]
    WidthMismatch { a: usize, b: usize },
    #[error("amplitude encoding rejects (near-)zero vectors (norm {norm})")]
    ZeroVector { norm: f64 },
    #[error("non-finite feature value at index {0}")]
    NonFinite(usize),
    #[error("ensemble for one class is empty")]
    EmptyClass,
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum EmbeddingKind {
    Amplitude,
    Angle,
    ZzLinear,
}

impl EmbeddingKind {
    pub fn label(&self) -> &'static str {
        match self {
            EmbeddingKind::Amplitude => "amplitude",
            EmbeddingKind::Angle => "angle",
            EmbeddingKind::ZzLinear => "zz",
        }
    }
}

impl std::str::FromStr for EmbeddingKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "amplitude" | "amp" => Ok(EmbeddingKind::Amplitude),
            "angle" | "ang" => Ok(EmbeddingKind::Angle),
            "zz" | "zzlinear" => Ok(EmbeddingKind::ZzLinear),
            other => Err(format!("unknown embedding kind {other:?}")),
        }
    }
}

/// An embedding bound to a register width. Angle and ZZ carry their encoding
/// circuit (feature index = parameter slot); amplitude encodes directly.
#[derive(Debug, Clone)]
pub struct Embedding {
    kind: EmbeddingKind,
    n_qubits: usize,
    circuit: Option<Circuit>,
}

impl Embedding {
    pub fn new(kind: EmbeddingKind, n_qubits: usize) -> Self {
        let circuit = match kind {
            EmbeddingKind::Amplitude => None,
            EmbeddingKind::Angle => Some(angle_circuit(n_qubits)),
            EmbeddingKind::ZzLinear => Some(zz_circuit(n_qubits)),
        };
        Embedding { kind, n_qubits, circuit }
    }

    pub fn kind(&self) -> EmbeddingKind {
        self.kind
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Number of classical features consumed: 2^n (amplitude), n (angle),
    /// 2n (ZZ: two encoding blocks of n fresh features each).
    pub fn arity(&self) -> usize {
        match self.kind {
            EmbeddingKind::Amplitude => 1 << self.n_qubits,
            EmbeddingKind::Angle => self.n_qubits,
            EmbeddingKind::ZzLinear => 2 * self.n_qubits,
        }
    }

    fn check(&self, x: &[f64]) -> Result<(), EmbedError> {
        if x.len() != self.arity() {
            return Err(EmbedError::ArityMismatch { expected: self.arity(), got: x.len() });
        }
        for (i, v) in x.iter().enumerate() {
            if !v.is_finite() {
                return Err(EmbedError::NonFinite(i));
            }
        }
        Ok(())
    }

    pub fn encode(&self, x: &[f64]) -> Result<PureState, EmbedError> {
        self.check(x)?;
        match self.kind {
            EmbeddingKind::Amplitude => amplitude_encode_checked(self.n_qubits, x),
            _ => {
                let circuit = self.circuit.as_ref().unwrap();
                Ok(circuit.run(x, &PureState::zero(self.n_qubits))?)
            }
        }
    }

    /// Encoded state plus d psi / d feature columns.
    pub fn encode_with_jacobian(&self, x: &[f64]) -> Result<(PureState, Vec<Vec<Complex64>>), EmbedError> {
        self.check(x)?;
        match self.kind {
            EmbeddingKind::Amplitude => {
                let state = amplitude_encode_checked(self.n_qubits, x)?;
                let dim = state.dim();
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let a = state.amplitudes();
                let mut jac = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
                for k in 0..dim {
                    for j in 0..dim {
                        let delta = if j == k { 1.0 } else { 0.0 };
                        jac[k][j] = Complex64::new((delta - a[j].re * a[k].re) / norm, 0.0);
                    }
                }
                Ok((state, jac))
            }
            _ => {
                let circuit = self.circuit.as_ref().unwrap();
                Ok(run_with_jacobian(circuit, x, &PureState::zero(self.n_qubits))?)
            }
        }
    }

    /// Pure-state pair fidelity |<a|b>|^2 and its gradient w.r.t. both
    /// feature vectors.
    pub fn fidelity_with_grad(&self, xa: &[f64], xb: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>), EmbedError> {
        if self.kind == EmbeddingKind::Amplitude {
            self.check(xa)?;
            self.check(xb)?;
            return amplitude_fidelity_grad(xa, xb);
        }
        let (sa, ja) = self.encode_with_jacobian(xa)?;
        let (sb, jb) = self.encode_with_jacobian(xb)?;
        let o = sa.inner(&sb);
        let f = o.norm_sqr();
        let mut ga = vec![0.0; xa.len()];
        for (k, col) in ja.iter().enumerate() {
            // d<a|b>/dxa_k = <da/dxa_k | b>
            let d: Complex64 = col
                .iter()
                .zip(sb.amplitudes())
                .map(|(ca, cb)| ca.conj() * cb)
                .sum();
            ga[k] = 2.0 * (o.conj() * d).re;
        }
        let mut gb = vec![0.0; xb.len()];
        for (k, col) in jb.iter().enumerate() {
            let d: Complex64 = sa
                .amplitudes()
                .iter()
                .zip(col)
                .map(|(ca, cb)| ca.conj() * cb)
                .sum();
            gb[k] = 2.0 * (o.conj() * d).re;
        }
        Ok((f, ga, gb))
    }

    /// Embedded state on the noisy density-matrix path. Angle/ZZ run their
    /// encoding circuit under per-gate noise; amplitude applies the
    /// depth-equivalent state-preparation noise stand-in after exact
    /// encoding.
    pub fn noisy_embed(&self, x: &[f64], bound: &BoundNoise) -> Result<DensityMatrix, EmbedError> {
        self.check(x)?;
        match self.kind {
            EmbeddingKind::Amplitude => {
                let state = amplitude_encode_checked(self.n_qubits, x)?;
                let mut dm = DensityMatrix::from_pure(&state);
                bound.apply_amplitude_prep(&mut dm);
                Ok(dm)
            }
            _ => {
                let circuit = self.circuit.as_ref().unwrap();
                let input = DensityMatrix::from_pure(&PureState::zero(self.n_qubits));
                Ok(circuit.run_dm(x, &input, Some(bound))?)
            }
        }
    }

    /// Noisy pair fidelity Tr(rho_a rho_b) and its gradient w.r.t. both
    /// feature vectors (reduces to |<a|b>|^2 in the noiseless pure case).
    pub fn noisy_fidelity_with_grad(
        &self,
        xa: &[f64],
        xb: &[f64],
        bound: &BoundNoise,
    ) -> Result<(f64, Vec<f64>, Vec<f64>), EmbedError> {
        let rho_a = self.noisy_embed(xa, bound)?;
        let rho_b = self.noisy_embed(xb, bound)?;
        match self.kind {
            EmbeddingKind::Amplitude => {
                let f = rho_a.overlap(&rho_b);
                let ga = amplitude_prep_grad(self.n_qubits, xa, &rho_b, bound)?;
                let gb = amplitude_prep_grad(self.n_qubits, xb, &rho_a, bound)?;
                Ok((f, ga, gb))
            }
            _ => {
                let circuit = self.circuit.as_ref().unwrap();
                let input = DensityMatrix::from_pure(&PureState::zero(self.n_qubits));
                let (f, ga) = gradient_adjoint_dm(circuit, xa, &input, Some(bound), &rho_b)?;
                let (_, gb) = gradient_adjoint_dm(circuit, xb, &input, Some(bound), &rho_a)?;
                Ok((f, ga, gb))
            }
        }
    }
}

fn angle_circuit(n: usize) -> Circuit {
    let mut c = Circuit::new(n, n);
    for q in 0..n {
        c.push(Gate::one(GateKind::Ry(Angle::Slot { slot: q, coeff: 1.0 }), q)).unwrap();
    }
    c
}

/// Two repetitions of [H on all; Phase(2 x_i) on qubit i; for each
/// nearest-neighbor pair an entangling phase of 2 x_i x_{i+1} realized as
/// CNOT-Phase-CNOT], repetition r consuming features x[r n .. r n + n).
fn zz_circuit(n: usize) -> Circuit {
    let mut c = Circuit::new(n, 2 * n);
    for rep in 0..2 {
        let off = rep * n;
        for q in 0..n {
            c.push(Gate::one(GateKind::H, q)).unwrap();
        }
        for q in 0..n {
            c.push(Gate::one(GateKind::Phase(Angle::Slot { slot: off + q, coeff: 2.0 }), q)).unwrap();
        }
        for i in 0..n.saturating_sub(1) {
            c.push(Gate::two(GateKind::Cnot, i, i + 1)).unwrap();
            c.push(Gate::one(
                GateKind::Phase(Angle::SlotProduct { a: off + i, b: off + i + 1, coeff: 2.0 }),
                i + 1,
            ))
            .unwrap();
            c.push(Gate::two(GateKind::Cnot, i, i + 1)).unwrap();
        }
    }
    c
}

fn amplitude_encode_checked(n_qubits: usize, x: &[f64]) -> Result<PureState, EmbedError> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= 1e-12 {
        return Err(EmbedError::ZeroVector { norm });
    }
    let amps = x.iter().map(|&v| Complex64::new(v / norm, 0.0)).collect();
    Ok(PureState::from_raw(n_qubits, amps))
}

/// Squared cosine similarity (u.v)^2 / (|u|^2 |v|^2) with gradients; equals
/// the fidelity of the two amplitude encodings, which never needs the
/// normalization Jacobian materialized.
pub fn squared_cosine_with_grad(u: &[f64], v: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>), EmbedError> {
    amplitude_fidelity_grad(u, v)
}

fn amplitude_fidelity_grad(u: &[f64], v: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>), EmbedError> {
    let nu2: f64 = u.iter().map(|a| a * a).sum();
    let nv2: f64 = v.iter().map(|a| a * a).sum();
    if nu2.sqrt() <= 1e-12 {
        return Err(EmbedError::ZeroVector { norm: nu2.sqrt() });
    }
    if nv2.sqrt() <= 1e-12 {
        return Err(EmbedError::ZeroVector { norm: nv2.sqrt() });
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let f = dot * dot / (nu2 * nv2);
    let gu: Vec<f64> = u
        .iter()
        .zip(v)
        .map(|(&ui, &vi)| 2.0 * dot / (nu2 * nv2) * vi - 2.0 * dot * dot / (nu2 * nu2 * nv2) * ui)
        .collect();
    let gv: Vec<f64> = u
        .iter()
        .zip(v)
        .map(|(&ui, &vi)| 2.0 * dot / (nu2 * nv2) * ui - 2.0 * dot * dot / (nu2 * nv2 * nv2) * vi)
        .collect();
    Ok((f, gu, gv))
}

/// Gradient of Tr(N(|a(u)><a(u)|) sigma) w.r.t. u, where N is the amplitude
/// state-prep noise: pull sigma back through the adjoint channel, then
/// differentiate <a|M|a> through the normalization.
fn amplitude_prep_grad(
    n_qubits: usize,
    u: &[f64],
    sigma: &DensityMatrix,
    bound: &BoundNoise,
) -> Result<Vec<f64>, EmbedError> {
    let mut m = sigma.clone();
    bound.apply_amplitude_prep_adjoint(&mut m);
    let a = amplitude_encode_checked(n_qubits, u)?;
    let dim = a.dim();
    let amps = a.amplitudes();
    // g_a = 2 Re(M a)
    let mut ga = vec![0.0; dim];
    for r in 0..dim {
        let mut s = Complex64::new(0.0, 0.0);
        for c2 in 0..dim {
            s += m.entry(r, c2) * amps[c2];
        }
        ga[r] = 2.0 * s.re;
    }
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    let a_dot_g: f64 = amps.iter().zip(&ga).map(|(ai, gi)| ai.re * gi).sum();
    Ok((0..dim).map(|k| (ga[k] - amps[k].re * a_dot_g) / norm).collect())
}

pub fn amplitude_encode(x: &[f64]) -> Result<PureState, EmbedError> {
    let n = x.len().trailing_zeros() as usize;
    assert!(x.len().is_power_of_two() && !x.is_empty());
    Embedding::new(EmbeddingKind::Amplitude, n).encode(x)
}

pub fn angle_encode(x: &[f64]) -> Result<PureState, EmbedError> {
    Embedding::new(EmbeddingKind::Angle, x.len()).encode(x)
}

pub fn zz_encode(x: &[f64]) -> Result<PureState, EmbedError> {
    assert!(x.len() % 2 == 0 && !x.is_empty());
    Embedding::new(EmbeddingKind::ZzLinear, x.len() / 2).encode(x)
}

/// |<a|b>|^2.
pub fn fidelity(a: &PureState, b: &PureState) -> Result<f64, EmbedError> {
    if a.n_qubits() != b.n_qubits() {
        return Err(EmbedError::WidthMismatch { a: a.n_qubits(), b: b.n_qubits() });
    }
    Ok(a.inner(b).norm_sqr())
}

/// (1/2) ||rho - sigma||_1 via Hermitian eigendecomposition.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, EmbedError> {
    if rho.n_qubits() != sigma.n_qubits() {
        return Err(EmbedError::WidthMismatch { a: rho.n_qubits(), b: sigma.n_qubits() });
    }
    let dim = rho.dim();
    let diff = DMatrix::from_fn(dim, dim, |r, c| rho.entry(r, c) - sigma.entry(r, c));
    let ev = diff.symmetric_eigenvalues();
    Ok(0.5 * ev.iter().map(|v| v.abs()).sum::<f64>())
}

/// A class of embedded states, pure or mixed.
#[derive(Debug, Clone, Copy)]
pub enum Ensemble<'a> {
    Pure(&'a [PureState]),
    Mixed(&'a [DensityMatrix]),
}

impl<'a> Ensemble<'a> {
    fn is_empty(&self) -> bool {
        match self {
            Ensemble::Pure(s) => s.is_empty(),
            Ensemble::Mixed(s) => s.is_empty(),
        }
    }

    fn n_qubits(&self) -> usize {
        match self {
            Ensemble::Pure(s) => s[0].n_qubits(),
            Ensemble::Mixed(s) => s[0].n_qubits(),
        }
    }

    pub fn mean_dm(&self) -> DensityMatrix {
        match self {
            Ensemble::Pure(states) => {
                let mut acc = DensityMatrix::zeros(states[0].n_qubits());
                let w = 1.0 / states.len() as f64;
                for s in *states {
                    acc.scaled_add_pure(w, s);
                }
                acc
            }
            Ensemble::Mixed(dms) => {
                let mut acc = DensityMatrix::zeros(dms[0].n_qubits());
                let w = 1.0 / dms.len() as f64;
                for d in *dms {
                    acc.scaled_add(w, d);
                }
                acc
            }
        }
    }
}

/// Trace distance between the unweighted class-mean density matrices.
pub fn ensemble_trace_distance(pos: Ensemble, neg: Ensemble) -> Result<f64, EmbedError> {
    if pos.is_empty() || neg.is_empty() {
        return Err(EmbedError::EmptyClass);
    }
    let (a, b) = (pos.n_qubits(), neg.n_qubits());
    if a != b {
        return Err(EmbedError::WidthMismatch { a, b });
    }
    trace_distance(&pos.mean_dm(), &neg.mean_dm())
}
