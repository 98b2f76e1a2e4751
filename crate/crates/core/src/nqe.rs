//! Trainable embedding front-end: a dense rectified-linear network mapping
//! one-hot sequences to embedding features, trained so same-class pairs
//! embed with fidelity near 1 and cross-class pairs near 0. The identical
//! loop also trains the classical counterpart, where quantum fidelity is
//! replaced by the squared cosine similarity of the raw outputs.

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::{ensemble_trace_distance, EmbedError, Embedding, EmbeddingKind, Ensemble};
use crate::noise::BoundNoise;
use crate::qsim::{DensityMatrix, PureState};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("empty batch")]
    EmptyBatch,
    #[error("paired batches have different lengths: {a} vs {b}")]
    BatchLengthMismatch { a: usize, b: usize },
    #[error("non-finite loss at iteration {iteration}")]
    NonFiniteLoss { iteration: usize },
    #[error("degenerate features: norm {norm} below 1e-8 (amplitude gradient singularity)")]
    DegenerateFeatures { norm: f64 },
    #[error("layer expects input of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot: {0}")]
    Snapshot(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub in_dim: usize,
    pub out_dim: usize,
    pub bias: bool,
}

impl LayerSpec {
    pub const fn new(in_dim: usize, out_dim: usize, bias: bool) -> Self {
        LayerSpec { in_dim, out_dim, bias }
    }

    pub fn param_count(&self) -> usize {
        self.in_dim * self.out_dim + if self.bias { self.out_dim } else { 0 }
    }
}

/// Ordered affine layers with rectified-linear activations between them
/// (none after the last). Parameters are stored flat, layer-major, each
/// layer as a row-major weight block followed by its bias.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    specs: Vec<LayerSpec>,
    params: Vec<f64>,
}

pub fn param_count(specs: &[LayerSpec]) -> usize {
    specs.iter().map(LayerSpec::param_count).sum()
}

impl DenseNet {
    /// Seeded initialization: uniform in +-sqrt(1/fan_in) per layer, biases
    /// included.
    pub fn init(specs: Vec<LayerSpec>, seed: u64) -> Result<Self, TrainError> {
        for w in specs.windows(2) {
            if w[0].out_dim != w[1].in_dim {
                return Err(TrainError::Config(format!(
                    "layer dims do not chain: {} -> {}",
                    w[0].out_dim, w[1].in_dim
                )));
            }
        }
        if specs.is_empty() {
            return Err(TrainError::Config("network needs at least one layer".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Vec::with_capacity(param_count(&specs));
        for spec in &specs {
            let bound = (1.0 / spec.in_dim as f64).sqrt();
            for _ in 0..spec.param_count() {
                params.push(rng.random_range(-bound..bound));
            }
        }
        Ok(DenseNet { specs, params })
    }

    pub fn from_params(specs: Vec<LayerSpec>, params: Vec<f64>) -> Result<Self, TrainError> {
        if params.len() != param_count(&specs) {
            return Err(TrainError::Config(format!(
                "expected {} parameters, got {}",
                param_count(&specs),
                params.len()
            )));
        }
        Ok(DenseNet { specs, params })
    }

    pub fn specs(&self) -> &[LayerSpec] {
        &self.specs
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn in_dim(&self) -> usize {
        self.specs[0].in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.specs.last().unwrap().out_dim
    }

    fn layer_offset(&self, layer: usize) -> usize {
        self.specs[..layer].iter().map(LayerSpec::param_count).sum()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, TrainError> {
        Ok(self.forward_cached(x)?.0)
    }

    /// Forward pass returning pre-activations per layer for backprop.
    fn forward_cached(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>), TrainError> {
        if x.len() != self.in_dim() {
            return Err(TrainError::DimensionMismatch { expected: self.in_dim(), got: x.len() });
        }
        let mut pre: Vec<Vec<f64>> = Vec::with_capacity(self.specs.len());
        let mut act = x.to_vec();
        for (layer, spec) in self.specs.iter().enumerate() {
            let off = self.layer_offset(layer);
            let w = &self.params[off..off + spec.in_dim * spec.out_dim];
            let b = if spec.bias {
                Some(&self.params[off + spec.in_dim * spec.out_dim..off + spec.param_count()])
            } else {
                None
            };
            let mut z = vec![0.0; spec.out_dim];
            for o in 0..spec.out_dim {
                let row = &w[o * spec.in_dim..(o + 1) * spec.in_dim];
                let mut s = 0.0;
                for (wi, ai) in row.iter().zip(&act) {
                    s += wi * ai;
                }
                if let Some(b) = b {
                    s += b[o];
                }
                z[o] = s;
            }
            pre.push(z.clone());
            if layer + 1 < self.specs.len() {
                for v in z.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            act = z;
        }
        Ok((act, pre))
    }

    /// Accumulate d loss / d params into `grad` given d loss / d output.
    fn backward(&self, x: &[f64], pre: &[Vec<f64>], grad_out: &[f64], grad: &mut [f64]) {
        let n_layers = self.specs.len();
        let mut g = grad_out.to_vec();
        for layer in (0..n_layers).rev() {
            let spec = &self.specs[layer];
            let off = self.layer_offset(layer);
            // input activation of this layer
            let a_in: Vec<f64> = if layer == 0 {
                x.to_vec()
            } else {
                pre[layer - 1].iter().map(|&z| if z > 0.0 { z } else { 0.0 }).collect()
            };
            let wg = &mut grad[off..off + spec.in_dim * spec.out_dim];
            for o in 0..spec.out_dim {
                let go = g[o];
                if go != 0.0 {
                    let row = &mut wg[o * spec.in_dim..(o + 1) * spec.in_dim];
                    for (slot, ai) in row.iter_mut().zip(&a_in) {
                        *slot += go * ai;
                    }
                }
            }
            if spec.bias {
                let bg = &mut grad[off + spec.in_dim * spec.out_dim..off + spec.param_count()];
                for (slot, go) in bg.iter_mut().zip(&g) {
                    *slot += go;
                }
            }
            if layer > 0 {
                let w = &self.params[off..off + spec.in_dim * spec.out_dim];
                let mut g_in = vec![0.0; spec.in_dim];
                for o in 0..spec.out_dim {
                    let go = g[o];
                    if go != 0.0 {
                        let row = &w[o * spec.in_dim..(o + 1) * spec.in_dim];
                        for (gi, wi) in g_in.iter_mut().zip(row) {
                            *gi += go * wi;
                        }
                    }
                }
                for (gi, z) in g_in.iter_mut().zip(&pre[layer - 1]) {
                    if *z <= 0.0 {
                        *gi = 0.0;
                    }
                }
                g = g_in;
            }
        }
    }

    pub fn to_snapshot(&self) -> NetSnapshot {
        NetSnapshot { format_version: 1, layers: self.specs.clone(), weights: self.params.clone() }
    }

    pub fn from_snapshot(s: NetSnapshot) -> Result<Self, TrainError> {
        if s.format_version != 1 {
            return Err(TrainError::Config(format!("unsupported snapshot version {}", s.format_version)));
        }
        Self::from_params(s.layers, s.weights)
    }

    pub fn save(&self, path: &Path) -> Result<(), TrainError> {
        std::fs::write(path, serde_json::to_string(&self.to_snapshot())?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, TrainError> {
        Self::from_snapshot(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Self-describing trained-network file: layer list plus row-major weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetSnapshot {
    pub format_version: u32,
    pub layers: Vec<LayerSpec>,
    pub weights: Vec<f64>,
}

/// What "similar" means for a pair of front-end outputs.
#[derive(Clone, Copy)]
pub enum PairObjective<'a> {
    /// Quantum fidelity of the embedded states (pure or noisy path).
    Quantum { embedding: &'a Embedding, noise: Option<&'a BoundNoise> },
    /// Squared cosine similarity of the raw output vectors; coincides with
    /// amplitude-encoding fidelity.
    SquaredCosine,
}

impl<'a> PairObjective<'a> {
    fn arity(&self) -> Option<usize> {
        match self {
            PairObjective::Quantum { embedding, .. } => Some(embedding.arity()),
            PairObjective::SquaredCosine => None,
        }
    }

    fn needs_amplitude_guard(&self) -> bool {
        matches!(
            self,
            PairObjective::Quantum { embedding, .. } if embedding.kind() == EmbeddingKind::Amplitude
        ) || matches!(self, PairObjective::SquaredCosine)
    }

    fn similarity_with_grad(&self, ua: &[f64], ub: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>), EmbedError> {
        match self {
            PairObjective::Quantum { embedding, noise: None } => embedding.fidelity_with_grad(ua, ub),
            PairObjective::Quantum { embedding, noise: Some(bound) } => {
                embedding.noisy_fidelity_with_grad(ua, ub, bound)
            }
            PairObjective::SquaredCosine => crate::embed::squared_cosine_with_grad(ua, ub),
        }
    }
}

/// Eq-target for a label pair: 1 for same class, 0 for different.
pub fn pair_target(ya: i8, yb: i8) -> f64 {
    0.5 * (1.0 + f64::from(ya) * f64::from(yb))
}

/// If the guard applies and the feature norm collapses, nudge the first
/// coordinate so normalization stays defined. Returns true when triggered.
fn regularize_features(u: &mut [f64]) -> bool {
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < 1e-8 {
        u[0] += 1e-8;
        true
    } else {
        false
    }
}

/// Mean over paired rows of [similarity - pair_target]^2.
pub fn nqe_pair_loss(
    net: &DenseNet,
    objective: &PairObjective,
    batch_a: (&[Vec<f64>], &[i8]),
    batch_b: (&[Vec<f64>], &[i8]),
) -> Result<f64, TrainError> {
    let (loss, _) = pair_pass(net, objective, batch_a, batch_b, false, &mut 0)?;
    Ok(loss)
}

/// Exact reverse-mode gradient of the pair loss through the embedding and
/// the network. Rejects amplitude-degenerate outputs instead of patching
/// them.
pub fn nqe_gradient(
    net: &DenseNet,
    objective: &PairObjective,
    batch_a: (&[Vec<f64>], &[i8]),
    batch_b: (&[Vec<f64>], &[i8]),
) -> Result<(f64, Vec<f64>), TrainError> {
    if objective.needs_amplitude_guard() {
        for x in batch_a.0.iter().chain(batch_b.0) {
            let u = net.forward(x)?;
            let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-8 {
                return Err(TrainError::DegenerateFeatures { norm });
            }
        }
    }
    let mut events = 0;
    let (loss, grad) = pair_pass(net, objective, batch_a, batch_b, true, &mut events)?;
    Ok((loss, grad.expect("gradient requested")))
}

fn pair_pass(
    net: &DenseNet,
    objective: &PairObjective,
    batch_a: (&[Vec<f64>], &[i8]),
    batch_b: (&[Vec<f64>], &[i8]),
    want_grad: bool,
    degenerate_events: &mut usize,
) -> Result<(f64, Option<Vec<f64>>), TrainError> {
    let (xa, ya) = batch_a;
    let (xb, yb) = batch_b;
    if xa.is_empty() || xb.is_empty() {
        return Err(TrainError::EmptyBatch);
    }
    if xa.len() != xb.len() {
        return Err(TrainError::BatchLengthMismatch { a: xa.len(), b: xb.len() });
    }
    if let Some(arity) = objective.arity() {
        if net.out_dim() != arity {
            return Err(TrainError::Config(format!(
                "net output dimension {} does not match embedding arity {arity}",
                net.out_dim()
            )));
        }
    }
    let n = xa.len() as f64;
    let mut loss = 0.0;
    let mut grad = if want_grad { Some(vec![0.0; net.n_params()]) } else { None };
    for k in 0..xa.len() {
        let (mut ua, pre_a) = net.forward_cached(&xa[k])?;
        let (mut ub, pre_b) = net.forward_cached(&xb[k])?;
        if objective.needs_amplitude_guard() {
            if regularize_features(&mut ua) {
                *degenerate_events += 1;
            }
            if regularize_features(&mut ub) {
                *degenerate_events += 1;
            }
        }
        let target = pair_target(ya[k], yb[k]);
        if let Some(grad) = grad.as_mut() {
            let (f, gua, gub) = objective.similarity_with_grad(&ua, &ub)?;
            let diff = f - target;
            loss += diff * diff;
            let scale = 2.0 * diff / n;
            let ga: Vec<f64> = gua.iter().map(|g| scale * g).collect();
            let gb: Vec<f64> = gub.iter().map(|g| scale * g).collect();
            net.backward(&xa[k], &pre_a, &ga, grad);
            net.backward(&xb[k], &pre_b, &gb, grad);
        } else {
            let f = match objective {
                PairObjective::Quantum { embedding, noise: None } => {
                    crate::embed::fidelity(&embedding.encode(&ua)?, &embedding.encode(&ub)?)?
                }
                PairObjective::Quantum { embedding, noise: Some(bound) } => {
                    embedding.noisy_embed(&ua, bound)?.overlap(&embedding.noisy_embed(&ub, bound)?)
                }
                PairObjective::SquaredCosine => crate::embed::squared_cosine_with_grad(&ua, &ub)?.0,
            };
            let diff = f - target;
            loss += diff * diff;
        }
    }
    Ok((loss / n, grad))
}

/// Adam with bias correction.
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(n_params: usize, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Adam { lr, beta1, beta2, eps, m: vec![0.0; n_params], v: vec![0.0; n_params], t: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        self.t += 1;
        let b1c = 1.0 - self.beta1.powi(self.t as i32);
        let b2c = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grads[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grads[i] * grads[i];
            let mhat = self.m[i] / b1c;
            let vhat = self.v[i] / b2c;
            params[i] -= self.lr * mhat / (vhat.sqrt() + self.eps);
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NqeTrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub max_iterations: usize,
    /// Validation loss is computed every this many iterations.
    pub validation_period: usize,
    /// Consecutive non-improving validation checks before stopping.
    pub patience: usize,
    pub seed: u64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    /// Cap per class when estimating trace distances (None = full set);
    /// the noisy arm subsamples to keep density-matrix averaging tractable.
    pub td_max_per_class: Option<usize>,
}

impl NqeTrainConfig {
    pub fn new(batch_size: usize, learning_rate: f64, max_iterations: usize, seed: u64) -> Self {
        NqeTrainConfig {
            batch_size,
            learning_rate,
            max_iterations,
            validation_period: 10,
            patience: 4,
            seed,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            td_max_per_class: None,
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        if self.batch_size == 0
            || self.learning_rate <= 0.0
            || self.max_iterations == 0
            || self.validation_period == 0
            || self.patience == 0
        {
            return Err(TrainError::Config("all training hyperparameters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabeledSet {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<i8>,
}

impl LabeledSet {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct NqeData {
    pub train: LabeledSet,
    pub validation: LabeledSet,
    pub test: LabeledSet,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TraceDistanceReport {
    pub train_before: f64,
    pub test_before: f64,
    pub train_after: f64,
    pub test_after: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HistoryRow {
    pub iteration: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
}

pub struct NqeOutcome {
    pub net: DenseNet,
    pub history: Vec<HistoryRow>,
    pub trace_distances: Option<TraceDistanceReport>,
    pub iterations_run: usize,
    pub early_stopped: bool,
    pub best_val_loss: f64,
    pub degenerate_events: usize,
}

pub fn write_history_csv(history: &[HistoryRow], path: &Path) -> Result<(), TrainError> {
    let mut out = String::from("iteration,train_loss,val_loss\n");
    for row in history {
        match row.val_loss {
            Some(v) => out.push_str(&format!("{},{},{}\n", row.iteration, row.train_loss, v)),
            None => out.push_str(&format!("{},{},\n", row.iteration, row.train_loss)),
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn sample_batch(rng: &mut ChaCha8Rng, n: usize, batch: usize) -> Vec<usize> {
    let take = batch.min(n);
    rand::seq::index::sample(rng, n, take).into_vec()
}

fn gather<'s>(set: &'s LabeledSet, idx: &[usize]) -> (Vec<Vec<f64>>, Vec<i8>) {
    (
        idx.iter().map(|&i| set.rows[i].clone()).collect(),
        idx.iter().map(|&i| set.labels[i]).collect(),
    )
}

/// Per iteration, draw two independent shuffled mini-batches paired
/// row-wise and take an Adam step on the pair loss; every
/// `validation_period` iterations compute the validation loss on a fixed
/// pairing and stop early after `patience` consecutive non-improving
/// checks. Returns the best-validation snapshot.
pub fn train_nqe(
    specs: &[LayerSpec],
    objective: &PairObjective,
    data: &NqeData,
    config: &NqeTrainConfig,
) -> Result<NqeOutcome, TrainError> {
    config.validate()?;
    if data.train.is_empty() || data.validation.is_empty() {
        return Err(TrainError::EmptyBatch);
    }
    let mut net = DenseNet::init(specs.to_vec(), config.seed)?;
    let initial = net.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));

    // fixed validation pairing
    let val_n = data.validation.len();
    let mut val_perm: Vec<usize> = (0..val_n).collect();
    {
        use rand::seq::SliceRandom;
        val_perm.shuffle(&mut rng);
    }
    let (val_a_rows, val_a_labels) = gather(&data.validation, &(0..val_n).collect::<Vec<_>>());
    let (val_b_rows, val_b_labels) = gather(&data.validation, &val_perm);

    let mut adam = Adam::new(
        net.n_params(),
        config.learning_rate,
        config.adam_beta1,
        config.adam_beta2,
        config.adam_eps,
    );
    let mut history = Vec::new();
    let mut degenerate_events = 0usize;
    let mut best_val = f64::INFINITY;
    let mut best_net = net.clone();
    let mut streak = 0usize;
    let mut early_stopped = false;
    let mut iterations_run = 0usize;

    for iter in 1..=config.max_iterations {
        iterations_run = iter;
        let ia = sample_batch(&mut rng, data.train.len(), config.batch_size);
        let ib = sample_batch(&mut rng, data.train.len(), config.batch_size);
        let (xa, ya) = gather(&data.train, &ia);
        let (xb, yb) = gather(&data.train, &ib);
        let (loss, grad) =
            pair_pass(&net, objective, (&xa, &ya), (&xb, &yb), true, &mut degenerate_events)?;
        if !loss.is_finite() {
            return Err(TrainError::NonFiniteLoss { iteration: iter });
        }
        adam.step(net.params_mut(), &grad.expect("gradient requested"));

        let mut val_loss = None;
        if iter % config.validation_period == 0 {
            let v = pair_pass(
                &net,
                objective,
                (&val_a_rows, &val_a_labels),
                (&val_b_rows, &val_b_labels),
                false,
                &mut degenerate_events,
            )?
            .0;
            if !v.is_finite() {
                return Err(TrainError::NonFiniteLoss { iteration: iter });
            }
            val_loss = Some(v);
            if v < best_val - 1e-12 {
                best_val = v;
                best_net = net.clone();
                streak = 0;
            } else {
                streak += 1;
                if streak >= config.patience {
                    history.push(HistoryRow { iteration: iter, train_loss: loss, val_loss });
                    early_stopped = true;
                    break;
                }
            }
        }
        history.push(HistoryRow { iteration: iter, train_loss: loss, val_loss });
    }

    if best_val.is_infinite() {
        // no validation check ever ran (max_iterations < validation_period)
        best_net = net.clone();
    }

    let trace_distances = match objective {
        PairObjective::Quantum { embedding, noise } => Some(td_report(
            &initial,
            &best_net,
            embedding,
            *noise,
            data,
            config.td_max_per_class,
            config.seed,
        )?),
        PairObjective::SquaredCosine => None,
    };

    Ok(NqeOutcome {
        net: best_net,
        history,
        trace_distances,
        iterations_run,
        early_stopped,
        best_val_loss: best_val,
        degenerate_events,
    })
}

/// Front-end outputs for a feature matrix, with the amplitude degeneracy
/// guard applied so downstream encoders see exactly what training saw.
pub fn net_features(
    net: &DenseNet,
    kind: EmbeddingKind,
    rows: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>, TrainError> {
    let guard = kind == EmbeddingKind::Amplitude;
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let mut u = net.forward(row)?;
        if guard {
            regularize_features(&mut u);
        }
        out.push(u);
    }
    Ok(out)
}

/// Trace distance between class-mean embedded states for a labeled feature
/// set, optionally subsampled per class (deterministic given `seed`).
pub fn embedded_trace_distance(
    net: &DenseNet,
    embedding: &Embedding,
    noise: Option<&BoundNoise>,
    set: &LabeledSet,
    max_per_class: Option<usize>,
    seed: u64,
) -> Result<f64, TrainError> {
    let mut pos_idx: Vec<usize> = (0..set.len()).filter(|&i| set.labels[i] > 0).collect();
    let mut neg_idx: Vec<usize> = (0..set.len()).filter(|&i| set.labels[i] < 0).collect();
    if let Some(cap) = max_per_class {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7d2f_13ab);
        use rand::seq::SliceRandom;
        pos_idx.shuffle(&mut rng);
        neg_idx.shuffle(&mut rng);
        pos_idx.truncate(cap);
        neg_idx.truncate(cap);
        pos_idx.sort_unstable();
        neg_idx.sort_unstable();
    }
    let feats = net_features(net, embedding.kind(), &set.rows)?;
    match noise {
        None => {
            let embed_all = |idx: &[usize]| -> Result<Vec<PureState>, TrainError> {
                idx.iter().map(|&i| Ok(embedding.encode(&feats[i])?)).collect()
            };
            let pos = embed_all(&pos_idx)?;
            let neg = embed_all(&neg_idx)?;
            Ok(ensemble_trace_distance(Ensemble::Pure(&pos), Ensemble::Pure(&neg))?)
        }
        Some(bound) => {
            let embed_all = |idx: &[usize]| -> Result<Vec<DensityMatrix>, TrainError> {
                idx.iter().map(|&i| Ok(embedding.noisy_embed(&feats[i], bound)?)).collect()
            };
            let pos = embed_all(&pos_idx)?;
            let neg = embed_all(&neg_idx)?;
            Ok(ensemble_trace_distance(Ensemble::Mixed(&pos), Ensemble::Mixed(&neg))?)
        }
    }
}

fn td_report(
    initial: &DenseNet,
    trained: &DenseNet,
    embedding: &Embedding,
    noise: Option<&BoundNoise>,
    data: &NqeData,
    max_per_class: Option<usize>,
    seed: u64,
) -> Result<TraceDistanceReport, TrainError> {
    Ok(TraceDistanceReport {
        train_before: embedded_trace_distance(initial, embedding, noise, &data.train, max_per_class, seed)?,
        test_before: embedded_trace_distance(initial, embedding, noise, &data.test, max_per_class, seed)?,
        train_after: embedded_trace_distance(trained, embedding, noise, &data.train, max_per_class, seed)?,
        test_after: embedded_trace_distance(trained, embedding, noise, &data.test, max_per_class, seed)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn specs(dims: &[(usize, usize, bool)]) -> Vec<LayerSpec> {
        dims.iter().map(|&(i, o, b)| LayerSpec::new(i, o, b)).collect()
    }

    #[test]
    fn param_counts() {
        assert_eq!(param_count(&specs(&[(160, 8, false), (8, 8, false)])), 160 * 8 + 64);
        assert_eq!(param_count(&specs(&[(160, 8, true), (8, 8, true)])), 160 * 8 + 8 + 64 + 8);
        assert_eq!(param_count(&[]), 0);
    }

    #[test]
    fn zero_weights_zero_output() {
        let net = DenseNet::from_params(specs(&[(4, 3, false)]), vec![0.0; 12]).unwrap();
        assert_eq!(net.forward(&[1.0, 2.0, 3.0, 4.0]).unwrap(), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn identity_layer_reproduces_input() {
        let mut w = vec![0.0; 9];
        for i in 0..3 {
            w[i * 3 + i] = 1.0;
        }
        let net = DenseNet::from_params(specs(&[(3, 3, false)]), w).unwrap();
        assert_eq!(net.forward(&[0.5, -0.25, 2.0]).unwrap(), vec![0.5, -0.25, 2.0]);
    }

    #[test]
    fn forward_matches_matmul_oracle() {
        let net = DenseNet::init(specs(&[(5, 4, true), (4, 2, true)]), 99).unwrap();
        let x = [0.2, -0.7, 1.1, 0.05, -0.3];
        // hand-rolled dense forward
        let p = net.params();
        let w0 = &p[0..20];
        let b0 = &p[20..24];
        let w1 = &p[24..32];
        let b1 = &p[32..34];
        let mut h = [0.0; 4];
        for o in 0..4 {
            h[o] = b0[o] + (0..5).map(|i| w0[o * 5 + i] * x[i]).sum::<f64>();
            h[o] = h[o].max(0.0);
        }
        let mut out = [0.0; 2];
        for o in 0..2 {
            out[o] = b1[o] + (0..4).map(|i| w1[o * 4 + i] * h[i]).sum::<f64>();
        }
        let got = net.forward(&x).unwrap();
        for (a, b) in got.iter().zip(&out) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let net = DenseNet::init(specs(&[(4, 2, false)]), 1).unwrap();
        assert!(matches!(
            net.forward(&[1.0, 2.0]),
            Err(TrainError::DimensionMismatch { expected: 4, got: 2 })
        ));
    }

    #[test]
    fn pair_loss_trivial_values() {
        // identity-ish 2-d front end, angle embedding on 2 qubits
        let net = DenseNet::from_params(
            specs(&[(2, 2, false)]),
            vec![1.0, 0.0, 0.0, 1.0],
        )
        .unwrap();
        let embedding = Embedding::new(EmbeddingKind::Angle, 2);
        let objective = PairObjective::Quantum { embedding: &embedding, noise: None };
        // same input, same label: fidelity 1, target 1, term 0
        let rows = vec![vec![0.4, 0.9]];
        let loss =
            nqe_pair_loss(&net, &objective, (&rows, &[1]), (&rows.clone(), &[1])).unwrap();
        assert!(loss < 1e-15);
        // orthogonal states, different labels: term 0
        let a = vec![vec![0.0, 0.0]];
        let b = vec![vec![std::f64::consts::PI, std::f64::consts::PI]];
        let loss = nqe_pair_loss(&net, &objective, (&a, &[1]), (&b, &[-1])).unwrap();
        assert!(loss < 1e-15);
        // same-label pair with fidelity 0.5 -> 0.25
        let c = vec![vec![std::f64::consts::FRAC_PI_2, 0.0]];
        let d = vec![vec![0.0, 0.0]];
        let loss = nqe_pair_loss(&net, &objective, (&c, &[1]), (&d, &[1])).unwrap();
        assert!((loss - 0.25).abs() < 1e-12);
        // empty batch rejected
        assert!(matches!(
            nqe_pair_loss(&net, &objective, (&[], &[]), (&[], &[])),
            Err(TrainError::EmptyBatch)
        ));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for kind in [EmbeddingKind::Angle, EmbeddingKind::Amplitude, EmbeddingKind::ZzLinear] {
            let n_qubits = 2;
            let embedding = Embedding::new(kind, n_qubits);
            let net = DenseNet::init(specs(&[(6, 5, true), (5, embedding.arity(), false)]), 3).unwrap();
            let objective = PairObjective::Quantum { embedding: &embedding, noise: None };
            let xa: Vec<Vec<f64>> = vec![
                vec![1.0, 0.0, 1.0, 0.5, 0.0, 0.25],
                vec![0.0, 1.0, 0.0, 0.0, 1.0, 0.5],
            ];
            let xb: Vec<Vec<f64>> = vec![
                vec![0.5, 0.5, 0.0, 1.0, 0.0, 0.0],
                vec![1.0, 1.0, 0.0, 0.0, 0.5, 1.0],
            ];
            let ya = [1i8, -1];
            let yb = [1i8, 1];
            let (loss, grad) = nqe_gradient(&net, &objective, (&xa, &ya), (&xb, &yb)).unwrap();
            assert!(loss.is_finite());
            let h = 1e-6;
            for k in (0..net.n_params()).step_by(7) {
                let mut plus = net.clone();
                plus.params_mut()[k] += h;
                let up = nqe_pair_loss(&plus, &objective, (&xa, &ya), (&xb, &yb)).unwrap();
                let mut minus = net.clone();
                minus.params_mut()[k] -= h;
                let dn = nqe_pair_loss(&minus, &objective, (&xa, &ya), (&xb, &yb)).unwrap();
                let fd = (up - dn) / (2.0 * h);
                assert!(
                    (grad[k] - fd).abs() < 2e-5 * fd.abs().max(1.0),
                    "{kind:?} param {k}: {} vs {}",
                    grad[k],
                    fd
                );
            }
        }
    }

    #[test]
    fn single_qubit_angle_gradient_matches_symbolic_form() {
        // one linear layer w (1x1, no bias), angle encoding on one qubit:
        // fidelity(x, x') = cos^2((w x - w x') / 2); same-label target 1.
        let w = 0.8;
        let net = DenseNet::from_params(specs(&[(1, 1, false)]), vec![w]).unwrap();
        let embedding = Embedding::new(EmbeddingKind::Angle, 1);
        let objective = PairObjective::Quantum { embedding: &embedding, noise: None };
        let (x, xp) = (1.3, 0.4);
        let (loss, grad) =
            nqe_gradient(&net, &objective, (&[vec![x]], &[1]), (&[vec![xp]], &[1])).unwrap();
        let d = w * (x - xp);
        let f = (d / 2.0).cos().powi(2);
        assert!((loss - (f - 1.0) * (f - 1.0)).abs() < 1e-12);
        // dL/dw = 2 (f - 1) * f'(w), f'(w) = -cos(d/2) sin(d/2) (x - x')
        let expect = 2.0 * (f - 1.0) * (-(d / 2.0).cos() * (d / 2.0).sin() * (x - xp));
        assert!((grad[0] - expect).abs() < 1e-10, "{} vs {expect}", grad[0]);
    }

    #[test]
    fn zero_signal_means_zero_gradient() {
        let net = DenseNet::from_params(specs(&[(2, 2, false)]), vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let embedding = Embedding::new(EmbeddingKind::Angle, 2);
        let objective = PairObjective::Quantum { embedding: &embedding, noise: None };
        let rows = vec![vec![0.7, 0.2]];
        let (_, grad) = nqe_gradient(&net, &objective, (&rows, &[1]), (&rows.clone(), &[1])).unwrap();
        assert!(grad.iter().all(|g| g.abs() < 1e-8));
    }

    #[test]
    fn degenerate_amplitude_rejected_by_strict_gradient() {
        let net = DenseNet::from_params(specs(&[(2, 2, false)]), vec![0.0; 4]).unwrap();
        let embedding = Embedding::new(EmbeddingKind::Amplitude, 1);
        let objective = PairObjective::Quantum { embedding: &embedding, noise: None };
        let rows = vec![vec![1.0, 1.0]];
        let r = nqe_gradient(&net, &objective, (&rows, &[1]), (&rows.clone(), &[1]));
        assert!(matches!(r, Err(TrainError::DegenerateFeatures { .. })));
    }

    #[test]
    fn loss_is_symmetric_under_batch_swap() {
        let net = DenseNet::init(specs(&[(4, 2, true)]), 5).unwrap();
        let embedding = Embedding::new(EmbeddingKind::Angle, 2);
        let objective = PairObjective::Quantum { embedding: &embedding, noise: None };
        let xa = vec![vec![1.0, 0.0, 0.5, 0.2], vec![0.1, 0.9, 0.0, 0.7]];
        let xb = vec![vec![0.3, 0.3, 0.3, 0.3], vec![0.9, 0.0, 0.2, 0.1]];
        let (ya, yb) = ([1i8, -1], [-1i8, -1]);
        let l1 = nqe_pair_loss(&net, &objective, (&xa, &ya), (&xb, &yb)).unwrap();
        let l2 = nqe_pair_loss(&net, &objective, (&xb, &yb), (&xa, &ya)).unwrap();
        assert!((l1 - l2).abs() < 1e-15);
    }

    fn toy_data() -> NqeData {
        // two orthogonal one-hot clusters
        let a = crate::data::one_hot("AAAAAAAA").unwrap();
        let b = crate::data::one_hot("CCCCCCCC").unwrap();
        let set = |rows: Vec<Vec<f64>>, labels: Vec<i8>| LabeledSet { rows, labels };
        NqeData {
            train: set(vec![a.clone(), b.clone(), a.clone(), b.clone()], vec![1, -1, 1, -1]),
            validation: set(vec![a.clone(), b.clone()], vec![1, -1]),
            test: set(vec![a, b], vec![1, -1]),
        }
    }

    #[test]
    fn separable_toy_data_reaches_high_trace_distance() {
        let data = toy_data();
        let embedding = Embedding::new(EmbeddingKind::Angle, 2);
        let objective = PairObjective::Quantum { embedding: &embedding, noise: None };
        let mut config = NqeTrainConfig::new(4, 0.05, 400, 12);
        config.patience = 40;
        let out = train_nqe(
            &specs(&[(160, 8, true), (8, 2, true)]),
            &objective,
            &data,
            &config,
        )
        .unwrap();
        let td = out.trace_distances.unwrap();
        assert!(td.train_after > 0.95, "trace distance after training: {}", td.train_after);
        assert!(td.train_after >= td.train_before);
    }

    #[test]
    fn patience_one_stops_at_second_check_on_constant_loss() {
        // zero loss from the start: validation loss is constant at its first
        // value, so with patience 1 training stops at the second check.
        let data = toy_data();
        let embedding = Embedding::new(EmbeddingKind::Angle, 2);
        let objective = PairObjective::Quantum { embedding: &embedding, noise: None };
        let mut config = NqeTrainConfig::new(2, 1e-12, 500, 3);
        config.patience = 1;
        let out = train_nqe(&specs(&[(160, 2, false)]), &objective, &data, &config).unwrap();
        assert!(out.early_stopped);
        assert_eq!(out.iterations_run, 20);
    }

    #[test]
    fn snapshot_roundtrip_is_exact() {
        let net = DenseNet::init(specs(&[(6, 3, true), (3, 2, false)]), 123).unwrap();
        let dir = std::env::temp_dir().join(format!("qcleave-nqe-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("net.json");
        net.save(&path).unwrap();
        let loaded = DenseNet::load(&path).unwrap();
        assert_eq!(net, loaded);
        std::fs::remove_dir_all(&dir).ok();
    }
}
