//! Dataset ingestion and preprocessing: parsing the octamer files, merging
//! with duplicate removal, class balancing by undersampling, one-hot
//! encoding, PCA reduction, rescaling, and stratified splits.

use std::collections::HashMap;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// The 20 standard amino acids in alphabetical order; 'A' has index 0.
pub const AMINO_ACIDS: [u8; 20] = *b"ACDEFGHIKLMNPQRSTVWY";

pub const OCTAMER_LEN: usize = 8;
pub const ONE_HOT_LEN: usize = OCTAMER_LEN * 20;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}:{line}: malformed line (expected OCTAMER,LABEL)")]
    Malformed { path: String, line: usize },
    #[error("{path}:{line}: octamer has length {len}, expected 8")]
    BadLength { path: String, line: usize, len: usize },
    #[error("{path}:{line}: invalid amino-acid letter {letter:?}")]
    BadLetter { path: String, line: usize, letter: char },
    #[error("{path}:{line}: label {label:?} is not -1 or 1")]
    BadLabel { path: String, line: usize, label: String },
    #[error("invalid amino-acid letter {0:?}")]
    InvalidLetter(char),
    #[error("minority class is empty")]
    EmptyMinority,
    #[error("class too small to stratify: {0} records")]
    ClassTooSmall(usize),
    #[error("PCA components k={k} exceed feature dimension {dim}")]
    PcaTooManyComponents { k: usize, dim: usize },
    #[error("PCA fit requires at least 2 rows, got {0}")]
    PcaTooFewRows(usize),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot: {0}")]
    Snapshot(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DataSource {
    D746,
    D1625,
    Schilling,
    Impens,
}

impl DataSource {
    pub const ALL: [DataSource; 4] = [
        DataSource::D746,
        DataSource::D1625,
        DataSource::Schilling,
        DataSource::Impens,
    ];

    pub fn file_name(&self) -> &'static str {
        match self {
            DataSource::D746 => "746Data.txt",
            DataSource::D1625 => "1625Data.txt",
            DataSource::Schilling => "schillingData.txt",
            DataSource::Impens => "impensData.txt",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub octamer: String,
    pub label: i8,
    pub source: DataSource,
}

pub fn alpha_index(letter: char) -> Result<usize, DataError> {
    AMINO_ACIDS
        .iter()
        .position(|&a| a as char == letter)
        .ok_or(DataError::InvalidLetter(letter))
}

/// Parse one source file: each nonempty line is "OCTAMER,LABEL" with label
/// -1 or 1. Failures report the line number.
pub fn parse_dataset_file(path: &Path, source: DataSource) -> Result<Vec<SequenceRecord>, DataError> {
    let text = std::fs::read_to_string(path)?;
    parse_dataset_str(&text, &path.display().to_string(), source)
}

pub fn parse_dataset_str(
    text: &str,
    path: &str,
    source: DataSource,
) -> Result<Vec<SequenceRecord>, DataError> {
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let s = raw.trim();
        if s.is_empty() {
            continue;
        }
        let Some((octamer, label)) = s.split_once(',') else {
            return Err(DataError::Malformed { path: path.to_string(), line });
        };
        let octamer = octamer.trim();
        if octamer.len() != OCTAMER_LEN {
            return Err(DataError::BadLength { path: path.to_string(), line, len: octamer.len() });
        }
        for ch in octamer.chars() {
            if !AMINO_ACIDS.contains(&(ch as u8)) {
                return Err(DataError::BadLetter { path: path.to_string(), line, letter: ch });
            }
        }
        let label = match label.trim() {
            "-1" => -1,
            "1" => 1,
            other => {
                return Err(DataError::BadLabel { path: path.to_string(), line, label: other.to_string() })
            }
        };
        records.push(SequenceRecord { octamer: octamer.to_string(), label, source });
    }
    Ok(records)
}

/// A duplicate octamer carrying conflicting labels across sources; the first
/// occurrence's label wins and the conflict is reported for audit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelConflict {
    pub octamer: String,
    pub kept_label: i8,
    pub dropped_label: i8,
}

/// Concatenate in source order, then stable-dedup on exact octamer match;
/// first occurrence wins.
pub fn merge_and_dedup(lists: &[Vec<SequenceRecord>]) -> (Vec<SequenceRecord>, Vec<LabelConflict>) {
    let mut seen: HashMap<&str, i8> = HashMap::new();
    let mut merged = Vec::new();
    let mut conflicts = Vec::new();
    for list in lists {
        for rec in list {
            match seen.get(rec.octamer.as_str()) {
                None => {
                    seen.insert(rec.octamer.as_str(), rec.label);
                    merged.push(rec.clone());
                }
                Some(&kept) => {
                    if kept != rec.label {
                        conflicts.push(LabelConflict {
                            octamer: rec.octamer.clone(),
                            kept_label: kept,
                            dropped_label: rec.label,
                        });
                    }
                }
            }
        }
    }
    (merged, conflicts)
}

/// Keep all minority-class records; uniformly undersample the majority class
/// (without replacement) to match. Output preserves input order.
pub fn balance_undersample(records: &[SequenceRecord], seed: u64) -> Result<Vec<SequenceRecord>, DataError> {
    let pos: Vec<usize> = (0..records.len()).filter(|&i| records[i].label > 0).collect();
    let neg: Vec<usize> = (0..records.len()).filter(|&i| records[i].label < 0).collect();
    let (minority, majority) = if pos.len() <= neg.len() { (pos, neg) } else { (neg, pos) };
    if minority.is_empty() {
        return Err(DataError::EmptyMinority);
    }
    if majority.len() == minority.len() {
        return Ok(records.to_vec());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shuffled = majority.clone();
    shuffled.shuffle(&mut rng);
    let mut keep: Vec<bool> = vec![false; records.len()];
    for &i in &minority {
        keep[i] = true;
    }
    for &i in shuffled.iter().take(minority.len()) {
        keep[i] = true;
    }
    Ok((0..records.len()).filter(|&i| keep[i]).map(|i| records[i].clone()).collect())
}

/// Position p contributes a 1 at index 20 p + alpha_index(letter).
pub fn one_hot(octamer: &str) -> Result<Vec<f64>, DataError> {
    let mut row = vec![0.0; ONE_HOT_LEN];
    for (p, ch) in octamer.chars().enumerate() {
        row[20 * p + alpha_index(ch)?] = 1.0;
    }
    Ok(row)
}

/// Inverse of `one_hot`; positions with no set bit are rejected.
pub fn decode_one_hot(row: &[f64]) -> Option<String> {
    if row.len() != ONE_HOT_LEN {
        return None;
    }
    let mut out = String::with_capacity(OCTAMER_LEN);
    for p in 0..OCTAMER_LEN {
        let block = &row[20 * p..20 * (p + 1)];
        let idx = block.iter().position(|&v| v == 1.0)?;
        out.push(AMINO_ACIDS[idx] as char);
    }
    Some(out)
}

/// PCA fitted on training rows only: top-k eigenvectors of the training
/// covariance, eigenvalue-descending, sign fixed so each component's
/// largest-magnitude entry is positive.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PCAModel {
    pub mean: Vec<f64>,
    /// k rows of length `dim`.
    pub components: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    /// Number of retained components with (near-)zero variance.
    pub zero_variance_components: usize,
}

pub fn pca_fit(rows: &[Vec<f64>], k: usize) -> Result<PCAModel, DataError> {
    if rows.len() < 2 {
        return Err(DataError::PcaTooFewRows(rows.len()));
    }
    let dim = rows[0].len();
    if k > dim {
        return Err(DataError::PcaTooManyComponents { k, dim });
    }
    let m = rows.len();
    let mut mean = vec![0.0; dim];
    for row in rows {
        for (a, b) in mean.iter_mut().zip(row) {
            *a += b;
        }
    }
    for a in mean.iter_mut() {
        *a /= m as f64;
    }
    let mut cov = DMatrix::<f64>::zeros(dim, dim);
    for row in rows {
        let c: Vec<f64> = row.iter().zip(&mean).map(|(a, b)| a - b).collect();
        for i in 0..dim {
            if c[i] == 0.0 {
                continue;
            }
            for j in i..dim {
                cov[(i, j)] += c[i] * c[j];
            }
        }
    }
    let denom = (m - 1) as f64;
    for i in 0..dim {
        for j in i..dim {
            let v = cov[(i, j)] / denom;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    let eig = cov.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let mut components = Vec::with_capacity(k);
    let mut eigenvalues = Vec::with_capacity(k);
    let mut zero_variance = 0usize;
    for &col in order.iter().take(k) {
        let mut v: Vec<f64> = eig.eigenvectors.column(col).iter().copied().collect();
        let (mut max_abs, mut max_val) = (0.0f64, 0.0f64);
        for &x in &v {
            if x.abs() > max_abs {
                max_abs = x.abs();
                max_val = x;
            }
        }
        if max_val < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
        let ev = eig.eigenvalues[col].max(0.0);
        if ev < 1e-12 {
            zero_variance += 1;
        }
        eigenvalues.push(ev);
        components.push(v);
    }
    Ok(PCAModel { mean, components, eigenvalues, zero_variance_components: zero_variance })
}

pub fn pca_transform(model: &PCAModel, row: &[f64]) -> Vec<f64> {
    let centered: Vec<f64> = row.iter().zip(&model.mean).map(|(a, b)| a - b).collect();
    model
        .components
        .iter()
        .map(|comp| comp.iter().zip(&centered).map(|(c, x)| c * x).sum())
        .collect()
}

/// Per-dimension min/max taken from the training split.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RescaleModel {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

pub fn rescale_fit(rows: &[Vec<f64>]) -> RescaleModel {
    let dim = rows[0].len();
    let mut min = vec![f64::INFINITY; dim];
    let mut max = vec![f64::NEG_INFINITY; dim];
    for row in rows {
        for (i, &v) in row.iter().enumerate() {
            min[i] = min[i].min(v);
            max[i] = max[i].max(v);
        }
    }
    RescaleModel { min, max }
}

/// Angle/ZZ embeddings take per-dimension min-max mapping onto [0, pi] with
/// out-of-range (test) values clamped; a degenerate dimension maps to pi/2.
/// Amplitude encoding passes features through unchanged.
pub fn rescale_for_embedding(
    features: &[f64],
    kind: crate::embed::EmbeddingKind,
    model: &RescaleModel,
) -> Vec<f64> {
    use crate::embed::EmbeddingKind;
    match kind {
        EmbeddingKind::Amplitude => features.to_vec(),
        EmbeddingKind::Angle | EmbeddingKind::ZzLinear => features
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let span = model.max[i] - model.min[i];
                if span <= 1e-12 {
                    std::f64::consts::FRAC_PI_2
                } else {
                    ((v - model.min[i]) / span).clamp(0.0, 1.0) * std::f64::consts::PI
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<SequenceRecord>,
    pub validation: Vec<SequenceRecord>,
    pub test: Vec<SequenceRecord>,
}

/// Stratified split: per class, `1 - train_ratio` of records go to test and
/// `val_fraction` of the remaining training records to validation.
/// Deterministic per seed; members keep their input order.
pub fn split(
    records: &[SequenceRecord],
    train_ratio: f64,
    val_fraction: f64,
    seed: u64,
) -> Result<Split, DataError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assign = vec![0u8; records.len()]; // 0 train, 1 val, 2 test
    for class in [-1i8, 1] {
        let idx: Vec<usize> = (0..records.len()).filter(|&i| records[i].label == class).collect();
        if idx.len() < 3 {
            return Err(DataError::ClassTooSmall(idx.len()));
        }
        let mut shuffled = idx.clone();
        shuffled.shuffle(&mut rng);
        let n_train_full = (idx.len() as f64 * train_ratio).floor() as usize;
        let n_val = (n_train_full as f64 * val_fraction).floor() as usize;
        for (pos, &i) in shuffled.iter().enumerate() {
            assign[i] = if pos < n_train_full - n_val {
                0
            } else if pos < n_train_full {
                1
            } else {
                2
            };
        }
    }
    let pick = |tag: u8| -> Vec<SequenceRecord> {
        (0..records.len()).filter(|&i| assign[i] == tag).map(|i| records[i].clone()).collect()
    };
    Ok(Split { train: pick(0), validation: pick(1), test: pick(2) })
}

/// Per-stage record counts, pinned into the snapshot for auditability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub parsed_per_source: Vec<usize>,
    pub merged: usize,
    pub deduped: usize,
    pub negatives: usize,
    pub positives: usize,
    pub balanced: usize,
}

/// Canonical dataset snapshot: every downstream run pins its exact data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSnapshot {
    pub format_version: u32,
    pub seed: u64,
    pub alphabet: String,
    pub counts: StageCounts,
    pub label_conflicts: Vec<LabelConflict>,
    pub records: Vec<SequenceRecord>,
}

impl DatasetSnapshot {
    pub fn save(&self, path: &Path) -> Result<(), DataError> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, DataError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Content hash used as a cache key component.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(self).expect("serializable"));
        let out = h.finalize();
        out.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Full preprocessing pipeline over the four source files in a directory.
pub fn preprocess_dir(dir: &Path, seed: u64) -> Result<DatasetSnapshot, DataError> {
    let mut lists = Vec::new();
    for source in DataSource::ALL {
        lists.push(parse_dataset_file(&dir.join(source.file_name()), source)?);
    }
    preprocess(lists, seed)
}

pub fn preprocess(lists: Vec<Vec<SequenceRecord>>, seed: u64) -> Result<DatasetSnapshot, DataError> {
    let parsed_per_source: Vec<usize> = lists.iter().map(Vec::len).collect();
    let merged_count: usize = parsed_per_source.iter().sum();
    let (deduped, conflicts) = merge_and_dedup(&lists);
    let negatives = deduped.iter().filter(|r| r.label < 0).count();
    let positives = deduped.len() - negatives;
    let balanced = balance_undersample(&deduped, seed)?;
    Ok(DatasetSnapshot {
        format_version: 1,
        seed,
        alphabet: String::from_utf8(AMINO_ACIDS.to_vec()).unwrap(),
        counts: StageCounts {
            parsed_per_source,
            merged: merged_count,
            deduped: deduped.len(),
            negatives,
            positives,
            balanced: balanced.len(),
        },
        label_conflicts: conflicts,
        records: balanced,
    })
}

/// CSV export of the one-hot encoded matrix (label first, then 160 bits).
pub fn export_onehot_csv(records: &[SequenceRecord], path: &Path) -> Result<(), DataError> {
    let mut out = String::new();
    out.push_str("label");
    for i in 0..ONE_HOT_LEN {
        out.push_str(&format!(",x{i}"));
    }
    out.push('\n');
    for rec in records {
        out.push_str(&rec.label.to_string());
        for v in one_hot(&rec.octamer)? {
            out.push(',');
            out.push_str(if v == 1.0 { "1" } else { "0" });
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(octamer: &str, label: i8) -> SequenceRecord {
        SequenceRecord { octamer: octamer.to_string(), label, source: DataSource::D746 }
    }

    #[test]
    fn parse_valid_line() {
        let recs = parse_dataset_str("AAAKFERQ,-1\n", "t", DataSource::D746).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].octamer, "AAAKFERQ");
        assert_eq!(recs[0].label, -1);
    }

    #[test]
    fn parse_rejects_bad_rows() {
        assert!(matches!(
            parse_dataset_str("AAAKFERQL,-1\n", "t", DataSource::D746),
            Err(DataError::BadLength { line: 1, .. })
        ));
        assert!(matches!(
            parse_dataset_str("AAAKFERQ,-1\nAAAKFERB,-1\n", "t", DataSource::D746),
            Err(DataError::BadLetter { line: 2, letter: 'B', .. })
        ));
        assert!(matches!(
            parse_dataset_str("AAAKFERQ,2\n", "t", DataSource::D746),
            Err(DataError::BadLabel { line: 1, .. })
        ));
        assert!(matches!(
            parse_dataset_str("AAAKFERQ\n", "t", DataSource::D746),
            Err(DataError::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn dedup_first_wins_and_logs_conflicts() {
        let a = vec![rec("AAAAAAAA", 1), rec("CCCCCCCC", -1)];
        let b = vec![rec("AAAAAAAA", -1), rec("DDDDDDDD", -1)];
        let (merged, conflicts) = merge_and_dedup(&[a, b]);
        assert_eq!(merged.len(), 3);
        assert_eq!(merged[0].label, 1);
        assert_eq!(conflicts.len(), 1);
        assert_eq!(conflicts[0].kept_label, 1);
    }

    #[test]
    fn balance_is_deterministic_and_balanced() {
        let mut records = Vec::new();
        for i in 0..30 {
            records.push(rec(&format!("AAAAAA{}{}", aa(i / 20), aa(i % 20)), -1));
        }
        for i in 0..10 {
            records.push(rec(&format!("CCCCCC{}{}", aa(i / 20), aa(i % 20)), 1));
        }
        let out1 = balance_undersample(&records, 7).unwrap();
        let out2 = balance_undersample(&records, 7).unwrap();
        assert_eq!(out1, out2);
        assert_eq!(out1.len(), 20);
        assert_eq!(out1.iter().filter(|r| r.label > 0).count(), 10);
        let already = balance_undersample(&out1, 3).unwrap();
        assert_eq!(already.len(), out1.len());
    }

    fn aa(i: usize) -> char {
        AMINO_ACIDS[i] as char
    }

    #[test]
    fn one_hot_all_alanine() {
        let row = one_hot("AAAAAAAA").unwrap();
        for p in 0..8 {
            assert_eq!(row[20 * p], 1.0);
        }
        assert_eq!(row.iter().sum::<f64>(), 8.0);
    }

    #[test]
    fn one_hot_roundtrip_random() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let s: String = (0..8).map(|_| aa(rng.random_range(0..20))).collect();
            let row = one_hot(&s).unwrap();
            assert_eq!(row.iter().filter(|&&v| v == 1.0).count(), 8);
            assert_eq!(decode_one_hot(&row).unwrap(), s);
        }
    }

    #[test]
    fn pca_recovers_exact_subspace() {
        // rows in a 2-dimensional subspace of R^5
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        use rand::Rng;
        let b1 = [1.0, 0.0, 2.0, 0.0, -1.0];
        let b2 = [0.0, 1.0, -1.0, 3.0, 0.5];
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| {
                let (a, b): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                (0..5).map(|i| a * b1[i] + b * b2[i]).collect()
            })
            .collect();
        let model = pca_fit(&rows, 2).unwrap();
        for row in &rows {
            let z = pca_transform(&model, row);
            // reconstruct
            let recon: Vec<f64> = (0..5)
                .map(|i| model.mean[i] + z[0] * model.components[0][i] + z[1] * model.components[1][i])
                .collect();
            for (a, b) in recon.iter().zip(row) {
                assert!((a - b).abs() < 1e-8);
            }
        }
        // orthonormality
        for i in 0..2 {
            for j in 0..2 {
                let dot: f64 = model.components[i].iter().zip(&model.components[j]).map(|(a, b)| a * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-8);
            }
        }
        // transform of the mean vector is the zero vector
        let z = pca_transform(&model, &model.mean.clone());
        assert!(z.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn pca_projected_variance_matches_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        use rand::Rng;
        let rows: Vec<Vec<f64>> =
            (0..60).map(|_| (0..6).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let model = pca_fit(&rows, 6).unwrap();
        let m = rows.len() as f64;
        for k in 0..6 {
            let zs: Vec<f64> = rows.iter().map(|r| pca_transform(&model, r)[k]).collect();
            let mean: f64 = zs.iter().sum::<f64>() / m;
            let var: f64 = zs.iter().map(|z| (z - mean) * (z - mean)).sum::<f64>() / (m - 1.0);
            let rel = (var - model.eigenvalues[k]).abs() / model.eigenvalues[k].max(1e-12);
            assert!(rel < 1e-8, "component {k}: {var} vs {}", model.eigenvalues[k]);
        }
    }

    #[test]
    fn rescale_endpoints_and_degenerates() {
        use crate::embed::EmbeddingKind;
        let model = RescaleModel { min: vec![0.0, 2.0, 5.0], max: vec![1.0, 4.0, 5.0] };
        let pi = std::f64::consts::PI;
        let lo = rescale_for_embedding(&[0.0, 2.0, 5.0], EmbeddingKind::Angle, &model);
        assert_eq!(lo[0], 0.0);
        assert_eq!(lo[1], 0.0);
        assert_eq!(lo[2], pi / 2.0); // degenerate dimension
        let hi = rescale_for_embedding(&[1.0, 4.0, 5.0], EmbeddingKind::Angle, &model);
        assert_eq!(hi[0], pi);
        // out-of-range clamps
        let clamped = rescale_for_embedding(&[-3.0, 9.0, 5.0], EmbeddingKind::Angle, &model);
        assert_eq!(clamped[0], 0.0);
        assert_eq!(clamped[1], pi);
        // amplitude passes through
        let amp = rescale_for_embedding(&[-3.0, 9.0, 5.0], EmbeddingKind::Amplitude, &model);
        assert_eq!(amp, vec![-3.0, 9.0, 5.0]);
    }

    #[test]
    fn split_is_stratified_and_deterministic() {
        let mut records = Vec::new();
        for i in 0..200 {
            let label = if i % 2 == 0 { 1 } else { -1 };
            records.push(rec(
                &format!("AAAA{}{}{}{}", aa(i % 20), aa((i / 20) % 20), aa(i % 7), aa(i % 13)),
                label,
            ));
        }
        let s1 = split(&records, 0.8, 0.1, 42).unwrap();
        let s2 = split(&records, 0.8, 0.1, 42).unwrap();
        assert_eq!(s1.train, s2.train);
        assert_eq!(s1.validation, s2.validation);
        assert_eq!(s1.test, s2.test);
        assert_eq!(s1.train.len() + s1.validation.len() + s1.test.len(), 200);
        let count = |set: &[SequenceRecord], label: i8| set.iter().filter(|r| r.label == label).count();
        assert!((count(&s1.test, 1) as i64 - count(&s1.test, -1) as i64).abs() <= 1);
        assert!((count(&s1.train, 1) as i64 - count(&s1.train, -1) as i64).abs() <= 1);
        // 80/20 then 10% of train carved for validation
        assert_eq!(s1.test.len(), 40);
        assert_eq!(s1.validation.len(), 16);
        assert_eq!(s1.train.len(), 144);
    }
}
