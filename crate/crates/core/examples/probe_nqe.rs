//! Dev probe: NQE trainability and timing on the synthetic corpus.

use std::time::Instant;

use qcleave::data;
use qcleave::datagen;
use qcleave::embed::{Embedding, EmbeddingKind};
use qcleave::nqe::{train_nqe, LabeledSet, LayerSpec, NqeData, NqeTrainConfig, PairObjective};

fn main() {
    let t0 = Instant::now();
    let dir = std::env::temp_dir().join("qcleave-probe-data");
    datagen::generate_corpus(&dir, datagen::DEFAULT_SEED).unwrap();
    let snapshot = data::preprocess_dir(&dir, datagen::DEFAULT_SEED).unwrap();
    println!("counts: {:?}", snapshot.counts);
    let split = data::split(&snapshot.records, 0.8, 0.1, snapshot.seed).unwrap();
    println!(
        "split: train={} val={} test={} ({:.1?})",
        split.train.len(),
        split.validation.len(),
        split.test.len(),
        t0.elapsed()
    );

    let to_set = |recs: &[data::SequenceRecord]| LabeledSet {
        rows: recs.iter().map(|r| data::one_hot(&r.octamer).unwrap()).collect(),
        labels: recs.iter().map(|r| r.label).collect(),
    };
    let nqe_data = NqeData {
        train: to_set(&split.train),
        validation: to_set(&split.validation),
        test: to_set(&split.test),
    };

    let which = std::env::args().nth(1).unwrap_or_else(|| "ang8".to_string());
    let (kind, n_qubits, specs, batch, lr, iters): (EmbeddingKind, usize, Vec<LayerSpec>, usize, f64, usize) =
        match which.as_str() {
            "ang8" => (
                EmbeddingKind::Angle,
                8,
                vec![LayerSpec::new(160, 16, true), LayerSpec::new(16, 8, true)],
                25,
                0.01,
                2000,
            ),
            "zz4" => (
                EmbeddingKind::ZzLinear,
                4,
                vec![LayerSpec::new(160, 8, true), LayerSpec::new(8, 8, true)],
                512,
                0.01,
                2000,
            ),
            "zz8" => (
                EmbeddingKind::ZzLinear,
                8,
                vec![
                    LayerSpec::new(160, 64, true),
                    LayerSpec::new(64, 32, true),
                    LayerSpec::new(32, 16, true),
                ],
                25,
                0.01,
                2000,
            ),
            "amp4" => (
                EmbeddingKind::Amplitude,
                4,
                vec![
                    LayerSpec::new(160, 64, true),
                    LayerSpec::new(64, 32, true),
                    LayerSpec::new(32, 16, true),
                ],
                256,
                0.01,
                2000,
            ),
            "ang4" => (
                EmbeddingKind::Angle,
                4,
                vec![
                    LayerSpec::new(160, 16, true),
                    LayerSpec::new(16, 8, true),
                    LayerSpec::new(8, 4, true),
                ],
                256,
                0.008,
                2000,
            ),
            "amp8" => (
                EmbeddingKind::Amplitude,
                8,
                vec![LayerSpec::new(160, 80, true), LayerSpec::new(80, 256, true)],
                25,
                0.02,
                2000,
            ),
            other => panic!("unknown preset {other}"),
        };

    let seed: u64 = std::env::args().nth(2).map(|s| s.parse().unwrap()).unwrap_or(0);
    let embedding = Embedding::new(kind, n_qubits);
    let objective = PairObjective::Quantum { embedding: &embedding, noise: None };
    let mut config = NqeTrainConfig::new(batch, lr, iters, seed);
    if let Some(p) = std::env::args().nth(3) {
        config.patience = p.parse().unwrap();
    }
    if let Some(m) = std::env::args().nth(4) {
        config.all_pairs = m.parse::<u8>().unwrap() != 0;
    }
    let t1 = Instant::now();
    let out = train_nqe(&specs, &objective, &nqe_data, &config).unwrap();
    for row in out.history.iter().filter(|r| r.iteration % 200 == 0) {
        println!("  iter {:>5} train {:.4} val {:?}", row.iteration, row.train_loss, row.val_loss);
    }
    // class geometry of trained features
    let feats = qcleave::nqe::net_features(&out.net, kind, &nqe_data.train.rows).unwrap();
    let dim = feats[0].len();
    let mut mean = [vec![0.0; dim], vec![0.0; dim]];
    let mut count = [0usize; 2];
    for (f, &y) in feats.iter().zip(&nqe_data.train.labels) {
        let c = usize::from(y > 0);
        count[c] += 1;
        for (m, v) in mean[c].iter_mut().zip(f) {
            *m += v;
        }
    }
    for c in 0..2 {
        for m in mean[c].iter_mut() {
            *m /= count[c] as f64;
        }
    }
    let mut spread = [0.0f64; 2];
    for (f, &y) in feats.iter().zip(&nqe_data.train.labels) {
        let c = usize::from(y > 0);
        spread[c] += f.iter().zip(&mean[c]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    for c in 0..2 {
        spread[c] = (spread[c] / count[c] as f64).sqrt();
    }
    let gap: f64 = mean[0].iter().zip(&mean[1]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    println!(
        "  feature geometry: spread(neg)={:.3} spread(pos)={:.3} class-gap={:.3}",
        spread[0],
        spread[1],
        gap.sqrt()
    );
    let td = out.trace_distances.unwrap();
    println!(
        "{which}: iters={} early_stop={} best_val={:.4} degenerate={} time={:.1?}",
        out.iterations_run, out.early_stopped, out.best_val_loss, out.degenerate_events, t1.elapsed()
    );
    println!(
        "  td train {:.4} -> {:.4} | test {:.4} -> {:.4}",
        td.train_before, td.train_after, td.test_before, td.test_after
    );
}
