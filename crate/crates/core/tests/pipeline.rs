use eegfuse::classify::ClassifierKind;
use eegfuse::dataset::{make_pair, BonnSet, EegRecord, Label, Pair, PairDataset};
use eegfuse::dimred::{FitMode, Method};
use eegfuse::evaluate::{self, ConfusionMatrix, EvalError, ExperimentConfig};
use eegfuse::synthetic::{self, SyntheticSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_energy_corpus() -> PairDataset {
    synthetic::generate(&SyntheticSpec { per_class: 10, len: 512, seed: 3, noise: 0.0 }, Pair::AE)
}

#[test]
fn twenty_record_energy_corpus_both_modes() {
    let ds = small_energy_corpus();
    assert_eq!(ds.len(), 20);
    for mode in [FitMode::Nested, FitMode::Faithful] {
        let cfg = ExperimentConfig { mode, ..ExperimentConfig::default() };
        let res = evaluate::sweep(std::slice::from_ref(&ds), &Method::ALL, &ClassifierKind::ALL, &cfg).unwrap();
        for c in &res.cells {
            let acc = c.outcome.as_ref().unwrap().metrics.accuracy;
            if c.classifier == ClassifierKind::Nb {
                assert_eq!(acc, 1.0, "{mode} {} NB", c.method);
            } else {
                assert!(acc >= 0.95, "{mode} {} {}: {acc}", c.method, c.classifier);
            }
        }
    }
}

#[test]
fn report_invariants() {
    let ds = synthetic::generate(&SyntheticSpec { per_class: 30, len: 256, seed: 5, noise: 0.3 }, Pair::BD);
    for kind in ClassifierKind::ALL {
        let r = evaluate::run_experiment(&ds, Method::Pca, kind, &ExperimentConfig::default()).unwrap();
        let mut sum = ConfusionMatrix::default();
        for f in &r.folds {
            sum += f.confusion;
            assert_eq!(f.confusion.total(), f.test_size);
            assert_eq!(f.test_size, 6);
        }
        assert_eq!(sum, r.pooled);
        assert_eq!(r.pooled.total(), 60);
        let acc = (r.pooled.tp + r.pooled.tn) as f64 / 60.0;
        assert_eq!(r.metrics.accuracy, acc);
        assert_eq!(r.metrics.sensitivity, r.metrics.recall);
        let mean = r.folds.iter().map(|f| f.metrics.accuracy).sum::<f64>() / 10.0;
        assert!((r.fold_mean_accuracy - mean).abs() < 1e-15);
        assert_eq!(r.roc.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(r.roc.points.last(), Some(&(1.0, 1.0)));
        assert_eq!(r.manifest.records, 60);
    }
}

fn noise_pair(n_per_class: usize, len: usize, seed: u64) -> PairDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut make = |set: BonnSet, i: usize| EegRecord {
        samples: (0..len).map(|_| rng.random_range(-1.0..1.0)).collect(),
        set,
        file_id: format!("{}{i:03}", set.distribution_letter()),
    };
    let healthy = (0..n_per_class).map(|i| make(BonnSet::A, i)).collect();
    let epileptic = (0..n_per_class).map(|i| make(BonnSet::E, i)).collect();
    make_pair(healthy, epileptic, Pair::AE).unwrap()
}

#[test]
fn faithful_lda_leaks_labels_on_wide_subbands() {
    // Labels are independent of the signals, and every detail band is wider
    // than the number of records.
    let ds = noise_pair(20, 1024, 11);
    let run = |mode| {
        let cfg = ExperimentConfig { mode, ..ExperimentConfig::default() };
        evaluate::run_experiment(&ds, Method::Lda, ClassifierKind::Nb, &cfg).unwrap().metrics.accuracy
    };
    let faithful = run(FitMode::Faithful);
    let nested = run(FitMode::Nested);
    assert!(faithful >= 0.95, "faithful {faithful}");
    assert!(nested <= 0.75, "nested {nested}");
}

#[test]
fn fold_failures_carry_the_fold_index() {
    let mut ds = small_energy_corpus();
    // Constant signals leave PCA with zero variance in every fold.
    for r in &mut ds.records {
        r.samples.iter_mut().for_each(|v| *v = 1.0);
    }
    let err = evaluate::run_experiment(&ds, Method::Pca, ClassifierKind::Nb, &ExperimentConfig::default()).unwrap_err();
    assert!(err.to_string().starts_with("fold "), "{err}");
    match err {
        EvalError::Fold { fold, .. } => assert!(fold < 10),
        other => panic!("unexpected error {other}"),
    }
}

#[test]
fn sweep_records_failures_and_continues() {
    let good = small_energy_corpus();
    let tiny = synthetic::generate(&SyntheticSpec { per_class: 4, len: 128, seed: 1, noise: 0.02 }, Pair::BC);
    let res = evaluate::sweep(&[good, tiny], &Method::ALL, &ClassifierKind::ALL, &ExperimentConfig::default()).unwrap();
    assert_eq!(res.cells.len(), 18);
    let failed: Vec<_> = res.failures().collect();
    assert_eq!(failed.len(), 9);
    assert!(failed.iter().all(|c| c.pair == Pair::BC));
    assert!(failed[0].outcome.as_ref().unwrap_err().contains("fewer than 10 folds"));
    assert_eq!(res.table(Method::Lda, ClassifierKind::Nb).len(), 2);
    // Ordered by reducer, classifier, then pair.
    assert_eq!((res.cells[0].method, res.cells[0].classifier, res.cells[0].pair), (Method::Ica, ClassifierKind::Knn, Pair::AE));
    assert_eq!(res.cells[1].pair, Pair::BC);
}

#[test]
fn different_seeds_change_folds_not_validity() {
    let ds = small_energy_corpus();
    let a = evaluate::run_experiment(&ds, Method::Pca, ClassifierKind::Knn, &ExperimentConfig { seed: 1, ..Default::default() }).unwrap();
    let b = evaluate::run_experiment(&ds, Method::Pca, ClassifierKind::Knn, &ExperimentConfig { seed: 2, ..Default::default() }).unwrap();
    assert_ne!(a.manifest.seed, b.manifest.seed);
    let labels: Vec<Label> = ds.labels.clone();
    assert_ne!(evaluate::stratified_kfold(&labels, 10, 1).unwrap(), evaluate::stratified_kfold(&labels, 10, 2).unwrap());
}

#[test]
fn subband_width_cap_limits_inputs() {
    let ds = small_energy_corpus();
    let cfg = ExperimentConfig { subband_width: Some(8), feature_len: 4, ..ExperimentConfig::default() };
    let r = evaluate::run_experiment(&ds, Method::Pca, ClassifierKind::Svm, &cfg).unwrap();
    assert!(r.feature_dim <= 4);
    assert_eq!(r.manifest.subband_width, Some(8));
}
