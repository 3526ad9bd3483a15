//! Cross-validated evaluation of the full pipeline.
//!
//! A run decomposes every record, reduces each subband, fuses the six
//! feature blocks, standardizes with training-fold statistics, trains the
//! classifier and scores the held-out fold. Metrics are computed from the
//! pooled confusion matrix; the mean of per-fold accuracies is reported
//! alongside.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::AddAssign;
use thiserror::Error;

use crate::classify::{ClassifierConfig, ClassifierKind, ClassifyError, Standardizer, TrainedClassifier};
use crate::dataset::{Label, Pair, PairDataset};
use crate::dimred::{self, DimRedError, FitMode, Method};
use crate::dwt::{self, DwtError, Subband, SubbandSet};
use crate::fusion::{fuse_features, FusionError, FusionWeights, MaxMode};
use crate::numerics::Matrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("labels ({labels}) and predictions ({predictions}) differ in length")]
    LengthMismatch { labels: usize, predictions: usize },
    #[error("confusion matrix is empty")]
    EmptyConfusion,
    #[error("{class:?} class has {count} members, fewer than {folds} folds")]
    ClassTooSmall { class: Label, count: usize, folds: usize },
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("ROC needs both classes")]
    SingleClass,
    #[error("non-finite score at index {0}")]
    NonFiniteScore(usize),
    #[error("record {record}: {source}")]
    Decompose { record: String, source: DwtError },
    #[error("subband {band}: {source}")]
    Reduce { band: Subband, source: DimRedError },
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("fold {fold}: {source}")]
    Fold { fold: usize, source: Box<EvalError> },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, EvalError>;

/// Splits indices into `k` stratified folds.
///
/// Each class is shuffled with a ChaCha stream seeded by `seed` and dealt
/// round-robin; the dealing position carries over between classes so fold
/// sizes stay balanced. Indices inside a fold are sorted.
pub fn stratified_kfold(labels: &[Label], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(EvalError::TooFewFolds(k));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut offset = 0;
    for class in [Label::Negative, Label::Positive] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.len() < k {
            return Err(EvalError::ClassTooSmall { class, count: idx.len(), folds: k });
        }
        idx.shuffle(&mut rng);
        for (i, &sample) in idx.iter().enumerate() {
            folds[(offset + i) % k].push(sample);
        }
        offset = (offset + idx.len()) % k;
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}

/// Seed for fold `fold` derived from the master seed (SplitMix64 finalizer).
pub fn derive_seed(master: u64, fold: usize) -> u64 {
    let mut z = master ^ (fold as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

impl AddAssign for ConfusionMatrix {
    fn add_assign(&mut self, o: Self) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
        self.tn += o.tn;
    }
}

pub fn confusion(y_true: &[Label], y_pred: &[Label], positive: Label) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(EvalError::LengthMismatch { labels: y_true.len(), predictions: y_pred.len() });
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t == positive, p == positive) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fn_ += 1,
            (false, true) => cm.fp += 1,
            (false, false) => cm.tn += 1,
        }
    }
    Ok(cm)
}

/// Rates in `[0, 1]`. A ratio with a zero denominator is reported as 0 and
/// its name listed in `undefined`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undefined: Vec<String>,
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<MetricSet> {
    let total = cm.total();
    if total == 0 {
        return Err(EvalError::EmptyConfusion);
    }
    let mut undefined = Vec::new();
    let mut ratio = |num: usize, den: usize, name: &str| {
        if den == 0 {
            undefined.push(name.to_string());
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let accuracy = ratio(cm.tp + cm.tn, total, "accuracy");
    let recall = ratio(cm.tp, cm.tp + cm.fn_, "recall");
    let specificity = ratio(cm.tn, cm.tn + cm.fp, "specificity");
    let precision = ratio(cm.tp, cm.tp + cm.fp, "precision");
    Ok(MetricSet {
        accuracy,
        sensitivity: recall,
        specificity,
        precision,
        recall,
        f_measure: f_measure(precision, recall),
        undefined,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// `(fpr, tpr)` from `(0, 0)` to `(1, 1)`.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// Threshold sweep over the distinct scores (descending, ties grouped)
/// with trapezoidal area.
pub fn roc(scores: &[f64], labels: &[Label]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch { labels: labels.len(), predictions: scores.len() });
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(EvalError::NonFiniteScore(i));
    }
    let pos = labels.iter().filter(|l| l.is_positive()).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(EvalError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]].is_positive() {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let (px, py) = *points.last().unwrap();
        let (x, y) = (fp as f64 / neg as f64, tp as f64 / pos as f64);
        auc += (x - px) * (y + py) / 2.0;
        points.push((x, y));
    }
    Ok(RocCurve { points, auc })
}

/// Everything that determines a run besides the data itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Requested feature length per subband.
    pub feature_len: usize,
    pub weights: FusionWeights,
    pub max_mode: MaxMode,
    pub classifier: ClassifierConfig,
    pub folds: usize,
    pub seed: u64,
    pub mode: FitMode,
    /// Keep at most this many leading coefficients per subband.
    pub subband_width: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            feature_len: 8,
            weights: FusionWeights::default(),
            max_mode: MaxMode::Elementwise,
            classifier: ClassifierConfig::default(),
            folds: 10,
            seed: 42,
            mode: FitMode::Nested,
            subband_width: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.feature_len == 0 {
            return Err(EvalError::Config("feature length L must be at least 1".into()));
        }
        if self.folds < 2 {
            return Err(EvalError::TooFewFolds(self.folds));
        }
        if self.classifier.knn_k == 0 {
            return Err(EvalError::Config("knn_k must be at least 1".into()));
        }
        if self.classifier.svm_c.is_nan() || self.classifier.svm_c <= 0.0 {
            return Err(EvalError::Config("svm_c must be positive".into()));
        }
        if self.classifier.nb_var_floor.is_nan() || self.classifier.nb_var_floor <= 0.0 {
            return Err(EvalError::Config("nb_var_floor must be positive".into()));
        }
        if self.subband_width == Some(0) {
            return Err(EvalError::Config("subband_width must be at least 1".into()));
        }
        Ok(())
    }
}

/// Complete description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub pair: Pair,
    pub dimred: Method,
    pub classifier: ClassifierKind,
    pub mode: FitMode,
    #[serde(rename = "L")]
    pub feature_len: usize,
    pub seed: u64,
    pub folds: usize,
    pub mu1: f64,
    pub mu2: f64,
    pub max_mode: MaxMode,
    pub knn_k: usize,
    pub svm_c: f64,
    pub svm_kernel: String,
    pub nb_var_floor: f64,
    pub subband_width: Option<usize>,
    pub wavelet: String,
    pub levels: usize,
    pub boundary: String,
    pub records: usize,
    pub version: String,
}

impl RunManifest {
    pub fn new(pair: Pair, dimred: Method, classifier: ClassifierKind, cfg: &ExperimentConfig, records: usize) -> Self {
        Self {
            pair,
            dimred,
            classifier,
            mode: cfg.mode,
            feature_len: cfg.feature_len,
            seed: cfg.seed,
            folds: cfg.folds,
            mu1: cfg.weights.mu1(),
            mu2: cfg.weights.mu2(),
            max_mode: cfg.max_mode,
            knn_k: cfg.classifier.knn_k,
            svm_c: cfg.classifier.svm_c,
            svm_kernel: cfg.classifier.svm_kernel.to_string(),
            nb_var_floor: cfg.classifier.nb_var_floor,
            subband_width: cfg.subband_width,
            wavelet: "db1".into(),
            levels: dwt::LEVELS,
            boundary: dwt::BOUNDARY_POLICY.into(),
            records,
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub test_size: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub manifest: RunManifest,
    pub folds: Vec<FoldResult>,
    /// Sum of the fold confusion matrices.
    pub pooled: ConfusionMatrix,
    pub metrics: MetricSet,
    pub fold_mean_accuracy: f64,
    pub roc: RocCurve,
    /// Fused feature length actually used.
    pub feature_dim: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Records of a pair decomposed into subbands.
#[derive(Debug, Clone)]
pub struct DecomposedDataset {
    pub pair: Pair,
    pub labels: Vec<Label>,
    pub subbands: Vec<SubbandSet>,
}

impl DecomposedDataset {
    pub fn new(ds: &PairDataset) -> Result<Self> {
        let subbands = ds
            .records
            .par_iter()
            .map(|r| {
                dwt::decompose5(&r.samples)
                    .map_err(|source| EvalError::Decompose { record: r.file_id.clone(), source })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { pair: ds.pair, labels: ds.labels.clone(), subbands })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// One coefficient matrix per subband, in [`Subband::ALL`] order.
    pub fn band_matrices(&self, width: Option<usize>) -> Result<Vec<Matrix>> {
        Subband::ALL
            .iter()
            .map(|&band| {
                dimred::SubbandMatrix::build(&self.subbands, band, width)
                    .map(|m| m.x)
                    .map_err(|source| EvalError::Reduce { band, source })
            })
            .collect()
    }
}

/// Fused features of one fold, ready for a classifier.
#[derive(Debug, Clone)]
pub struct FoldFeatures {
    pub fold: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub train_x: Matrix,
    pub test_x: Matrix,
    pub warnings: Vec<String>,
}

fn complement(n: usize, test: &[usize]) -> Vec<usize> {
    let mut is_test = vec![false; n];
    test.iter().for_each(|&i| is_test[i] = true);
    (0..n).filter(|&i| !is_test[i]).collect()
}

/// Fits one reducer per subband on `fit_rows` and returns the fused
/// features of every row in `apply_rows` (one matrix per slice).
fn reduce_and_fuse(
    bands: &[Matrix],
    labels: &[Label],
    fit_rows: &[usize],
    apply_rows: &[&[usize]],
    method: Method,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<(Vec<Matrix>, Vec<String>)> {
    let fit_labels: Vec<Label> = fit_rows.iter().map(|&i| labels[i]).collect();
    let mut per_band: Vec<Vec<Matrix>> = vec![Vec::with_capacity(6); apply_rows.len()];
    let mut warnings = Vec::new();
    for (band, x) in Subband::ALL.iter().zip(bands) {
        let map = |source| EvalError::Reduce { band: *band, source };
        let mut model = dimred::fit(method, &x.select_rows(fit_rows), &fit_labels, cfg.feature_len, seed)
            .map_err(map)?;
        model.mode = Some(cfg.mode);
        warnings.extend(model.warnings.iter().map(|w| format!("{band}: {w}")));
        for (slot, rows) in per_band.iter_mut().zip(apply_rows) {
            slot.push(dimred::transform(&model, &x.select_rows(rows)).map_err(map)?);
        }
    }
    let fused = per_band
        .into_iter()
        .map(|blocks| {
            let arr: [Matrix; 6] = blocks.try_into().expect("six subbands");
            fuse_features(&arr, cfg.weights, cfg.max_mode)
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok((fused, warnings))
}

/// Produces the fused train/test features for every fold.
pub fn prepare_features(
    data: &DecomposedDataset,
    method: Method,
    cfg: &ExperimentConfig,
    folds: &[Vec<usize>],
) -> Result<Vec<FoldFeatures>> {
    let bands = data.band_matrices(cfg.subband_width)?;
    let n = data.len();
    match cfg.mode {
        FitMode::Faithful => {
            let all: Vec<usize> = (0..n).collect();
            let (fused, warnings) =
                reduce_and_fuse(&bands, &data.labels, &all, &[&all], method, cfg, cfg.seed)?;
            let features = &fused[0];
            Ok(folds
                .iter()
                .enumerate()
                .map(|(fold, test)| {
                    let train = complement(n, test);
                    FoldFeatures {
                        fold,
                        train_x: features.select_rows(&train),
                        test_x: features.select_rows(test),
                        train,
                        test: test.clone(),
                        warnings: warnings.clone(),
                    }
                })
                .collect())
        }
        FitMode::Nested => folds
            .par_iter()
            .enumerate()
            .map(|(fold, test)| {
                let train = complement(n, test);
                let seed = derive_seed(cfg.seed, fold);
                let (mut fused, warnings) =
                    reduce_and_fuse(&bands, &data.labels, &train, &[&train, test], method, cfg, seed)
                        .map_err(|e| EvalError::Fold { fold, source: Box::new(e) })?;
                let test_x = fused.pop().expect("test block");
                let train_x = fused.pop().expect("train block");
                Ok(FoldFeatures { fold, train, test: test.clone(), train_x, test_x, warnings })
            })
            .collect(),
    }
}

struct FoldOutcome {
    result: FoldResult,
    scores: Vec<f64>,
    truth: Vec<Label>,
    warnings: Vec<String>,
}

fn run_fold(ff: &FoldFeatures, labels: &[Label], kind: ClassifierKind, cfg: &ClassifierConfig) -> Result<FoldOutcome> {
    let scaler = Standardizer::fit(&ff.train_x);
    let train_x = scaler.apply(&ff.train_x);
    let test_x = scaler.apply(&ff.test_x);
    let train_y: Vec<Label> = ff.train.iter().map(|&i| labels[i]).collect();
    let truth: Vec<Label> = ff.test.iter().map(|&i| labels[i]).collect();
    let model = TrainedClassifier::fit(kind, &train_x, &train_y, cfg)?;
    let mut pred = Vec::with_capacity(truth.len());
    let mut scores = Vec::with_capacity(truth.len());
    for r in 0..test_x.rows() {
        pred.push(model.predict(test_x.row(r))?);
        scores.push(model.score(test_x.row(r))?);
    }
    let cm = confusion(&truth, &pred, Label::Positive)?;
    let mut warnings = ff.warnings.clone();
    warnings.extend(model.warnings());
    Ok(FoldOutcome {
        result: FoldResult { fold: ff.fold, test_size: truth.len(), confusion: cm, metrics: metrics(&cm)? },
        scores,
        truth,
        warnings,
    })
}

/// Trains and scores `kind` on prepared fold features.
pub fn evaluate_classifier(
    data: &DecomposedDataset,
    features: &[FoldFeatures],
    method: Method,
    kind: ClassifierKind,
    cfg: &ExperimentConfig,
) -> Result<EvalReport> {
    let outcomes = features
        .par_iter()
        .map(|ff| {
            run_fold(ff, &data.labels, kind, &cfg.classifier)
                .map_err(|e| EvalError::Fold { fold: ff.fold, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut pooled = ConfusionMatrix::default();
    let mut scores = Vec::with_capacity(data.len());
    let mut truth = Vec::with_capacity(data.len());
    let mut warnings: Vec<String> = Vec::new();
    let mut folds = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        pooled += o.result.confusion;
        scores.extend(o.scores);
        truth.extend(o.truth);
        for w in o.warnings {
            let w = format!("fold {}: {w}", o.result.fold);
            if !warnings.contains(&w) {
                warnings.push(w);
            }
        }
        folds.push(o.result);
    }
    let fold_mean_accuracy = folds.iter().map(|f| f.metrics.accuracy).sum::<f64>() / folds.len() as f64;
    Ok(EvalReport {
        manifest: RunManifest::new(data.pair, method, kind, cfg, data.len()),
        metrics: metrics(&pooled)?,
        pooled,
        folds,
        fold_mean_accuracy,
        roc: roc(&scores, &truth)?,
        feature_dim: features.first().map_or(0, |f| f.train_x.cols()),
        warnings,
    })
}

/// One complete cross-validated run of the pipeline.
pub fn run_experiment(
    dataset: &PairDataset,
    method: Method,
    kind: ClassifierKind,
    cfg: &ExperimentConfig,
) -> Result<EvalReport> {
    cfg.validate()?;
    let data = DecomposedDataset::new(dataset)?;
    run_decomposed(&data, method, kind, cfg)
}

pub fn run_decomposed(
    data: &DecomposedDataset,
    method: Method,
    kind: ClassifierKind,
    cfg: &ExperimentConfig,
) -> Result<EvalReport> {
    cfg.validate()?;
    let folds = stratified_kfold(&data.labels, cfg.folds, cfg.seed)?;
    let features = prepare_features(data, method, cfg, &folds)?;
    evaluate_classifier(data, &features, method, kind, cfg)
}

/// One grid cell of a sweep; failures are kept as messages.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub pair: Pair,
    pub method: Method,
    pub classifier: ClassifierKind,
    pub outcome: std::result::Result<EvalReport, String>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Ordered by reducer, classifier, then pair.
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    pub fn get(&self, method: Method, classifier: ClassifierKind, pair: Pair) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.method == method && c.classifier == classifier && c.pair == pair)
    }

    /// Rows of one table, in pair order.
    pub fn table(&self, method: Method, classifier: ClassifierKind) -> Vec<&SweepCell> {
        self.cells.iter().filter(|c| c.method == method && c.classifier == classifier).collect()
    }

    pub fn failures(&self) -> impl Iterator<Item = &SweepCell> {
        self.cells.iter().filter(|c| c.outcome.is_err())
    }
}

/// Runs every reducer x classifier combination on every dataset. Folds
/// depend only on the labels and seed, so they are shared per pair; reducer
/// fits are shared across classifiers.
pub fn sweep(
    datasets: &[PairDataset],
    methods: &[Method],
    classifiers: &[ClassifierKind],
    cfg: &ExperimentConfig,
) -> Result<SweepResult> {
    cfg.validate()?;
    let decomposed: Vec<std::result::Result<DecomposedDataset, String>> =
        datasets.iter().map(|d| DecomposedDataset::new(d).map_err(|e| e.to_string())).collect();

    let jobs: Vec<(usize, Method)> =
        (0..datasets.len()).flat_map(|d| methods.iter().map(move |&m| (d, m))).collect();
    let results: Vec<Vec<SweepCell>> = jobs
        .par_iter()
        .map(|&(d, method)| {
            let pair = datasets[d].pair;
            let cell = |classifier, outcome| SweepCell { pair, method, classifier, outcome };
            let data = match &decomposed[d] {
                Ok(data) => data,
                Err(e) => return classifiers.iter().map(|&k| cell(k, Err(e.clone()))).collect(),
            };
            let features = stratified_kfold(&data.labels, cfg.folds, cfg.seed)
                .and_then(|folds| prepare_features(data, method, cfg, &folds));
            match features {
                Err(e) => classifiers.iter().map(|&k| cell(k, Err(e.to_string()))).collect(),
                Ok(features) => classifiers
                    .iter()
                    .map(|&k| {
                        let r = evaluate_classifier(data, &features, method, k, cfg).map_err(|e| e.to_string());
                        cell(k, r)
                    })
                    .collect(),
            }
        })
        .collect();

    let mut cells: Vec<SweepCell> = results.into_iter().flatten().collect();
    let method_rank = |m: Method| methods.iter().position(|&x| x == m);
    let clf_rank = |k: ClassifierKind| classifiers.iter().position(|&x| x == k);
    cells.sort_by_key(|c| (method_rank(c.method), clf_rank(c.classifier), c.pair));
    Ok(SweepResult { cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Label::{Negative as N, Positive as P};

    fn balanced(n: usize) -> Vec<Label> {
        (0..2 * n).map(|i| if i < n { N } else { P }).collect()
    }

    #[test]
    fn kfold_balanced_partition() {
        let labels = balanced(100);
        let folds = stratified_kfold(&labels, 10, 42).unwrap();
        assert_eq!(folds.len(), 10);
        for f in &folds {
            let pos = f.iter().filter(|&&i| labels[i] == P).count();
            assert_eq!((f.len(), pos), (20, 10));
        }
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..200).collect::<Vec<_>>());
    }

    #[test]
    fn kfold_seeded() {
        let labels = balanced(100);
        assert_eq!(stratified_kfold(&labels, 10, 1).unwrap(), stratified_kfold(&labels, 10, 1).unwrap());
        assert_ne!(stratified_kfold(&labels, 10, 1).unwrap(), stratified_kfold(&labels, 10, 2).unwrap());
    }

    #[test]
    fn kfold_small_class() {
        let mut labels = vec![N; 20];
        labels.extend([P; 9]);
        assert!(matches!(
            stratified_kfold(&labels, 10, 0),
            Err(EvalError::ClassTooSmall { class: P, count: 9, folds: 10 })
        ));
    }

    proptest! {
        #[test]
        fn kfold_proportions(neg in 10usize..60, pos in 10usize..60, k in 2usize..10, seed in any::<u64>()) {
            let mut labels = vec![N; neg];
            labels.extend(vec![P; pos]);
            let folds = stratified_kfold(&labels, k, seed).unwrap();
            let mut seen = vec![false; labels.len()];
            for f in &folds {
                let p = f.iter().filter(|&&i| labels[i] == P).count();
                let q = f.len() - p;
                prop_assert!((p as f64 - pos as f64 / k as f64).abs() <= 1.0);
                prop_assert!((q as f64 - neg as f64 / k as f64).abs() <= 1.0);
                for &i in f {
                    prop_assert!(!seen[i]);
                    seen[i] = true;
                }
            }
            prop_assert!(seen.iter().all(|s| *s));
        }

        #[test]
        fn auc_equals_pair_count(data in prop::collection::vec((0u8..6, any::<bool>()), 2..60)) {
            let scores: Vec<f64> = data.iter().map(|d| d.0 as f64 / 5.0).collect();
            let labels: Vec<Label> = data.iter().map(|d| if d.1 { P } else { N }).collect();
            prop_assume!(labels.contains(&P) && labels.contains(&N));
            let r = roc(&scores, &labels).unwrap();
            prop_assert!((r.auc - mann_whitney(&scores, &labels)).abs() < 1e-12);
        }
    }

    fn mann_whitney(scores: &[f64], labels: &[Label]) -> f64 {
        let (mut good, mut total) = (0.0, 0.0);
        for i in 0..scores.len() {
            for j in 0..scores.len() {
                if labels[i] == P && labels[j] == N {
                    total += 1.0;
                    if scores[i] > scores[j] {
                        good += 1.0;
                    } else if scores[i] == scores[j] {
                        good += 0.5;
                    }
                }
            }
        }
        good / total
    }

    #[test]
    fn confusion_cases() {
        let truth = balanced(100);
        let cm = confusion(&truth, &truth, P).unwrap();
        assert_eq!(cm, ConfusionMatrix { tp: 100, fp: 0, fn_: 0, tn: 100 });
        let inverted: Vec<Label> = truth.iter().map(|l| if *l == P { N } else { P }).collect();
        let inv = confusion(&truth, &inverted, P).unwrap();
        assert_eq!(inv, ConfusionMatrix { tp: 0, fp: 100, fn_: 100, tn: 0 });
        let hand = confusion(&[P, P, N, N], &[P, N, N, P], P).unwrap();
        assert_eq!(hand, ConfusionMatrix { tp: 1, fp: 1, fn_: 1, tn: 1 });
        assert!(confusion(&[P], &[], P).is_err());
    }

    #[test]
    fn metric_values() {
        let perfect = metrics(&ConfusionMatrix { tp: 5, fp: 0, fn_: 0, tn: 5 }).unwrap();
        for v in [perfect.accuracy, perfect.sensitivity, perfect.specificity, perfect.precision, perfect.recall, perfect.f_measure] {
            assert_eq!(v, 1.0);
        }
        let none = metrics(&ConfusionMatrix { tp: 0, fp: 0, fn_: 3, tn: 7 }).unwrap();
        assert_eq!(none.precision, 0.0);
        assert_eq!(none.f_measure, 0.0);
        assert_eq!(none.undefined, vec!["precision".to_string()]);
        assert_eq!(metrics(&ConfusionMatrix::default()), Err(EvalError::EmptyConfusion));
        let f = f_measure(0.8524, 0.9399);
        assert!((f - 0.894).abs() < 5e-4);
        assert_eq!(format!("{f:.2}"), "0.89");
    }

    #[test]
    fn roc_examples() {
        let r = roc(&[0.9, 0.8, 0.2, 0.1], &[P, P, N, N]).unwrap();
        assert_eq!(r.auc, 1.0);
        assert!(r.points.contains(&(0.0, 1.0)));
        let flat = roc(&[0.5; 6], &[P, N, P, N, N, P]).unwrap();
        assert_eq!(flat.auc, 0.5);
        assert_eq!(flat.points, vec![(0.0, 0.0), (1.0, 1.0)]);
        let hand = roc(&[0.9, 0.8, 0.7, 0.6, 0.5, 0.4], &[P, P, N, P, N, N]).unwrap();
        assert!((hand.auc - 8.0 / 9.0).abs() < 1e-12);
        assert_eq!(roc(&[0.1, 0.2], &[P, P]), Err(EvalError::SingleClass));
    }

    #[test]
    fn derived_seeds_differ_per_fold() {
        let s: Vec<u64> = (0..10).map(|f| derive_seed(42, f)).collect();
        let mut u = s.clone();
        u.sort_unstable();
        u.dedup();
        assert_eq!(u.len(), 10);
        assert_eq!(derive_seed(42, 3), s[3]);
    }

    #[test]
    fn config_validation() {
        let cfg = ExperimentConfig { folds: 1, ..ExperimentConfig::default() };
        assert_eq!(cfg.validate(), Err(EvalError::TooFewFolds(1)));
        let cfg = ExperimentConfig { feature_len: 0, ..ExperimentConfig::default() };
        assert!(cfg.validate().is_err());
        assert!(ExperimentConfig::default().validate().is_ok());
    }
}
