//! Binary classifiers applied to the fused features: k-nearest neighbours,
//! Gaussian naive Bayes and a soft-margin SVM trained with SMO.
//!
//! Every classifier exposes `predict` (a [`Label`]) and `score`, a real
//! value that grows with confidence in the positive class and feeds ROC
//! analysis.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::dataset::Label;
use crate::numerics::{dot, Matrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training data has no features")]
    NoFeatures,
    #[error("labels ({labels}) and rows ({rows}) differ in length")]
    LabelMismatch { labels: usize, rows: usize },
    #[error("both classes must be present in the training data")]
    SingleClass,
    #[error("k must be between 1 and the training size {n}, got {k}")]
    BadK { k: usize, n: usize },
    #[error("C must be positive, got {0}")]
    BadC(f64),
    #[error("query has {got} features, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite training value at row {0}")]
    NonFinite(usize),
}

pub type Result<T> = std::result::Result<T, ClassifyError>;

fn check_training(x: &Matrix, y: &[Label]) -> Result<()> {
    if x.rows() == 0 {
        return Err(ClassifyError::EmptyTrainingSet);
    }
    if x.cols() == 0 {
        return Err(ClassifyError::NoFeatures);
    }
    if y.len() != x.rows() {
        return Err(ClassifyError::LabelMismatch { labels: y.len(), rows: x.rows() });
    }
    if let Some(r) = (0..x.rows()).find(|&r| x.row(r).iter().any(|v| !v.is_finite())) {
        return Err(ClassifyError::NonFinite(r));
    }
    Ok(())
}

fn check_both_classes(y: &[Label]) -> Result<()> {
    let pos = y.iter().filter(|l| l.is_positive()).count();
    if pos == 0 || pos == y.len() {
        return Err(ClassifyError::SingleClass);
    }
    Ok(())
}

fn check_query(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(ClassifyError::DimensionMismatch { expected, got: x.len() });
    }
    Ok(())
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Z-score scaling with statistics taken from training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Constant features keep unit scale.
    pub fn fit(x: &Matrix) -> Self {
        let mean = x.col_means();
        let n = x.rows().max(1) as f64;
        let mut var = vec![0.0; x.cols()];
        for r in 0..x.rows() {
            for (j, v) in x.row(r).iter().enumerate() {
                var[j] += (v - mean[j]).powi(2);
            }
        }
        let std = var
            .into_iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s > 0.0 && s.is_finite() {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn apply(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for r in 0..out.rows() {
            for (j, v) in out.row_mut(r).iter_mut().enumerate() {
                *v = (*v - self.mean[j]) / self.std[j];
            }
        }
        out
    }
}

/// Stored training set for nearest-neighbour voting.
#[derive(Debug, Clone)]
pub struct TrainedKnn {
    x: Matrix,
    y: Vec<Label>,
    k: usize,
}

impl TrainedKnn {
    pub fn fit(x: &Matrix, y: &[Label], k: usize) -> Result<Self> {
        check_training(x, y)?;
        if k == 0 || k > x.rows() {
            return Err(ClassifyError::BadK { k, n: x.rows() });
        }
        Ok(Self { x: x.clone(), y: y.to_vec(), k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Indices of the `k` nearest training rows. Equal distances are
    /// ordered by the row values and then the label, so the result does not
    /// depend on the order of the training rows.
    pub fn neighbors(&self, q: &[f64]) -> Result<Vec<usize>> {
        check_query(self.x.cols(), q)?;
        let mut idx: Vec<(f64, usize)> = (0..self.x.rows()).map(|i| (sq_dist(self.x.row(i), q), i)).collect();
        idx.sort_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then_with(|| lexicographic(self.x.row(a.1), self.x.row(b.1)))
                .then_with(|| self.y[a.1].cmp(&self.y[b.1]))
        });
        Ok(idx.into_iter().take(self.k).map(|(_, i)| i).collect())
    }

    fn votes(&self, q: &[f64]) -> Result<(usize, f64, f64)> {
        let nn = self.neighbors(q)?;
        let (mut pos, mut dpos, mut dneg) = (0usize, 0.0, 0.0);
        for &i in &nn {
            let d = sq_dist(self.x.row(i), q).sqrt();
            if self.y[i].is_positive() {
                pos += 1;
                dpos += d;
            } else {
                dneg += d;
            }
        }
        let neg = nn.len() - pos;
        let mean_pos = if pos > 0 { dpos / pos as f64 } else { f64::INFINITY };
        let mean_neg = if neg > 0 { dneg / neg as f64 } else { f64::INFINITY };
        Ok((pos, mean_pos, mean_neg))
    }

    /// Majority vote; a tied vote goes to the class whose neighbours are
    /// closer on average, then to negative.
    pub fn predict(&self, q: &[f64]) -> Result<Label> {
        let (pos, mean_pos, mean_neg) = self.votes(q)?;
        let neg = self.k - pos;
        Ok(match pos.cmp(&neg) {
            Ordering::Greater => Label::Positive,
            Ordering::Less => Label::Negative,
            Ordering::Equal if mean_pos < mean_neg => Label::Positive,
            Ordering::Equal => Label::Negative,
        })
    }

    /// Fraction of positive votes.
    pub fn score(&self, q: &[f64]) -> Result<f64> {
        Ok(self.votes(q)?.0 as f64 / self.k as f64)
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(p, q)| p.total_cmp(q))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// Gaussian naive Bayes with per-class, per-feature mean and variance.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedNb {
    /// Index 0 negative, 1 positive.
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
    pub priors: [f64; 2],
    pub var_floor: f64,
}

impl TrainedNb {
    /// Variances are floored at `floor_ratio * max feature variance`.
    pub fn fit(x: &Matrix, y: &[Label], floor_ratio: f64) -> Result<Self> {
        check_training(x, y)?;
        check_both_classes(y)?;
        let m = x.cols();
        let overall = Standardizer::fit(x);
        let max_var = (0..m)
            .map(|j| {
                let mut s = 0.0;
                for r in 0..x.rows() {
                    s += (x[(r, j)] - overall.mean[j]).powi(2);
                }
                s / x.rows() as f64
            })
            .fold(0.0, f64::max);
        let var_floor = if max_var > 0.0 { floor_ratio * max_var } else { floor_ratio };

        let mut means = [vec![0.0; m], vec![0.0; m]];
        let mut variances = [vec![0.0; m], vec![0.0; m]];
        let mut counts = [0usize; 2];
        for (r, label) in y.iter().enumerate() {
            let c = label.is_positive() as usize;
            counts[c] += 1;
            for (acc, v) in means[c].iter_mut().zip(x.row(r)) {
                *acc += v;
            }
        }
        for c in 0..2 {
            means[c].iter_mut().for_each(|v| *v /= counts[c] as f64);
        }
        for (r, label) in y.iter().enumerate() {
            let c = label.is_positive() as usize;
            for j in 0..m {
                variances[c][j] += (x[(r, j)] - means[c][j]).powi(2);
            }
        }
        for c in 0..2 {
            for v in variances[c].iter_mut() {
                *v = (*v / counts[c] as f64).max(var_floor);
            }
        }
        let n = y.len() as f64;
        Ok(Self {
            means,
            variances,
            priors: [counts[0] as f64 / n, counts[1] as f64 / n],
            var_floor,
        })
    }

    /// Unnormalized log joint `log P(c) + sum_j log N(x_j; mu_cj, var_cj)`.
    pub fn log_joint(&self, q: &[f64]) -> Result<[f64; 2]> {
        check_query(self.means[0].len(), q)?;
        let mut out = [0.0; 2];
        for c in 0..2 {
            let mut s = self.priors[c].ln();
            for (j, &v) in q.iter().enumerate() {
                let var = self.variances[c][j];
                s -= 0.5 * ((2.0 * std::f64::consts::PI * var).ln() + (v - self.means[c][j]).powi(2) / var);
            }
            out[c] = s;
        }
        Ok(out)
    }

    /// Posterior probabilities `[negative, positive]`.
    pub fn posteriors(&self, q: &[f64]) -> Result<[f64; 2]> {
        let lj = self.log_joint(q)?;
        let top = lj[0].max(lj[1]);
        let e0 = (lj[0] - top).exp();
        let e1 = (lj[1] - top).exp();
        let z = e0 + e1;
        Ok([e0 / z, e1 / z])
    }

    pub fn predict(&self, q: &[f64]) -> Result<Label> {
        let lj = self.log_joint(q)?;
        Ok(if lj[1] > lj[0] { Label::Positive } else { Label::Negative })
    }

    pub fn score(&self, q: &[f64]) -> Result<f64> {
        Ok(self.posteriors(q)?[1])
    }
}

/// Kernel requested in configuration. `gamma: None` means
/// `1 / (n_features * variance of the training values)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum KernelSpec {
    #[default]
    Linear,
    Rbf {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<f64>,
    },
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Linear => f.write_str("linear"),
            KernelSpec::Rbf { gamma: None } => f.write_str("rbf"),
            KernelSpec::Rbf { gamma: Some(g) } => write!(f, "rbf:{g}"),
        }
    }
}

impl FromStr for KernelSpec {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        match s.split_once(':') {
            None if s == "linear" => Ok(KernelSpec::Linear),
            None if s == "rbf" => Ok(KernelSpec::Rbf { gamma: None }),
            Some(("rbf", g)) => g
                .parse::<f64>()
                .ok()
                .filter(|g| *g > 0.0)
                .map(|g| KernelSpec::Rbf { gamma: Some(g) })
                .ok_or_else(|| format!("invalid rbf gamma '{g}'")),
            _ => Err(format!("unknown kernel '{s}' (expected linear, rbf or rbf:<gamma>)")),
        }
    }
}

/// A kernel with all parameters resolved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(a, b),
            Kernel::Rbf { gamma } => (-gamma * sq_dist(a, b)).exp(),
        }
    }

    fn resolve(spec: KernelSpec, x: &Matrix) -> Kernel {
        match spec {
            KernelSpec::Linear => Kernel::Linear,
            KernelSpec::Rbf { gamma: Some(g) } => Kernel::Rbf { gamma: g },
            KernelSpec::Rbf { gamma: None } => {
                let d = x.data();
                let n = d.len() as f64;
                let mean = d.iter().sum::<f64>() / n;
                let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                let var = if var > 0.0 { var } else { 1.0 };
                Kernel::Rbf { gamma: 1.0 / (x.cols() as f64 * var) }
            }
        }
    }
}

/// SMO stopping tolerance on the maximal KKT violation.
pub const SMO_TOL: f64 = 1e-3;
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub kernel: KernelSpec,
    pub tol: f64,
    /// Pair updates allowed before giving up; `None` means `10 * N * N`
    /// (ten full passes of `N` updates over `N` points).
    pub max_iter: Option<usize>,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self { c: 1.0, kernel: KernelSpec::Linear, tol: SMO_TOL, max_iter: None }
    }
}

/// Soft-margin SVM in dual form.
#[derive(Debug, Clone)]
pub struct TrainedSvm {
    pub support_vectors: Matrix,
    /// `alpha_i * y_i` for each support vector.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub kernel: Kernel,
    pub c: f64,
    /// Multipliers of every training row, in input order.
    pub alphas: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl TrainedSvm {
    /// Trains with SMO using second-order working-set selection on the
    /// dual `min 1/2 a'Qa - e'a, 0 <= a <= C, y'a = 0`.
    pub fn fit(x: &Matrix, y: &[Label], params: SvmParams) -> Result<Self> {
        check_training(x, y)?;
        check_both_classes(y)?;
        if !params.c.is_finite() || params.c <= 0.0 {
            return Err(ClassifyError::BadC(params.c));
        }
        let n = x.rows();
        let c = params.c;
        let kernel = Kernel::resolve(params.kernel, x);
        let ys: Vec<f64> = y.iter().map(|l| l.sign()).collect();
        let mut kmat = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = kernel.eval(x.row(i), x.row(j));
                kmat[i * n + j] = v;
                kmat[j * n + i] = v;
            }
        }
        let q = |i: usize, j: usize| ys[i] * ys[j] * kmat[i * n + j];

        let mut alpha = vec![0.0; n];
        let mut grad = vec![-1.0; n];
        let max_iter = params.max_iter.unwrap_or((10 * n * n).max(10_000));
        let mut iterations = 0;
        let mut converged = false;

        while iterations < max_iter {
            // select i: maximal violator in I_up
            let mut gmax = f64::NEG_INFINITY;
            let mut i_sel = usize::MAX;
            for t in 0..n {
                let in_up = (ys[t] > 0.0 && alpha[t] < c) || (ys[t] < 0.0 && alpha[t] > 0.0);
                if in_up && -ys[t] * grad[t] >= gmax
                    && (-ys[t] * grad[t] > gmax || i_sel == usize::MAX) {
                        gmax = -ys[t] * grad[t];
                        i_sel = t;
                    }
            }
            // select j: second-order gain in I_low
            let mut gmin = f64::INFINITY;
            let mut j_sel = usize::MAX;
            let mut best_obj = f64::INFINITY;
            for t in 0..n {
                let in_low = (ys[t] > 0.0 && alpha[t] > 0.0) || (ys[t] < 0.0 && alpha[t] < c);
                if !in_low {
                    continue;
                }
                let v = -ys[t] * grad[t];
                gmin = gmin.min(v);
                if i_sel != usize::MAX && v < gmax {
                    let b = gmax - v;
                    let a = kmat[i_sel * n + i_sel] + kmat[t * n + t] - 2.0 * kmat[i_sel * n + t];
                    let a = if a > 0.0 { a } else { TAU };
                    let obj = -(b * b) / a;
                    if obj < best_obj {
                        best_obj = obj;
                        j_sel = t;
                    }
                }
            }
            if i_sel == usize::MAX || j_sel == usize::MAX || gmax - gmin < params.tol {
                converged = true;
                break;
            }
            iterations += 1;
            let (i, j) = (i_sel, j_sel);
            let (old_i, old_j) = (alpha[i], alpha[j]);
            if ys[i] != ys[j] {
                let quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
                let quad = if quad > 0.0 { quad } else { TAU };
                let delta = (-grad[i] - grad[j]) / quad;
                let diff = alpha[i] - alpha[j];
                alpha[i] += delta;
                alpha[j] += delta;
                if diff > 0.0 {
                    if alpha[j] < 0.0 {
                        alpha[j] = 0.0;
                        alpha[i] = diff;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if diff > 0.0 {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = c - diff;
                    }
                } else if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            } else {
                let quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
                let quad = if quad > 0.0 { quad } else { TAU };
                let delta = (grad[i] - grad[j]) / quad;
                let sum = alpha[i] + alpha[j];
                alpha[i] -= delta;
                alpha[j] += delta;
                if sum > c {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = sum - c;
                    }
                } else if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if sum > c {
                    if alpha[j] > c {
                        alpha[j] = c;
                        alpha[i] = sum - c;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
            let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
            for t in 0..n {
                grad[t] += q(t, i) * di + q(t, j) * dj;
            }
        }

        // bias from free multipliers, else midpoint of the feasible interval
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut sum_free, mut n_free) = (0.0, 0usize);
        for t in 0..n {
            let yg = ys[t] * grad[t];
            if alpha[t] >= c {
                if ys[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if alpha[t] <= 0.0 {
                if ys[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                n_free += 1;
                sum_free += yg;
            }
        }
        let rho = if n_free > 0 { sum_free / n_free as f64 } else { 0.5 * (ub + lb) };

        let sv: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
        Ok(Self {
            support_vectors: x.select_rows(&sv),
            dual_coef: sv.iter().map(|&t| alpha[t] * ys[t]).collect(),
            bias: -rho,
            kernel,
            c,
            alphas: alpha,
            iterations,
            converged,
        })
    }

    /// `f(x) = sum_i alpha_i y_i K(x_i, x) + b`.
    pub fn decision(&self, q: &[f64]) -> Result<f64> {
        check_query(self.support_vectors.cols(), q)?;
        let mut f = self.bias;
        for (i, coef) in self.dual_coef.iter().enumerate() {
            f += coef * self.kernel.eval(self.support_vectors.row(i), q);
        }
        Ok(f)
    }

    pub fn predict(&self, q: &[f64]) -> Result<Label> {
        Ok(if self.decision(q)? > 0.0 { Label::Positive } else { Label::Negative })
    }

    pub fn score(&self, q: &[f64]) -> Result<f64> {
        self.decision(q)
    }

    /// Primal weight vector, available for the linear kernel.
    pub fn linear_weights(&self) -> Option<Vec<f64>> {
        if self.kernel != Kernel::Linear {
            return None;
        }
        let mut w = vec![0.0; self.support_vectors.cols()];
        for (i, coef) in self.dual_coef.iter().enumerate() {
            crate::numerics::axpy(*coef, self.support_vectors.row(i), &mut w);
        }
        Some(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Knn,
    Svm,
    Nb,
}

impl ClassifierKind {
    /// Order used for the reported tables.
    pub const ALL: [ClassifierKind; 3] = [ClassifierKind::Knn, ClassifierKind::Svm, ClassifierKind::Nb];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "knn",
            ClassifierKind::Svm => "svm",
            ClassifierKind::Nb => "nb",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name().to_ascii_uppercase())
    }
}

impl FromStr for ClassifierKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "knn" => Ok(ClassifierKind::Knn),
            "svm" => Ok(ClassifierKind::Svm),
            "nb" => Ok(ClassifierKind::Nb),
            _ => Err(format!("unknown classifier '{s}' (expected knn, svm or nb)")),
        }
    }
}

/// Hyperparameters shared by all classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub knn_k: usize,
    pub svm_c: f64,
    pub svm_kernel: KernelSpec,
    pub nb_var_floor: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self { knn_k: 5, svm_c: 1.0, svm_kernel: KernelSpec::Linear, nb_var_floor: 1e-9 }
    }
}

#[derive(Debug, Clone)]
pub enum TrainedClassifier {
    Knn(TrainedKnn),
    Nb(TrainedNb),
    Svm(TrainedSvm),
}

impl TrainedClassifier {
    pub fn fit(kind: ClassifierKind, x: &Matrix, y: &[Label], cfg: &ClassifierConfig) -> Result<Self> {
        Ok(match kind {
            ClassifierKind::Knn => Self::Knn(TrainedKnn::fit(x, y, cfg.knn_k)?),
            ClassifierKind::Nb => Self::Nb(TrainedNb::fit(x, y, cfg.nb_var_floor)?),
            ClassifierKind::Svm => Self::Svm(TrainedSvm::fit(
                x,
                y,
                SvmParams { c: cfg.svm_c, kernel: cfg.svm_kernel, ..SvmParams::default() },
            )?),
        })
    }

    pub fn predict(&self, q: &[f64]) -> Result<Label> {
        match self {
            Self::Knn(m) => m.predict(q),
            Self::Nb(m) => m.predict(q),
            Self::Svm(m) => m.predict(q),
        }
    }

    pub fn score(&self, q: &[f64]) -> Result<f64> {
        match self {
            Self::Knn(m) => m.score(q),
            Self::Nb(m) => m.score(q),
            Self::Svm(m) => m.score(q),
        }
    }

    pub fn warnings(&self) -> Vec<String> {
        match self {
            Self::Svm(m) if !m.converged => {
                vec![format!("SMO stopped after {} updates without meeting tolerance", m.iterations)]
            }
            _ => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use Label::{Negative as N, Positive as P};

    fn col(v: &[f64]) -> Matrix {
        Matrix::from_vec(v.len(), 1, v.to_vec()).unwrap()
    }

    #[test]
    fn knn_nearest_point() {
        let m = TrainedKnn::fit(&col(&[0.0, 10.0]), &[N, P], 1).unwrap();
        assert_eq!(m.predict(&[1.0]).unwrap(), N);
        assert_eq!(m.score(&[9.0]).unwrap(), 1.0);
    }

    #[test]
    fn knn_k_equals_n_is_global_majority() {
        let x = col(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let y = [P, N, P, N, P];
        let m = TrainedKnn::fit(&x, &y, 5).unwrap();
        for q in [-100.0, 0.5, 2.0, 77.0] {
            assert_eq!(m.predict(&[q]).unwrap(), P);
        }
    }

    #[test]
    fn knn_tie_rules() {
        // 1 vs 1 vote: the closer class wins
        let m = TrainedKnn::fit(&col(&[0.0, 3.0]), &[N, P], 2).unwrap();
        assert_eq!(m.predict(&[2.0]).unwrap(), P);
        // equidistant: negative
        assert_eq!(m.predict(&[1.5]).unwrap(), N);
    }

    #[test]
    fn knn_errors() {
        assert_eq!(TrainedKnn::fit(&Matrix::zeros(0, 1), &[], 1).unwrap_err(), ClassifyError::EmptyTrainingSet);
        assert!(matches!(TrainedKnn::fit(&col(&[1.0]), &[N], 2), Err(ClassifyError::BadK { .. })));
    }

    #[test]
    fn knn_ignores_training_order_with_distance_ties() {
        let x = Matrix::from_rows(&[[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [3.0, 3.0]]).unwrap();
        let y = [P, N, N, P, P];
        let a = TrainedKnn::fit(&x, &y, 3).unwrap();
        let perm = [4, 2, 0, 3, 1];
        let xp = x.select_rows(&perm);
        let yp: Vec<Label> = perm.iter().map(|&i| y[i]).collect();
        let b = TrainedKnn::fit(&xp, &yp, 3).unwrap();
        for q in [[0.0, 0.0], [0.5, 0.5], [2.0, 2.0]] {
            assert_eq!(a.predict(&q).unwrap(), b.predict(&q).unwrap());
            assert_eq!(a.score(&q).unwrap(), b.score(&q).unwrap());
        }
    }

    #[test]
    fn nb_hand_computed() {
        let m = TrainedNb::fit(&col(&[-1.0, 1.0, 9.0, 11.0]), &[N, N, P, P], 1e-9).unwrap();
        assert_eq!(m.variances[0], vec![1.0]);
        assert_eq!(m.predict(&[1.0]).unwrap(), N);
        // log-likelihood gap is 40 nats
        let post = m.score(&[1.0]).unwrap();
        assert!(post < 0.01);
        assert!((post - 1.0 / (1.0 + 40f64.exp())).abs() < 1e-20);
    }

    #[test]
    fn nb_symmetric_posterior() {
        let m = TrainedNb::fit(&col(&[-3.0, -1.0, 1.0, 3.0]), &[N, N, P, P], 1e-9).unwrap();
        assert!((m.score(&[0.0]).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn nb_rejects_single_class_and_floors_variance() {
        assert_eq!(TrainedNb::fit(&col(&[1.0, 2.0]), &[P, P], 1e-9).unwrap_err(), ClassifyError::SingleClass);
        let m = TrainedNb::fit(&col(&[1.0, 1.0, 5.0, 5.0]), &[N, N, P, P], 1e-9).unwrap();
        assert!(m.variances.iter().flatten().all(|v| *v >= m.var_floor && *v > 0.0));
        let s = m.score(&[1.0]).unwrap();
        assert!(s.is_finite() && s < 1e-6);
    }

    #[test]
    fn svm_one_dimensional_max_margin() {
        let m = TrainedSvm::fit(
            &col(&[-2.0, -1.0, 1.0, 2.0]),
            &[N, N, P, P],
            SvmParams { c: 10.0, ..SvmParams::default() },
        )
        .unwrap();
        assert!(m.converged);
        let w = m.linear_weights().unwrap();
        assert!((w[0] - 1.0).abs() < 0.05, "w = {w:?}");
        assert!(m.bias.abs() < 0.1);
        let sv: Vec<f64> = m.support_vectors.data().to_vec();
        assert!(sv.iter().all(|v| *v == -1.0 || *v == 1.0), "support vectors {sv:?}");
        for (q, l) in [(-2.0, N), (-1.0, N), (1.0, P), (2.0, P)] {
            assert_eq!(m.predict(&[q]).unwrap(), l);
        }
    }

    #[test]
    fn svm_rejects_bad_input() {
        let x = col(&[1.0, 2.0]);
        assert_eq!(TrainedSvm::fit(&x, &[N, N], SvmParams::default()).unwrap_err(), ClassifyError::SingleClass);
        let p = SvmParams { c: 0.0, ..SvmParams::default() };
        assert_eq!(TrainedSvm::fit(&x, &[N, P], p).unwrap_err(), ClassifyError::BadC(0.0));
        assert_eq!(
            TrainedSvm::fit(&Matrix::zeros(2, 0), &[N, P], SvmParams::default()).unwrap_err(),
            ClassifyError::NoFeatures
        );
    }

    fn noisy_blobs(seed: u64, n: usize) -> (Matrix, Vec<Label>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let pos = i % 2 == 0;
            let c = if pos { 0.8 } else { -0.8 };
            rows.push([c + rng.random_range(-1.5..1.5), rng.random_range(-1.0..1.0)]);
            y.push(if pos { P } else { N });
        }
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    fn assert_kkt(m: &TrainedSvm, x: &Matrix, y: &[Label], tol: f64) {
        let s: f64 = m.alphas.iter().zip(y).map(|(a, l)| a * l.sign()).sum();
        assert!(s.abs() < 1e-6, "sum alpha y = {s}");
        for (t, &a) in m.alphas.iter().enumerate() {
            assert!((0.0..=m.c).contains(&a));
            let yf = y[t].sign() * m.decision(x.row(t)).unwrap();
            if a == 0.0 {
                assert!(yf >= 1.0 - tol, "row {t}: alpha=0, yf={yf}");
            } else if a < m.c {
                assert!((yf - 1.0).abs() <= tol, "row {t}: free, yf={yf}");
            } else {
                assert!(yf <= 1.0 + tol, "row {t}: alpha=C, yf={yf}");
            }
        }
    }

    #[test]
    fn svm_kkt_linear_and_rbf() {
        let (x, y) = noisy_blobs(3, 60);
        for kernel in [KernelSpec::Linear, KernelSpec::Rbf { gamma: None }, KernelSpec::Rbf { gamma: Some(2.0) }] {
            for c in [0.1, 1.0, 10.0] {
                let m = TrainedSvm::fit(&x, &y, SvmParams { c, kernel, ..SvmParams::default() }).unwrap();
                assert!(m.converged, "{kernel} C={c}");
                assert_kkt(&m, &x, &y, SMO_TOL);
            }
        }
    }

    #[test]
    fn kernel_spec_parsing() {
        assert_eq!("linear".parse::<KernelSpec>().unwrap(), KernelSpec::Linear);
        assert_eq!("RBF".parse::<KernelSpec>().unwrap(), KernelSpec::Rbf { gamma: None });
        assert_eq!("rbf:0.5".parse::<KernelSpec>().unwrap(), KernelSpec::Rbf { gamma: Some(0.5) });
        assert!("rbf:-1".parse::<KernelSpec>().is_err());
        assert!("poly".parse::<KernelSpec>().is_err());
    }

    #[test]
    fn standardizer_zero_mean_unit_scale() {
        let x = Matrix::from_rows(&[[1.0, 5.0], [3.0, 5.0], [5.0, 5.0]]).unwrap();
        let s = Standardizer::fit(&x);
        let z = s.apply(&x);
        assert!(z.col_means().iter().all(|m| m.abs() < 1e-12));
        assert_eq!(s.std[1], 1.0);
        assert_eq!(z.col(1), vec![0.0; 3]);
    }

    #[test]
    fn scores_orient_toward_positive() {
        let (x, y) = noisy_blobs(9, 80);
        let cfg = ClassifierConfig::default();
        for kind in ClassifierKind::ALL {
            let m = TrainedClassifier::fit(kind, &x, &y, &cfg).unwrap();
            let scores: Vec<f64> = (0..x.rows()).map(|r| m.score(x.row(r)).unwrap()).collect();
            // Mann-Whitney estimate of the AUC
            let mut good = 0.0;
            let mut total = 0.0;
            for i in 0..y.len() {
                for j in 0..y.len() {
                    if y[i] == P && y[j] == N {
                        total += 1.0;
                        good += match scores[i].total_cmp(&scores[j]) {
                            Ordering::Greater => 1.0,
                            Ordering::Equal => 0.5,
                            Ordering::Less => 0.0,
                        };
                    }
                }
            }
            assert!(good / total >= 0.5, "{kind}: auc {}", good / total);
        }
    }
}
