//! Per-subband dimensionality reduction: PCA, ICA and Fisher LDA.
//!
//! Every reducer is affine: it stores a mean vector and an `M x L'`
//! projection matrix, and [`transform`] maps rows to `(x - mean) * W`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::dataset::Label;
use crate::dwt::{Subband, SubbandSet};
use crate::numerics::{
    self, canonicalize_sign, cholesky, cholesky_solve, dot, inv_sqrt_spd, norm, principal_axes,
    ridge_gram_solve, Matrix, NumericsError,
};

/// Relative ridge added to the within-class scatter: `LDA_RIDGE * trace(S_w) / M`.
pub const LDA_RIDGE: f64 = 1e-6;
/// ICA stops when every unmixing vector moved less than this.
pub const ICA_TOL: f64 = 1e-6;
pub const ICA_MAX_ITER: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DimRedError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("requested feature length must be at least 1")]
    ZeroLength,
    #[error("need at least {needed} records, got {got}")]
    TooFewRecords { needed: usize, got: usize },
    #[error("labels ({labels}) and rows ({rows}) differ in length")]
    LabelMismatch { labels: usize, rows: usize },
    #[error("both classes must be present")]
    SingleClass,
    #[error("class means coincide; no discriminant direction")]
    IdenticalMeans,
    #[error("model expects {expected} columns, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("priors must be non-negative and sum to 1 (sum = {0})")]
    BadPriors(f64),
    #[error("subband matrices need at least one record")]
    NoRecords,
}

pub type Result<T> = std::result::Result<T, DimRedError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pca,
    Ica,
    Lda,
}

impl Method {
    /// Order used for the reported tables.
    pub const ALL: [Method; 3] = [Method::Ica, Method::Pca, Method::Lda];

    pub fn name(self) -> &'static str {
        match self {
            Method::Pca => "pca",
            Method::Ica => "ica",
            Method::Lda => "lda",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name().to_ascii_uppercase())
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pca" => Ok(Method::Pca),
            "ica" => Ok(Method::Ica),
            "lda" => Ok(Method::Lda),
            _ => Err(format!("unknown reducer '{s}' (expected pca, ica or lda)")),
        }
    }
}

/// Where reducers are fitted relative to the cross-validation split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMode {
    /// Fit on the training folds only.
    #[default]
    Nested,
    /// Fit once on the whole dataset before splitting.
    Faithful,
}

impl fmt::Display for FitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitMode::Nested => "nested",
            FitMode::Faithful => "faithful",
        })
    }
}

impl FromStr for FitMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nested" => Ok(FitMode::Nested),
            "faithful" => Ok(FitMode::Faithful),
            _ => Err(format!("unknown mode '{s}' (expected nested or faithful)")),
        }
    }
}

/// Coefficients of one subband for every record, one row per record.
#[derive(Debug, Clone)]
pub struct SubbandMatrix {
    pub subband: Subband,
    pub x: Matrix,
}

impl SubbandMatrix {
    /// Stacks `band` of every record, keeping at most `width` leading
    /// coefficients (and never more than the shortest record provides).
    pub fn build(sets: &[SubbandSet], band: Subband, width: Option<usize>) -> Result<Self> {
        let shortest = sets.iter().map(|s| s.get(band).len()).min().ok_or(DimRedError::NoRecords)?;
        let m = width.map_or(shortest, |w| w.min(shortest)).max(1);
        let rows: Vec<&[f64]> = sets.iter().map(|s| &s.get(band)[..m]).collect();
        Ok(Self { subband: band, x: Matrix::from_rows(&rows)? })
    }
}

/// A fitted affine reducer for one subband.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionModel {
    pub method: Method,
    pub mean: Vec<f64>,
    #[serde(rename = "W")]
    pub w: Matrix,
    #[serde(rename = "L'")]
    pub out_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mode: Option<FitMode>,
    /// Non-fatal fitting notes (rank reduction, ICA non-convergence).
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

impl ProjectionModel {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }
}

fn check_fit_input(x: &Matrix, l: usize, min_rows: usize) -> Result<()> {
    if l == 0 {
        return Err(DimRedError::ZeroLength);
    }
    if x.rows() < min_rows {
        return Err(DimRedError::TooFewRecords { needed: min_rows, got: x.rows() });
    }
    x.check_finite()?;
    Ok(())
}

/// Projects onto the `L` leading covariance eigenvectors.
pub fn fit_pca(x: &Matrix, l: usize) -> Result<ProjectionModel> {
    check_fit_input(x, l, 2)?;
    let axes = principal_axes(x, l)?;
    let mut warnings = Vec::new();
    if axes.axes.cols() < l {
        warnings.push(format!("rank {} below requested length {l}", axes.axes.cols()));
    }
    Ok(ProjectionModel {
        method: Method::Pca,
        out_dim: axes.axes.cols(),
        mean: axes.mean,
        w: axes.axes,
        seed: None,
        mode: None,
        warnings,
    })
}

/// Whitening to `L` dimensions followed by symmetric fixed-point ICA with
/// a `tanh` contrast.
pub fn fit_ica(x: &Matrix, l: usize, seed: u64) -> Result<ProjectionModel> {
    check_fit_input(x, l, 2)?;
    let axes = principal_axes(x, l)?;
    let r = axes.axes.cols();
    let mut warnings = Vec::new();
    if r < l {
        warnings.push(format!("rank {r} below requested length {l}"));
    }
    // K^T = V D^{-1/2}: maps centered rows to white coordinates
    let mut whitening = axes.axes.clone();
    for j in 0..r {
        let s = 1.0 / axes.eigenvalues[j].sqrt();
        for i in 0..whitening.rows() {
            whitening[(i, j)] *= s;
        }
    }
    let z = x.centered(&axes.mean)?.matmul(&whitening)?;

    let IcaOutcome { unmixing, iterations, converged } = fastica_symmetric(&z, seed)?;
    if !converged {
        warnings.push(format!("ICA did not converge within {iterations} iterations"));
    }
    let mut w = whitening.matmul(&unmixing.transpose())?;
    for j in 0..r {
        let mut c = w.col(j);
        canonicalize_sign(&mut c);
        w.set_col(j, &c);
    }
    Ok(ProjectionModel {
        method: Method::Ica,
        mean: axes.mean,
        w,
        out_dim: r,
        seed: Some(seed),
        mode: None,
        warnings,
    })
}

struct IcaOutcome {
    /// Rows are unmixing vectors in white coordinates.
    unmixing: Matrix,
    iterations: usize,
    converged: bool,
}

fn symmetric_decorrelation(w: &Matrix) -> Result<Matrix> {
    let wwt = w.matmul(&w.transpose())?;
    Ok(inv_sqrt_spd(&wwt)?.matmul(w)?)
}

fn fastica_symmetric(z: &Matrix, seed: u64) -> Result<IcaOutcome> {
    let (n, r) = z.shape();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init: Vec<f64> = (0..r * r).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut w = symmetric_decorrelation(&Matrix::from_vec(r, r, init)?)?;
    let mut best = w.clone();
    let mut best_lim = f64::INFINITY;

    for iter in 1..=ICA_MAX_ITER {
        let y = z.matmul(&w.transpose())?;
        let mut next = Matrix::zeros(r, r);
        let mut mean_deriv = vec![0.0; r];
        for t in 0..n {
            let zt = z.row(t);
            for i in 0..r {
                let g = y[(t, i)].tanh();
                mean_deriv[i] += 1.0 - g * g;
                numerics::axpy(g, zt, next.row_mut(i));
            }
        }
        for i in 0..r {
            let d = mean_deriv[i] / n as f64;
            let wi = w.row(i).to_vec();
            for (v, wv) in next.row_mut(i).iter_mut().zip(&wi) {
                *v = *v / n as f64 - d * wv;
            }
        }
        let next = symmetric_decorrelation(&next)?;
        let lim = (0..r)
            .map(|i| (1.0 - dot(next.row(i), w.row(i)).abs()).abs())
            .fold(0.0, f64::max);
        w = next;
        if lim < best_lim {
            best_lim = lim;
            best = w.clone();
        }
        if lim < ICA_TOL {
            return Ok(IcaOutcome { unmixing: w, iterations: iter, converged: true });
        }
    }
    Ok(IcaOutcome { unmixing: best, iterations: ICA_MAX_ITER, converged: false })
}

struct ClassSplit {
    neg: Vec<usize>,
    pos: Vec<usize>,
}

fn split_classes(rows: usize, labels: &[Label]) -> Result<ClassSplit> {
    if labels.len() != rows {
        return Err(DimRedError::LabelMismatch { labels: labels.len(), rows });
    }
    let (pos, neg): (Vec<usize>, Vec<usize>) = (0..rows).partition(|&i| labels[i].is_positive());
    if pos.is_empty() || neg.is_empty() {
        return Err(DimRedError::SingleClass);
    }
    Ok(ClassSplit { neg, pos })
}

fn class_mean(x: &Matrix, idx: &[usize]) -> Vec<f64> {
    let mut m = vec![0.0; x.cols()];
    for &i in idx {
        numerics::axpy(1.0, x.row(i), &mut m);
    }
    m.iter_mut().for_each(|v| *v /= idx.len() as f64);
    m
}

/// Rows centered on their own class mean.
fn within_class_deviations(x: &Matrix, split: &ClassSplit, mu_neg: &[f64], mu_pos: &[f64]) -> Matrix {
    let mut z = x.clone();
    for (idx, mu) in [(&split.neg, mu_neg), (&split.pos, mu_pos)] {
        for &i in idx {
            for (v, m) in z.row_mut(i).iter_mut().zip(mu) {
                *v -= m;
            }
        }
    }
    z
}

fn lda_ridge(trace: f64, dims: usize) -> f64 {
    let r = LDA_RIDGE * trace / dims as f64;
    if r > 0.0 {
        r
    } else {
        LDA_RIDGE
    }
}

/// Fisher direction `S_w^{-1} (mu_pos - mu_neg)` for an explicit scatter
/// matrix, with the same ridge as [`fit_lda`]. Returned with unit length.
pub fn fisher_direction(s_w: &Matrix, mean_diff: &[f64]) -> Result<Vec<f64>> {
    let mut s = s_w.clone();
    let ridge = lda_ridge(s_w.trace(), s_w.rows());
    for i in 0..s.rows() {
        s[(i, i)] += ridge;
    }
    let mut w = cholesky_solve(&cholesky(&s)?, mean_diff)?;
    let len = norm(&w);
    if len.is_nan() || len <= 0.0 {
        return Err(DimRedError::IdenticalMeans);
    }
    w.iter_mut().for_each(|v| *v /= len);
    Ok(w)
}

/// Two-class Fisher discriminant; always one output dimension.
pub fn fit_lda(x: &Matrix, labels: &[Label], l: usize) -> Result<ProjectionModel> {
    check_fit_input(x, l, 4)?;
    let split = split_classes(x.rows(), labels)?;
    let mu_neg = class_mean(x, &split.neg);
    let mu_pos = class_mean(x, &split.pos);
    let diff: Vec<f64> = mu_pos.iter().zip(&mu_neg).map(|(p, q)| p - q).collect();
    if diff.iter().all(|d| *d == 0.0) {
        return Err(DimRedError::IdenticalMeans);
    }
    let z = within_class_deviations(x, &split, &mu_neg, &mu_pos);
    let trace: f64 = z.data().iter().map(|v| v * v).sum();
    let ridge = lda_ridge(trace, x.cols());
    let mut w = ridge_gram_solve(&z, ridge, &diff)?;
    let len = norm(&w);
    if !len.is_finite() || len <= 0.0 {
        return Err(DimRedError::IdenticalMeans);
    }
    w.iter_mut().for_each(|v| *v /= len);
    if l > 1 {
        log::debug!("two-class LDA yields 1 dimension, requested {l}");
    }
    Ok(ProjectionModel {
        method: Method::Lda,
        mean: x.col_means(),
        w: Matrix::from_vec(w.len(), 1, w)?,
        out_dim: 1,
        seed: None,
        mode: None,
        warnings: Vec::new(),
    })
}

/// Dispatches to the reducer for `method`. Labels are only read by LDA.
pub fn fit(method: Method, x: &Matrix, labels: &[Label], l: usize, seed: u64) -> Result<ProjectionModel> {
    match method {
        Method::Pca => fit_pca(x, l),
        Method::Ica => fit_ica(x, l, seed),
        Method::Lda => fit_lda(x, labels, l),
    }
}

/// `(X - mean) * W`.
pub fn transform(model: &ProjectionModel, x: &Matrix) -> Result<Matrix> {
    if x.cols() != model.input_dim() {
        return Err(DimRedError::DimensionMismatch { expected: model.input_dim(), got: x.cols() });
    }
    Ok(x.centered(&model.mean)?.matmul(&model.w)?)
}

/// Parameters of the two-class linear score
/// `s_i(x) = -1/2 mu_i' S^-1 mu_i + mu_i' S^-1 x + log P(i)`.
#[derive(Debug, Clone)]
pub struct LdaScoreParams {
    pub means: Vec<Vec<f64>>,
    pub sigma: Matrix,
    pub priors: Vec<f64>,
    /// `-1/2 mu_i' S^-1 mu_i` per class.
    pub intercepts: Vec<f64>,
    /// Row `i` holds `S^-1 mu_i`.
    pub coefficients: Matrix,
}

impl LdaScoreParams {
    pub fn new(means: Vec<Vec<f64>>, sigma: Matrix, priors: Vec<f64>) -> Result<Self> {
        let p = sigma.rows();
        if let Some(m) = means.iter().find(|m| m.len() != p) {
            return Err(DimRedError::DimensionMismatch { expected: p, got: m.len() });
        }
        let total: f64 = priors.iter().sum();
        if priors.len() != means.len() || priors.iter().any(|&q| q < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(DimRedError::BadPriors(total));
        }
        let chol = cholesky(&sigma)?;
        let mut coefficients = Matrix::zeros(means.len(), p);
        let mut intercepts = Vec::with_capacity(means.len());
        for (i, mu) in means.iter().enumerate() {
            let c = cholesky_solve(&chol, mu)?;
            intercepts.push(-0.5 * dot(mu, &c));
            coefficients.row_mut(i).copy_from_slice(&c);
        }
        Ok(Self { means, sigma, priors, intercepts, coefficients })
    }

    /// Class means, ridge-regularized pooled covariance and empirical priors.
    /// Class 0 is negative, class 1 positive.
    pub fn fit(x: &Matrix, labels: &[Label]) -> Result<Self> {
        if x.rows() < 4 {
            return Err(DimRedError::TooFewRecords { needed: 4, got: x.rows() });
        }
        let split = split_classes(x.rows(), labels)?;
        let mu_neg = class_mean(x, &split.neg);
        let mu_pos = class_mean(x, &split.pos);
        let z = within_class_deviations(x, &split, &mu_neg, &mu_pos);
        let mut sigma = z.gram_cols();
        sigma.scale(1.0 / (x.rows() - 2) as f64);
        let ridge = lda_ridge(sigma.trace(), sigma.rows());
        for i in 0..sigma.rows() {
            sigma[(i, i)] += ridge;
        }
        let n = x.rows() as f64;
        let priors = vec![split.neg.len() as f64 / n, split.pos.len() as f64 / n];
        Self::new(vec![mu_neg, mu_pos], sigma, priors)
    }
}

/// Linear score of every class at `x`.
pub fn lda_score(params: &LdaScoreParams, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != params.sigma.rows() {
        return Err(DimRedError::DimensionMismatch { expected: params.sigma.rows(), got: x.len() });
    }
    Ok((0..params.means.len())
        .map(|i| params.intercepts[i] + dot(params.coefficients.row(i), x) + params.priors[i].ln())
        .collect())
}

/// Argmax of [`lda_score`] for the two-class layout of [`LdaScoreParams::fit`];
/// ties go to the negative class.
pub fn lda_predict(params: &LdaScoreParams, x: &[f64]) -> Result<Label> {
    let s = lda_score(params, x)?;
    Ok(if s.len() > 1 && s[1] > s[0] { Label::Positive } else { Label::Negative })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::covariance;

    fn rng_matrix(seed: u64, r: usize, c: usize) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..r * c).map(|_| rng.random_range(-1.0..1.0)).collect();
        Matrix::from_vec(r, c, data).unwrap()
    }

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn pca_axis_example() {
        let x = Matrix::from_rows(&[[1.0, 0.0], [-1.0, 0.0], [2.0, 0.0], [-2.0, 0.0]]).unwrap();
        let m = fit_pca(&x, 1).unwrap();
        assert_eq!(m.out_dim, 1);
        assert!(max_abs_diff(&m.w.col(0), &[1.0, 0.0]) < 1e-12);
        let p = transform(&m, &x).unwrap();
        assert!(max_abs_diff(&p.col(0), &[1.0, -1.0, 2.0, -2.0]) < 1e-12);
    }

    #[test]
    fn pca_full_rank_round_trip() {
        let x = rng_matrix(1, 12, 5);
        let m = fit_pca(&x, 5).unwrap();
        let p = transform(&m, &x).unwrap();
        let back = p.matmul(&m.w.transpose()).unwrap();
        let xc = x.centered(&x.col_means()).unwrap();
        assert!(back.sub(&xc).unwrap().frobenius() < 1e-8);
    }

    #[test]
    fn pca_projected_covariance_is_eigenvalues() {
        let x = rng_matrix(2, 10, 6);
        let m = fit_pca(&x, 3).unwrap();
        let eig = numerics::sym_eigen(&covariance(&x, true).unwrap()).unwrap();
        let c = covariance(&transform(&m, &x).unwrap(), true).unwrap();
        for i in 0..3 {
            assert!((c[(i, i)] - eig.eigenvalues[i]).abs() < 1e-8);
            for j in 0..3 {
                if i != j {
                    assert!(c[(i, j)].abs() < 1e-8);
                }
            }
        }
        let wtw = m.w.transpose().matmul(&m.w).unwrap();
        assert!(wtw.sub(&Matrix::identity(3)).unwrap().frobenius() < 1e-9);
    }

    #[test]
    fn pca_wide_matrix_uses_gram_route() {
        let x = rng_matrix(3, 8, 40);
        let m = fit_pca(&x, 4).unwrap();
        let c = covariance(&transform(&m, &x).unwrap(), true).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(c[(i, j)].abs() < 1e-8);
                }
            }
        }
        assert!(c[(0, 0)] >= c[(1, 1)] && c[(1, 1)] >= c[(2, 2)]);
    }

    #[test]
    fn pca_rank_caps_output() {
        let x = Matrix::from_rows(&[[1.0, 2.0, 0.0], [2.0, 4.0, 0.0], [3.0, 6.0, 0.0]]).unwrap();
        let m = fit_pca(&x, 3).unwrap();
        assert_eq!(m.out_dim, 1);
        assert!(!m.warnings.is_empty());
    }

    #[test]
    fn pca_zero_variance_fails() {
        let x = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!(matches!(fit_pca(&x, 1), Err(DimRedError::Numerics(NumericsError::ZeroVariance))));
    }

    fn sources(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sine: Vec<f64> = (0..n).map(|t| (t as f64 * 0.05).sin()).collect();
        let noise: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        (standardize(sine), standardize(noise))
    }

    fn standardize(v: Vec<f64>) -> Vec<f64> {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let s = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        v.into_iter().map(|x| (x - m) / s).collect()
    }

    fn corr(a: &[f64], b: &[f64]) -> f64 {
        let ma = a.iter().sum::<f64>() / a.len() as f64;
        let mb = b.iter().sum::<f64>() / b.len() as f64;
        let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
        for (x, y) in a.iter().zip(b) {
            sab += (x - ma) * (y - mb);
            saa += (x - ma).powi(2);
            sbb += (y - mb).powi(2);
        }
        sab / (saa * sbb).sqrt()
    }

    #[test]
    fn ica_identity_mixing_recovers_sources() {
        let (s1, s2) = sources(2000, 4);
        let rows: Vec<[f64; 2]> = s1.iter().zip(&s2).map(|(a, b)| [*a, *b]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let m = fit_ica(&x, 2, 42).unwrap();
        assert!(m.warnings.is_empty(), "{:?}", m.warnings);
        let y = transform(&m, &x).unwrap();
        let (c0, c1) = (y.col(0), y.col(1));
        let direct = corr(&c0, &s1).abs().min(corr(&c1, &s2).abs());
        let swapped = corr(&c0, &s2).abs().min(corr(&c1, &s1).abs());
        assert!(direct.max(swapped) > 0.99, "direct {direct} swapped {swapped}");
    }

    #[test]
    fn ica_unmixes_symmetric_mixture() {
        let (s1, s2) = sources(4000, 9);
        let a = [[1.0, 0.5], [0.5, 1.0]];
        let rows: Vec<[f64; 2]> = s1
            .iter()
            .zip(&s2)
            .map(|(p, q)| [a[0][0] * p + a[0][1] * q, a[1][0] * p + a[1][1] * q])
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let m = fit_ica(&x, 2, 7).unwrap();
        // global system: W^T A
        let amat = Matrix::from_rows(&a).unwrap();
        let g = m.w.transpose().matmul(&amat).unwrap();
        let straight = g[(0, 1)].abs().max(g[(1, 0)].abs());
        let crossed = g[(0, 0)].abs().max(g[(1, 1)].abs());
        let off = straight.min(crossed);
        assert!(off < 0.05, "global system {g:?}");
        let on = if straight < crossed {
            [g[(0, 0)].abs(), g[(1, 1)].abs()]
        } else {
            [g[(0, 1)].abs(), g[(1, 0)].abs()]
        };
        assert!(on.iter().all(|v| (v - 1.0).abs() < 0.05), "global system {g:?}");
    }

    #[test]
    fn ica_output_is_white_and_deterministic() {
        let x = rng_matrix(5, 300, 10);
        let a = fit_ica(&x, 4, 99).unwrap();
        let b = fit_ica(&x, 4, 99).unwrap();
        assert_eq!(a, b);
        let c = covariance(&transform(&a, &x).unwrap(), true).unwrap();
        assert!(c.sub(&Matrix::identity(4)).unwrap().frobenius() < 1e-4);
    }

    #[test]
    fn ica_rank_reduction_warns() {
        let rows: Vec<[f64; 3]> = (0..50).map(|i| {
            let t = i as f64;
            [t.sin(), 2.0 * t.sin(), (0.3 * t).cos()]
        }).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let m = fit_ica(&x, 3, 1).unwrap();
        assert_eq!(m.out_dim, 2);
        assert!(m.warnings.iter().any(|w| w.contains("rank")));
    }

    fn blobs(seed: u64, n: usize, center_pos: [f64; 2]) -> (Matrix, Vec<Label>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..2 * n {
            let pos = i >= n;
            let c = if pos { center_pos } else { [0.0, 0.0] };
            rows.push([c[0] + rng.random_range(-1.0..1.0), c[1] + rng.random_range(-1.0..1.0)]);
            labels.push(if pos { Label::Positive } else { Label::Negative });
        }
        (Matrix::from_rows(&rows).unwrap(), labels)
    }

    #[test]
    fn lda_symmetric_blobs() {
        // mirrored offsets make the within-class scatter exactly isotropic
        let offs = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (c, lab) in [([0.0, 0.0], Label::Negative), ([4.0, 0.0], Label::Positive)] {
            for o in offs {
                rows.push([c[0] + o[0], c[1] + o[1]]);
                labels.push(lab);
            }
        }
        let x = Matrix::from_rows(&rows).unwrap();
        let m = fit_lda(&x, &labels, 8).unwrap();
        assert_eq!(m.out_dim, 1);
        assert!(max_abs_diff(&m.w.col(0), &[1.0, 0.0]) < 1e-12);
    }

    #[test]
    fn fisher_closed_form() {
        let sw = Matrix::from_rows(&[[2.0, 0.0], [0.0, 1.0]]).unwrap();
        let w = fisher_direction(&sw, &[1.0, 1.0]).unwrap();
        let expect = [0.5 / 1.25f64.sqrt(), 1.0 / 1.25f64.sqrt()];
        assert!(max_abs_diff(&w, &expect) < 1e-6);
    }

    #[test]
    fn lda_data_route_matches_scatter_route() {
        let (x, labels) = blobs(12, 15, [1.5, -0.5]);
        let x = {
            // add a correlated third column
            let rows: Vec<Vec<f64>> =
                (0..x.rows()).map(|i| vec![x[(i, 0)], x[(i, 1)], x[(i, 0)] - 0.3 * x[(i, 1)]]).collect();
            Matrix::from_rows(&rows).unwrap()
        };
        let m = fit_lda(&x, &labels, 1).unwrap();
        let split = split_classes(x.rows(), &labels).unwrap();
        let mn = class_mean(&x, &split.neg);
        let mp = class_mean(&x, &split.pos);
        // explicit scatter oracle
        let mut sw = Matrix::zeros(3, 3);
        for i in 0..x.rows() {
            let mu = if labels[i].is_positive() { &mp } else { &mn };
            for a in 0..3 {
                for b in 0..3 {
                    sw[(a, b)] += (x[(i, a)] - mu[a]) * (x[(i, b)] - mu[b]);
                }
            }
        }
        let diff: Vec<f64> = mp.iter().zip(&mn).map(|(p, q)| p - q).collect();
        let w = fisher_direction(&sw, &diff).unwrap();
        assert!(max_abs_diff(&w, &m.w.col(0)) < 1e-9);
    }

    #[test]
    fn lda_beats_random_directions() {
        let (x, labels) = blobs(13, 30, [1.0, 0.7]);
        let rows: Vec<Vec<f64>> = (0..x.rows())
            .map(|i| vec![x[(i, 0)], x[(i, 1)], 0.5 * x[(i, 0)] + x[(i, 1)], x[(i, 1)] * 0.2])
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let m = fit_lda(&x, &labels, 1).unwrap();
        let split = split_classes(x.rows(), &labels).unwrap();
        let mn = class_mean(&x, &split.neg);
        let mp = class_mean(&x, &split.pos);
        let ratio = |w: &[f64]| {
            let db = dot(w, &mp) - dot(w, &mn);
            let mut sw = 0.0;
            for i in 0..x.rows() {
                let mu = if labels[i].is_positive() { &mp } else { &mn };
                let d: f64 = x.row(i).iter().zip(mu).zip(w).map(|((a, b), c)| (a - b) * c).sum();
                sw += d * d;
            }
            db * db / sw
        };
        let best = ratio(&m.w.col(0));
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..100 {
            let w: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            assert!(best >= ratio(&w) * (1.0 - 1e-9));
        }
    }

    #[test]
    fn lda_separates_means_and_rejects_single_class() {
        let (x, labels) = blobs(14, 10, [3.0, 3.0]);
        let m = fit_lda(&x, &labels, 1).unwrap();
        let p = transform(&m, &x).unwrap();
        let mean_of = |lab: Label| {
            let v: Vec<f64> = (0..x.rows()).filter(|&i| labels[i] == lab).map(|i| p[(i, 0)]).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        assert!(mean_of(Label::Positive) > mean_of(Label::Negative));
        let same = vec![Label::Negative; x.rows()];
        assert_eq!(fit_lda(&x, &same, 1), Err(DimRedError::SingleClass));
    }

    #[test]
    fn transform_identity_and_mismatch() {
        let x = Matrix::from_rows(&[[1.0, -2.0], [-1.0, 2.0]]).unwrap();
        let model = ProjectionModel {
            method: Method::Pca,
            mean: vec![0.0, 0.0],
            w: Matrix::identity(2),
            out_dim: 2,
            seed: None,
            mode: None,
            warnings: vec![],
        };
        assert_eq!(transform(&model, &x).unwrap(), x);
        let bad = Matrix::zeros(2, 3);
        assert_eq!(
            transform(&model, &bad),
            Err(DimRedError::DimensionMismatch { expected: 2, got: 3 })
        );
    }

    #[test]
    fn reducers_are_shift_invariant() {
        let x = rng_matrix(15, 40, 6);
        let labels: Vec<Label> =
            (0..40).map(|i| if i % 2 == 0 { Label::Positive } else { Label::Negative }).collect();
        let shifted = {
            let mut s = x.clone();
            for r in 0..s.rows() {
                for (j, v) in s.row_mut(r).iter_mut().enumerate() {
                    *v += 3.0 + j as f64;
                }
            }
            s
        };
        for method in Method::ALL {
            let a = fit(method, &x, &labels, 3, 5).unwrap();
            let b = fit(method, &shifted, &labels, 3, 5).unwrap();
            let pa = transform(&a, &x).unwrap();
            let pb = transform(&b, &shifted).unwrap();
            assert!(pa.sub(&pb).unwrap().frobenius() < 1e-8, "{method}");
        }
    }

    #[test]
    fn lda_score_examples() {
        let p = LdaScoreParams::new(
            vec![vec![-1.0, 2.0], vec![1.0, -2.0]],
            Matrix::identity(2),
            vec![0.5, 0.5],
        )
        .unwrap();
        let s = lda_score(&p, &[0.0, 0.0]).unwrap();
        assert!((s[0] - s[1]).abs() < 1e-15);
        assert_eq!(lda_predict(&p, &[0.0, 0.0]).unwrap(), Label::Negative);

        let p = LdaScoreParams::new(vec![vec![0.0], vec![10.0]], Matrix::identity(1), vec![0.5, 0.5]).unwrap();
        let s = lda_score(&p, &[1.0]).unwrap();
        assert!(s[0] > s[1]);
    }

    #[test]
    fn lda_score_matches_literal_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let a = rng_matrix(32, 3, 3);
        let mut sigma = a.transpose().matmul(&a).unwrap();
        for i in 0..3 {
            sigma[(i, i)] += 0.5;
        }
        let means: Vec<Vec<f64>> = (0..2).map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let params = LdaScoreParams::new(means.clone(), sigma.clone(), vec![0.3, 0.7]).unwrap();
        // oracle: explicit inverse by Gauss-Jordan
        let inv = gauss_jordan_inverse(&sigma);
        for _ in 0..20 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
            let scores = lda_score(&params, &x).unwrap();
            let lit: Vec<f64> = (0..2)
                .map(|i| {
                    let si_mu = inv.mat_vec(&means[i]).unwrap();
                    -0.5 * dot(&means[i], &si_mu) + dot(&si_mu, &x) + [0.3f64, 0.7][i].ln()
                })
                .collect();
            assert!(max_abs_diff(&scores, &lit) < 1e-10);
            let lit_arg = if lit[1] > lit[0] { Label::Positive } else { Label::Negative };
            assert_eq!(lda_predict(&params, &x).unwrap(), lit_arg);
        }
    }

    fn gauss_jordan_inverse(m: &Matrix) -> Matrix {
        let n = m.rows();
        let mut a = m.clone();
        let mut inv = Matrix::identity(n);
        for c in 0..n {
            let p = (c..n).max_by(|&i, &j| a[(i, c)].abs().total_cmp(&a[(j, c)].abs())).unwrap();
            for k in 0..n {
                let t = a[(c, k)];
                a[(c, k)] = a[(p, k)];
                a[(p, k)] = t;
                let t = inv[(c, k)];
                inv[(c, k)] = inv[(p, k)];
                inv[(p, k)] = t;
            }
            let d = a[(c, c)];
            for k in 0..n {
                a[(c, k)] /= d;
                inv[(c, k)] /= d;
            }
            for r in 0..n {
                if r != c {
                    let f = a[(r, c)];
                    for k in 0..n {
                        a[(r, k)] -= f * a[(c, k)];
                        inv[(r, k)] -= f * inv[(c, k)];
                    }
                }
            }
        }
        inv
    }

    #[test]
    fn lda_score_rejects_singular_sigma() {
        let sigma = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        let err = LdaScoreParams::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]], sigma, vec![0.5, 0.5]);
        assert!(matches!(err, Err(DimRedError::Numerics(NumericsError::NotPositiveDefinite))));
    }

    #[test]
    fn lda_score_fit_from_data() {
        let (x, labels) = blobs(40, 25, [3.0, 0.0]);
        let p = LdaScoreParams::fit(&x, &labels).unwrap();
        assert!((p.priors.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let correct = (0..x.rows()).filter(|&i| lda_predict(&p, x.row(i)).unwrap() == labels[i]).count();
        assert!(correct as f64 / x.rows() as f64 > 0.9);
    }

    #[test]
    fn model_json_fields() {
        let x = rng_matrix(6, 10, 3);
        let mut m = fit_ica(&x, 2, 3).unwrap();
        m.mode = Some(FitMode::Faithful);
        let v: serde_json::Value = serde_json::from_str(&m.to_json()).unwrap();
        for key in ["method", "mean", "W", "L'", "seed", "mode"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["method"], "ica");
        assert_eq!(v["mode"], "faithful");
        let back: ProjectionModel = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn subband_matrix_width_cap() {
        let sets: Vec<SubbandSet> = (0..3)
            .map(|k| crate::dwt::decompose5(&vec![k as f64 + 1.0; 64]).unwrap())
            .collect();
        let full = SubbandMatrix::build(&sets, Subband::Cd1, None).unwrap();
        assert_eq!(full.x.shape(), (3, 32));
        let capped = SubbandMatrix::build(&sets, Subband::Cd1, Some(10)).unwrap();
        assert_eq!(capped.x.shape(), (3, 10));
        let ca = SubbandMatrix::build(&sets, Subband::Ca5, Some(100)).unwrap();
        assert_eq!(ca.x.shape(), (3, 2));
    }
}
