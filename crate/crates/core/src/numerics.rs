//! Dense linear-algebra kernels used by the reducers.
//!
//! Everything here works on a small row-major [`Matrix`] type. The sizes in
//! this pipeline are modest (a few hundred rows, at most a few thousand
//! columns), so plain loops are fast enough and keep the arithmetic easy to
//! audit against the test oracles.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Index, IndexMut};
use thiserror::Error;

/// Relative threshold below which an eigenvalue is treated as zero when
/// whitening or pseudo-inverting: `RANK_EPS * max(eigenvalue)`.
pub const RANK_EPS: f64 = 1e-10;

/// Symmetry tolerance accepted by [`sym_eigen`].
pub const SYMMETRY_TOL: f64 = 1e-9;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("need at least 2 observations, got {0}")]
    TooFewObservations(usize),
    #[error("matrix is not symmetric (max |S - S^T| = {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("zero-variance data")]
    ZeroVariance,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
}

pub type Result<T> = std::result::Result<T, NumericsError>;

/// Row-major dense matrix of `f64`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows.min(8) {
            writeln!(f, "  {:?}", &self.row(r)[..self.cols.min(8)])?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(NumericsError::DimensionMismatch(format!(
                "{rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(NumericsError::DimensionMismatch(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn set_col(&mut self, c: usize, values: &[f64]) {
        for (r, &v) in values.iter().enumerate() {
            self[(r, c)] = v;
        }
    }

    /// Returns the sub-matrix made of the given rows, in order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self { rows: idx.len(), cols: self.cols, data }
    }

    /// Keeps the first `n` columns.
    pub fn leading_cols(&self, n: usize) -> Self {
        let n = n.min(self.cols);
        let mut data = Vec::with_capacity(self.rows * n);
        for r in 0..self.rows {
            data.extend_from_slice(&self.row(r)[..n]);
        }
        Self { rows: self.rows, cols: n, data }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(NumericsError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a = self.row(i);
            let o = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &aik) in a.iter().enumerate() {
                if aik == 0.0 {
                    continue;
                }
                let b = other.row(k);
                for (oj, &bkj) in o.iter_mut().zip(b) {
                    *oj += aik * bkj;
                }
            }
        }
        Ok(out)
    }

    /// `self^T * self`, exploiting symmetry.
    pub fn gram_cols(&self) -> Matrix {
        let m = self.cols;
        let mut g = Matrix::zeros(m, m);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..m {
                let ri = row[i];
                if ri == 0.0 {
                    continue;
                }
                let gi = &mut g.data[i * m..(i + 1) * m];
                for j in i..m {
                    gi[j] += ri * row[j];
                }
            }
        }
        g.mirror_upper();
        g
    }

    /// `self * self^T`, exploiting symmetry.
    pub fn gram_rows(&self) -> Matrix {
        let n = self.rows;
        let mut g = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                g[(i, j)] = dot(self.row(i), self.row(j));
            }
        }
        g.mirror_upper();
        g
    }

    fn mirror_upper(&mut self) {
        let n = self.rows;
        for i in 0..n {
            for j in 0..i {
                self.data[i * n + j] = self.data[j * n + i];
            }
        }
    }

    pub fn mat_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(NumericsError::DimensionMismatch(format!(
                "matrix has {} columns, vector has {} entries",
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows).map(|r| dot(self.row(r), v)).collect())
    }

    /// `self^T * v`.
    pub fn tr_mat_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows {
            return Err(NumericsError::DimensionMismatch(format!(
                "matrix has {} rows, vector has {} entries",
                self.rows,
                v.len()
            )));
        }
        let mut out = vec![0.0; self.cols];
        for (r, &vr) in v.iter().enumerate() {
            axpy(vr, self.row(r), &mut out);
        }
        Ok(out)
    }

    pub fn scale(&mut self, k: f64) {
        self.data.iter_mut().for_each(|x| *x *= k);
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        if self.shape() != other.shape() {
            return Err(NumericsError::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Errors on the first NaN or infinity.
    pub fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|x| !x.is_finite()) {
            Some(p) => Err(NumericsError::NonFinite(p / self.cols.max(1), p % self.cols.max(1))),
            None => Ok(()),
        }
    }

    pub fn col_means(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.cols];
        for r in 0..self.rows {
            axpy(1.0, self.row(r), &mut mean);
        }
        let n = self.rows.max(1) as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }

    /// Subtracts `mean` from every row.
    pub fn centered(&self, mean: &[f64]) -> Result<Matrix> {
        if mean.len() != self.cols {
            return Err(NumericsError::DimensionMismatch(format!(
                "mean has {} entries, matrix has {} columns",
                mean.len(),
                self.cols
            )));
        }
        let mut out = self.clone();
        for r in 0..out.rows {
            for (x, m) in out.row_mut(r).iter_mut().zip(mean) {
                *x -= m;
            }
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Sample covariance of the columns of `x` (rows are observations).
///
/// With `normalize` the scatter is divided by `N - 1`.
pub fn covariance(x: &Matrix, normalize: bool) -> Result<Matrix> {
    if x.rows() < 2 {
        return Err(NumericsError::TooFewObservations(x.rows()));
    }
    let xc = x.centered(&x.col_means())?;
    let mut c = xc.gram_cols();
    if normalize {
        c.scale(1.0 / (x.rows() - 1) as f64);
    }
    Ok(c)
}

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct EigenResult {
    /// Sorted descending.
    pub eigenvalues: Vec<f64>,
    /// Column `j` pairs with `eigenvalues[j]`.
    pub eigenvectors: Matrix,
    pub sweeps: usize,
}

impl EigenResult {
    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.eigenvectors.col(j)
    }
}

/// Flips `v` so that its largest-magnitude entry is non-negative.
pub fn canonicalize_sign(v: &mut [f64]) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in v.iter() {
        // first index wins on exact magnitude ties
        if x.abs() > best {
            best = x.abs();
            sign = if x < 0.0 { -1.0 } else { 1.0 };
        }
    }
    if sign < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
///
/// Sweeps until the off-diagonal Frobenius norm drops below
/// `1e-12 * ||S||_F` (or 100 sweeps). Eigenvalues come back sorted
/// descending and each eigenvector is sign-canonicalized.
pub fn sym_eigen(s: &Matrix) -> Result<EigenResult> {
    let n = s.rows();
    if n != s.cols() {
        return Err(NumericsError::NotSquare(s.rows(), s.cols()));
    }
    s.check_finite()?;
    let asym = s.max_asymmetry();
    let scale = s.data().iter().fold(1.0f64, |m, x| m.max(x.abs()));
    if asym > SYMMETRY_TOL * scale {
        return Err(NumericsError::NotSymmetric(asym));
    }

    let mut a = s.clone();
    // symmetrize exactly so rotations stay consistent
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = m;
            a[(j, i)] = m;
        }
    }
    let mut v = Matrix::identity(n);
    let target = JACOBI_REL_TOL * s.frobenius();

    let mut sweeps = 0;
    while sweeps < JACOBI_MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off <= target || off == 0.0 {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                rotate(&mut a, &mut v, p, q, c, sn, t);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.col(src);
        canonicalize_sign(&mut col);
        vectors.set_col(dst, &col);
    }
    Ok(EigenResult { eigenvalues, eigenvectors: vectors, sweeps })
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

#[allow(clippy::too_many_arguments)]
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64, t: f64) {
    let n = a.rows();
    let apq = a[(p, q)];
    let tau = s / (1.0 + c);
    a[(p, p)] -= t * apq;
    a[(q, q)] += t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        let nkp = akp - s * (akq + tau * akp);
        let nkq = akq + s * (akp - tau * akq);
        a[(k, p)] = nkp;
        a[(p, k)] = nkp;
        a[(k, q)] = nkq;
        a[(q, k)] = nkq;
    }
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp - s * (vkq + tau * vkp);
        v[(k, q)] = vkq + s * (vkp - tau * vkq);
    }
}

/// Leading principal directions of the column covariance of `x`.
#[derive(Debug, Clone)]
pub struct PrincipalAxes {
    pub mean: Vec<f64>,
    /// Normalized (`N - 1`) covariance eigenvalues, descending, all above the rank threshold.
    pub eigenvalues: Vec<f64>,
    /// `M x r` matrix of orthonormal, sign-canonical eigenvectors.
    pub axes: Matrix,
}

/// Top `max_dims` eigenpairs of the column covariance of `x` whose
/// eigenvalue exceeds `RANK_EPS * max(eigenvalue)`.
///
/// When there are fewer observations than columns the `N x N` Gram matrix
/// of the centered rows is decomposed instead and its eigenvectors are
/// mapped back through `Xc^T`; both routes give the same nonzero spectrum.
pub fn principal_axes(x: &Matrix, max_dims: usize) -> Result<PrincipalAxes> {
    let n = x.rows();
    if n < 2 {
        return Err(NumericsError::TooFewObservations(n));
    }
    let mean = x.col_means();
    let xc = x.centered(&mean)?;
    let denom = (n - 1) as f64;
    if x.cols() <= n {
        let mut c = xc.gram_cols();
        c.scale(1.0 / denom);
        let eig = sym_eigen(&c)?;
        let keep = retained(&eig.eigenvalues, max_dims)?;
        Ok(PrincipalAxes {
            mean,
            eigenvalues: eig.eigenvalues[..keep].to_vec(),
            axes: eig.eigenvectors.leading_cols(keep),
        })
    } else {
        principal_axes_gram(&xc, mean, max_dims)
    }
}

fn principal_axes_gram(xc: &Matrix, mean: Vec<f64>, max_dims: usize) -> Result<PrincipalAxes> {
    let denom = (xc.rows() - 1) as f64;
    let mut g = xc.gram_rows();
    g.scale(1.0 / denom);
    let eig = sym_eigen(&g)?;
    let keep = retained(&eig.eigenvalues, max_dims)?;
    let mut axes = Matrix::zeros(xc.cols(), keep);
    for j in 0..keep {
        let mut v = xc.tr_mat_vec(&eig.vector(j))?;
        let len = norm(&v);
        v.iter_mut().for_each(|x| *x /= len);
        canonicalize_sign(&mut v);
        axes.set_col(j, &v);
    }
    Ok(PrincipalAxes { mean, eigenvalues: eig.eigenvalues[..keep].to_vec(), axes })
}

/// Same as [`principal_axes`] but always through the Gram route.
pub fn principal_axes_via_gram(x: &Matrix, max_dims: usize) -> Result<PrincipalAxes> {
    if x.rows() < 2 {
        return Err(NumericsError::TooFewObservations(x.rows()));
    }
    let mean = x.col_means();
    let xc = x.centered(&mean)?;
    principal_axes_gram(&xc, mean, max_dims)
}

fn retained(eigenvalues: &[f64], max_dims: usize) -> Result<usize> {
    let top = eigenvalues.first().copied().unwrap_or(0.0);
    if top.is_nan() || top <= 0.0 {
        return Err(NumericsError::ZeroVariance);
    }
    let cut = RANK_EPS * top;
    let rank = eigenvalues.iter().take_while(|&&l| l > cut).count();
    Ok(rank.min(max_dims).max(1))
}

/// Result of symmetric (ZCA) whitening.
#[derive(Debug, Clone)]
pub struct Whitening {
    /// Centered data times `P^T`.
    pub whitened: Matrix,
    /// `V D^{-1/2} V^T` over the retained eigenpairs.
    pub transform: Matrix,
    pub mean: Vec<f64>,
    /// Retained eigenvectors (columns), the subspace on which the output is white.
    pub retained: Matrix,
}

/// Whitens the columns of `x` via the eigen-decomposition of its covariance.
pub fn whiten(x: &Matrix) -> Result<Whitening> {
    let c = covariance(x, true)?;
    let eig = sym_eigen(&c)?;
    let top = eig.eigenvalues.first().copied().unwrap_or(0.0);
    if top.is_nan() || top <= 0.0 {
        return Err(NumericsError::ZeroVariance);
    }
    let cut = RANK_EPS * top;
    let m = x.cols();
    let keep = eig.eigenvalues.iter().take_while(|&&l| l > cut).count();
    let mut p = Matrix::zeros(m, m);
    for k in 0..keep {
        let v = eig.vector(k);
        let s = 1.0 / eig.eigenvalues[k].sqrt();
        for i in 0..m {
            for j in 0..m {
                p[(i, j)] += s * v[i] * v[j];
            }
        }
    }
    let mean = x.col_means();
    let whitened = x.centered(&mean)?.matmul(&p.transpose())?;
    Ok(Whitening {
        whitened,
        transform: p,
        mean,
        retained: eig.eigenvectors.leading_cols(keep),
    })
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(s: &Matrix) -> Result<Matrix> {
    let n = s.rows();
    if n != s.cols() {
        return Err(NumericsError::NotSquare(s.rows(), s.cols()));
    }
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = s[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !d.is_finite() || d <= 0.0 {
            return Err(NumericsError::NotPositiveDefinite);
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut v = s[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / d;
        }
    }
    Ok(l)
}

/// Solves `L L^T x = b` given the Cholesky factor `L`.
pub fn cholesky_solve(l: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = l.rows();
    if b.len() != n {
        return Err(NumericsError::DimensionMismatch(format!(
            "factor is {n}x{n}, rhs has {} entries",
            b.len()
        )));
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s = b[i] - dot(&l.row(i)[..i], &y[..i]);
        y[i] = s / l[(i, i)];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    Ok(x)
}

/// Solves `(Z^T Z + ridge * I) x = b` for `Z` of shape `N x M`.
///
/// Picks the cheaper of the direct `M x M` factorization and the
/// Woodbury identity through the `N x N` system.
pub fn ridge_gram_solve(z: &Matrix, ridge: f64, b: &[f64]) -> Result<Vec<f64>> {
    if z.rows() < z.cols() {
        ridge_gram_solve_woodbury(z, ridge, b)
    } else {
        ridge_gram_solve_direct(z, ridge, b)
    }
}

pub fn ridge_gram_solve_direct(z: &Matrix, ridge: f64, b: &[f64]) -> Result<Vec<f64>> {
    let mut s = z.gram_cols();
    for i in 0..s.rows() {
        s[(i, i)] += ridge;
    }
    cholesky_solve(&cholesky(&s)?, b)
}

/// `(Z^T Z + rI)^{-1} b = (b - Z^T (Z Z^T + rI)^{-1} Z b) / r`.
pub fn ridge_gram_solve_woodbury(z: &Matrix, ridge: f64, b: &[f64]) -> Result<Vec<f64>> {
    if ridge.is_nan() || ridge <= 0.0 {
        return Err(NumericsError::NotPositiveDefinite);
    }
    let mut k = z.gram_rows();
    for i in 0..k.rows() {
        k[(i, i)] += ridge;
    }
    let zb = z.mat_vec(b)?;
    let u = cholesky_solve(&cholesky(&k)?, &zb)?;
    let ztu = z.tr_mat_vec(&u)?;
    Ok(b.iter().zip(&ztu).map(|(bi, ti)| (bi - ti) / ridge).collect())
}

/// Inverse square root `(S)^{-1/2}` of a symmetric positive definite matrix.
pub fn inv_sqrt_spd(s: &Matrix) -> Result<Matrix> {
    let eig = sym_eigen(s)?;
    let n = s.rows();
    let mut out = Matrix::zeros(n, n);
    for k in 0..n {
        let l = eig.eigenvalues[k];
        if l.is_nan() || l <= 0.0 {
            return Err(NumericsError::NotPositiveDefinite);
        }
        let v = eig.vector(k);
        let w = 1.0 / l.sqrt();
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += w * v[i] * v[j];
            }
        }
    }
    Ok(out)
}
