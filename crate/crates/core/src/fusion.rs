//! Feature-level fusion of the six per-subband feature vectors.
//!
//! The five detail-band vectors are collapsed by a MAX rule into one
//! vector `CD_L`, which is then blended with the approximation-band vector:
//! `F = mu1 * CA5_L + mu2 * CD_L`.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::numerics::{norm, Matrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FusionError {
    #[error("feature vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("fusion weights must be non-negative")]
    NegativeWeight,
    #[error("fusion weights must sum to 1 (got {0})")]
    WeightSum(f64),
    #[error("fusion needs row-aligned matrices ({0} vs {1} rows)")]
    RowMismatch(usize, usize),
}

pub type Result<T> = std::result::Result<T, FusionError>;

/// Convex weights of the approximation and detail features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionWeights {
    mu1: f64,
    mu2: f64,
}

impl FusionWeights {
    pub fn new(mu1: f64, mu2: f64) -> Result<Self> {
        if !(mu1 >= 0.0 && mu2 >= 0.0) {
            return Err(FusionError::NegativeWeight);
        }
        if ((mu1 + mu2) - 1.0).abs() > 1e-12 {
            return Err(FusionError::WeightSum(mu1 + mu2));
        }
        Ok(Self { mu1, mu2 })
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    pub fn mu2(&self) -> f64 {
        self.mu2
    }
}

impl Default for FusionWeights {
    fn default() -> Self {
        Self { mu1: 0.7, mu2: 0.3 }
    }
}

/// How the five detail vectors are collapsed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxMode {
    /// Per-coordinate maximum.
    #[default]
    Elementwise,
    /// The single vector with the largest Euclidean norm (first wins ties).
    ByNorm,
}

impl fmt::Display for MaxMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaxMode::Elementwise => "elementwise",
            MaxMode::ByNorm => "by_norm",
        })
    }
}

impl FromStr for MaxMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "elementwise" => Ok(MaxMode::Elementwise),
            "by_norm" | "bynorm" => Ok(MaxMode::ByNorm),
            _ => Err(format!("unknown max mode '{s}' (expected elementwise or by_norm)")),
        }
    }
}

fn check_lengths(bands: &[&[f64]]) -> Result<usize> {
    let len = bands[0].len();
    match bands.iter().find(|b| b.len() != len) {
        Some(b) => Err(FusionError::LengthMismatch(len, b.len())),
        None => Ok(len),
    }
}

/// Elementwise maximum of the five detail-band vectors.
pub fn detail_max(bands: [&[f64]; 5]) -> Result<Vec<f64>> {
    detail_max_with(bands, MaxMode::Elementwise)
}

pub fn detail_max_with(bands: [&[f64]; 5], mode: MaxMode) -> Result<Vec<f64>> {
    let len = check_lengths(&bands)?;
    Ok(match mode {
        MaxMode::Elementwise => (0..len)
            .map(|j| bands.iter().map(|b| b[j]).fold(f64::NEG_INFINITY, f64::max))
            .collect(),
        MaxMode::ByNorm => {
            let mut best = 0;
            for (i, b) in bands.iter().enumerate() {
                if norm(b) > norm(bands[best]) {
                    best = i;
                }
            }
            bands[best].to_vec()
        }
    })
}

/// `mu1 * ca5 + mu2 * cd`.
pub fn fuse(ca5: &[f64], cd: &[f64], w: FusionWeights) -> Result<Vec<f64>> {
    if ca5.len() != cd.len() {
        return Err(FusionError::LengthMismatch(ca5.len(), cd.len()));
    }
    Ok(ca5.iter().zip(cd).map(|(a, d)| w.mu1 * a + w.mu2 * d).collect())
}

/// Row-wise fusion of per-subband feature matrices given in
/// `[CD1, CD2, CD3, CD4, CD5, CA5]` order. All matrices are cut to the
/// narrowest width first.
pub fn fuse_features(bands: &[Matrix; 6], w: FusionWeights, mode: MaxMode) -> Result<Matrix> {
    let rows = bands[0].rows();
    if let Some(b) = bands.iter().find(|b| b.rows() != rows) {
        return Err(FusionError::RowMismatch(rows, b.rows()));
    }
    let width = bands.iter().map(Matrix::cols).min().unwrap_or(0);
    let mut out = Matrix::zeros(rows, width);
    for r in 0..rows {
        let cut = |k: usize| &bands[k].row(r)[..width];
        let cd = detail_max_with([cut(0), cut(1), cut(2), cut(3), cut(4)], mode)?;
        let f = fuse(cut(5), &cd, w)?;
        out.row_mut(r).copy_from_slice(&f);
    }
    Ok(out)
}
