//! Five-level Haar (Daubechies-1) wavelet decomposition.
//!
//! Each analysis step pairs neighbouring samples:
//!
//! ```text
//! approx[n] = (x[2n] + x[2n+1]) / sqrt(2)
//! detail[n] = (x[2n] - x[2n+1]) / sqrt(2)
//! ```
//!
//! Odd-length inputs are padded by repeating the last sample once, so every
//! level has `ceil(len / 2)` coefficients. Only the approximation branch is
//! split further.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use thiserror::Error;

use std::f64::consts::FRAC_1_SQRT_2;

/// Number of decomposition levels.
pub const LEVELS: usize = 5;

/// Shortest signal accepted by [`decompose5`].
pub const MIN_DECOMPOSE_LEN: usize = 32;

/// Boundary handling recorded in run manifests.
pub const BOUNDARY_POLICY: &str = "replicate-last-sample";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DwtError {
    #[error("cannot transform an empty signal")]
    Empty,
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("signal has {0} samples, minimum length {MIN_DECOMPOSE_LEN}")]
    TooShort(usize),
}

/// Analysis filters of the Haar wavelet, in correlation form
/// (`out[n] = sum_j f[j] * x[2n + j]`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaarFilterPair {
    pub lowpass: [f64; 2],
    pub highpass: [f64; 2],
}

impl HaarFilterPair {
    pub const DB1: HaarFilterPair = HaarFilterPair {
        lowpass: [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
        highpass: [FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
    };
}

impl Default for HaarFilterPair {
    fn default() -> Self {
        Self::DB1
    }
}

/// One level of the filter bank: low-pass and high-pass filtering followed
/// by downsampling by two.
pub fn analysis_step(x: &[f64]) -> Result<(Vec<f64>, Vec<f64>), DwtError> {
    if x.is_empty() {
        return Err(DwtError::Empty);
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(DwtError::NonFinite(i));
    }
    let half = x.len().div_ceil(2);
    let last = x[x.len() - 1];
    let HaarFilterPair { lowpass: g, highpass: h } = HaarFilterPair::DB1;
    let mut approx = Vec::with_capacity(half);
    let mut detail = Vec::with_capacity(half);
    for n in 0..half {
        let a = x[2 * n];
        let b = x.get(2 * n + 1).copied().unwrap_or(last);
        approx.push(g[0] * a + g[1] * b);
        detail.push(h[0] * a + h[1] * b);
    }
    Ok((approx, detail))
}

/// Identifies one of the six subbands produced by [`decompose5`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Subband {
    Cd1,
    Cd2,
    Cd3,
    Cd4,
    Cd5,
    Ca5,
}

impl Subband {
    /// Detail bands first, approximation last.
    pub const ALL: [Subband; 6] =
        [Subband::Cd1, Subband::Cd2, Subband::Cd3, Subband::Cd4, Subband::Cd5, Subband::Ca5];

    pub const DETAILS: [Subband; 5] =
        [Subband::Cd1, Subband::Cd2, Subband::Cd3, Subband::Cd4, Subband::Cd5];

    pub fn name(self) -> &'static str {
        match self {
            Subband::Cd1 => "CD1",
            Subband::Cd2 => "CD2",
            Subband::Cd3 => "CD3",
            Subband::Cd4 => "CD4",
            Subband::Cd5 => "CD5",
            Subband::Ca5 => "CA5",
        }
    }

    /// Decomposition level that produces this band (1-based).
    pub fn level(self) -> usize {
        match self {
            Subband::Cd1 => 1,
            Subband::Cd2 => 2,
            Subband::Cd3 => 3,
            Subband::Cd4 => 4,
            Subband::Cd5 | Subband::Ca5 => 5,
        }
    }
}

impl fmt::Display for Subband {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subband {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Subband::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown subband '{s}'"))
    }
}

/// The six outputs of a five-level decomposition of one record.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandSet {
    /// `details[k]` is CD(k+1).
    pub details: [Vec<f64>; LEVELS],
    pub ca5: Vec<f64>,
    pub level_lengths: [usize; LEVELS],
}

impl SubbandSet {
    pub fn get(&self, band: Subband) -> &[f64] {
        match band {
            Subband::Ca5 => &self.ca5,
            other => &self.details[other.level() - 1],
        }
    }

    /// Writes the subbands side by side, one column per band; shorter
    /// bands leave trailing cells empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let names: Vec<&str> = Subband::ALL.iter().map(|b| b.name()).collect();
        writeln!(out, "index,{}", names.join(","))?;
        let rows = self.details[0].len();
        for i in 0..rows {
            let cells: Vec<String> = Subband::ALL
                .iter()
                .map(|&b| self.get(b).get(i).map(|v| format!("{v}")).unwrap_or_default())
                .collect();
            writeln!(out, "{i},{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Lengths of the five levels for an input of `len` samples.
pub fn level_lengths(len: usize) -> [usize; LEVELS] {
    let mut out = [0; LEVELS];
    let mut n = len;
    for slot in out.iter_mut() {
        n = n.div_ceil(2);
        *slot = n;
    }
    out
}

/// Five-level decomposition into CD1..CD5 and CA5.
pub fn decompose5(x: &[f64]) -> Result<SubbandSet, DwtError> {
    if x.len() < MIN_DECOMPOSE_LEN {
        return Err(DwtError::TooShort(x.len()));
    }
    let mut details: [Vec<f64>; LEVELS] = Default::default();
    let mut lengths = [0; LEVELS];
    let mut approx = x.to_vec();
    for level in 0..LEVELS {
        let (a, d) = analysis_step(&approx)?;
        lengths[level] = d.len();
        details[level] = d;
        approx = a;
    }
    Ok(SubbandSet { details, ca5: approx, level_lengths: lengths })
}
