//! Loading the Bonn EEG corpus and building two-class pair datasets.
//!
//! The corpus is a directory per set (`A`..`E`, or the distribution's
//! letters `Z`, `O`, `N`, `F`, `S`), each holding one plain-text file of
//! whitespace-separated samples per record.

use log::warn;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use thiserror::Error;

/// Records per set in the intact corpus.
pub const EXPECTED_RECORDS: usize = 100;
/// Samples per record in the intact corpus (173.61 Hz for 23.6 s).
pub const EXPECTED_SAMPLES: usize = 4097;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("set directory for {set} not found under {root}")]
    MissingSetDir { set: BonnSet, root: PathBuf },
    #[error("{path}:{line}: cannot parse '{token}' as a number")]
    Parse { path: PathBuf, line: usize, token: String },
    #[error("{path}:{line}: non-finite sample '{token}'")]
    NonFinite { path: PathBuf, line: usize, token: String },
    #[error("{0}: file contains no samples")]
    EmptyFile(PathBuf),
    #[error("{set}: no record files found in {dir}")]
    NoRecords { set: BonnSet, dir: PathBuf },
    #[error("empty class: {0}")]
    EmptyClass(&'static str),
    #[error("record '{file_id}' belongs to set {found}, but pair {pair} expects set {expected}")]
    SetMismatch { file_id: String, found: BonnSet, expected: BonnSet, pair: Pair },
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

pub type Result<T> = std::result::Result<T, DatasetError>;

/// The five Bonn recording sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BonnSet {
    /// Z: healthy, eyes open.
    A,
    /// O: healthy, eyes closed.
    B,
    /// N: interictal, opposite hemisphere.
    C,
    /// F: interictal, epileptogenic zone.
    D,
    /// S: ictal.
    E,
}

impl BonnSet {
    pub const ALL: [BonnSet; 5] = [BonnSet::A, BonnSet::B, BonnSet::C, BonnSet::D, BonnSet::E];

    /// Letter used by the public distribution (file prefix and folder name).
    pub fn distribution_letter(self) -> char {
        match self {
            BonnSet::A => 'Z',
            BonnSet::B => 'O',
            BonnSet::C => 'N',
            BonnSet::D => 'F',
            BonnSet::E => 'S',
        }
    }

    pub fn letter(self) -> char {
        match self {
            BonnSet::A => 'A',
            BonnSet::B => 'B',
            BonnSet::C => 'C',
            BonnSet::D => 'D',
            BonnSet::E => 'E',
        }
    }

    pub fn is_epileptic(self) -> bool {
        matches!(self, BonnSet::C | BonnSet::D | BonnSet::E)
    }

    fn dir_candidates(self) -> Vec<String> {
        let a = self.letter();
        let z = self.distribution_letter();
        vec![
            a.to_string(),
            z.to_string(),
            a.to_ascii_lowercase().to_string(),
            z.to_ascii_lowercase().to_string(),
            format!("set_{}", a.to_ascii_lowercase()),
            format!("Set{a}"),
            format!("Set {a}"),
        ]
    }

    /// Finds this set's directory under `root`.
    pub fn locate(self, root: &Path) -> Option<PathBuf> {
        self.dir_candidates().into_iter().map(|c| root.join(c)).find(|p| p.is_dir())
    }
}

impl fmt::Display for BonnSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.letter(), self.distribution_letter())
    }
}

impl FromStr for BonnSet {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let up = s.trim().to_ascii_uppercase();
        BonnSet::ALL
            .into_iter()
            .find(|b| up == b.letter().to_string() || up == b.distribution_letter().to_string())
            .ok_or_else(|| format!("unknown Bonn set '{s}' (expected A-E or Z/O/N/F/S)"))
    }
}

/// One single-channel EEG trace.
#[derive(Debug, Clone, PartialEq)]
pub struct EegRecord {
    pub samples: Vec<f64>,
    pub set: BonnSet,
    pub file_id: String,
}

/// Parses whitespace-separated samples. `origin` names the source in errors.
pub fn parse_samples(text: &str, origin: &Path) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        for token in line.split_whitespace() {
            let v: f64 = token.parse().map_err(|_| DatasetError::Parse {
                path: origin.to_path_buf(),
                line: lineno + 1,
                token: token.to_string(),
            })?;
            if !v.is_finite() {
                return Err(DatasetError::NonFinite {
                    path: origin.to_path_buf(),
                    line: lineno + 1,
                    token: token.to_string(),
                });
            }
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err(DatasetError::EmptyFile(origin.to_path_buf()));
    }
    Ok(out)
}

pub fn load_record(path: &Path, set: BonnSet) -> Result<EegRecord> {
    let text = fs::read_to_string(path)
        .map_err(|source| DatasetError::Io { path: path.to_path_buf(), source })?;
    let samples = parse_samples(&text, path)?;
    let file_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(EegRecord { samples, set, file_id })
}

fn record_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries =
        fs::read_dir(dir).map_err(|source| DatasetError::Io { path: dir.to_path_buf(), source })?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| DatasetError::Io { path: dir.to_path_buf(), source })?;
        let path = entry.path();
        let is_txt = path
            .extension()
            .map(|e| e.eq_ignore_ascii_case("txt"))
            .unwrap_or(false);
        if is_txt && path.is_file() {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

/// Loads every `*.txt` record of `set`, sorted by filename.
///
/// Count or length deviations from the intact corpus are logged as
/// warnings; malformed files are errors.
pub fn load_set(root: &Path, set: BonnSet) -> Result<Vec<EegRecord>> {
    let dir = set
        .locate(root)
        .ok_or_else(|| DatasetError::MissingSetDir { set, root: root.to_path_buf() })?;
    let files = record_files(&dir)?;
    if files.is_empty() {
        return Err(DatasetError::NoRecords { set, dir });
    }
    let records = files
        .iter()
        .map(|f| load_record(f, set))
        .collect::<Result<Vec<_>>>()?;
    if records.len() != EXPECTED_RECORDS {
        warn!("set {set}: expected {EXPECTED_RECORDS} records, found {}", records.len());
    }
    let off: Vec<&EegRecord> = records.iter().filter(|r| r.samples.len() != EXPECTED_SAMPLES).collect();
    if let Some(first) = off.first() {
        warn!(
            "set {set}: {} of {} records are not {EXPECTED_SAMPLES} samples long (e.g. {} has {})",
            off.len(),
            records.len(),
            first.file_id,
            first.samples.len()
        );
    }
    Ok(records)
}

/// Class label; the epileptic member of a pair is always positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    /// -1 / +1 encoding used by margin classifiers.
    pub fn sign(self) -> f64 {
        if self.is_positive() {
            1.0
        } else {
            -1.0
        }
    }
}

/// The six healthy-vs-epileptic pairings evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pair {
    #[serde(rename = "A-C")]
    AC,
    #[serde(rename = "A-D")]
    AD,
    #[serde(rename = "A-E")]
    AE,
    #[serde(rename = "B-C")]
    BC,
    #[serde(rename = "B-D")]
    BD,
    #[serde(rename = "B-E")]
    BE,
}

impl Pair {
    /// Table row order.
    pub const ALL: [Pair; 6] = [Pair::AC, Pair::AD, Pair::AE, Pair::BC, Pair::BD, Pair::BE];

    pub fn healthy(self) -> BonnSet {
        match self {
            Pair::AC | Pair::AD | Pair::AE => BonnSet::A,
            Pair::BC | Pair::BD | Pair::BE => BonnSet::B,
        }
    }

    pub fn epileptic(self) -> BonnSet {
        match self {
            Pair::AC | Pair::BC => BonnSet::C,
            Pair::AD | Pair::BD => BonnSet::D,
            Pair::AE | Pair::BE => BonnSet::E,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Pair::AC => "A-C",
            Pair::AD => "A-D",
            Pair::AE => "A-E",
            Pair::BC => "B-C",
            Pair::BD => "B-D",
            Pair::BE => "B-E",
        }
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pair {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let norm: String = s.trim().to_ascii_uppercase().chars().filter(|c| c.is_ascii_alphabetic()).collect();
        Pair::ALL
            .into_iter()
            .find(|p| p.name().replace('-', "") == norm)
            .ok_or_else(|| format!("unknown pair '{s}' (expected one of A-C, A-D, A-E, B-C, B-D, B-E)"))
    }
}

/// Labeled records of one healthy-vs-epileptic pairing.
#[derive(Debug, Clone)]
pub struct PairDataset {
    pub pair: Pair,
    pub records: Vec<EegRecord>,
    pub labels: Vec<Label>,
}

impl PairDataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|l| l.is_positive()).count()
    }
}

/// Concatenates the healthy records (negative) and epileptic records
/// (positive), preserving order.
pub fn make_pair(healthy: Vec<EegRecord>, epileptic: Vec<EegRecord>, pair: Pair) -> Result<PairDataset> {
    if healthy.is_empty() {
        return Err(DatasetError::EmptyClass("healthy set has no records"));
    }
    if epileptic.is_empty() {
        return Err(DatasetError::EmptyClass("epileptic set has no records"));
    }
    for (records, expected) in [(&healthy, pair.healthy()), (&epileptic, pair.epileptic())] {
        if let Some(r) = records.iter().find(|r| r.set != expected) {
            return Err(DatasetError::SetMismatch {
                file_id: r.file_id.clone(),
                found: r.set,
                expected,
                pair,
            });
        }
    }
    let mut labels = vec![Label::Negative; healthy.len()];
    labels.extend(std::iter::repeat_n(Label::Positive, epileptic.len()));
    let mut records = healthy;
    records.extend(epileptic);
    Ok(PairDataset { pair, records, labels })
}

/// Loads both sets of `pair` from the corpus root.
pub fn load_pair(root: &Path, pair: Pair) -> Result<PairDataset> {
    make_pair(load_set(root, pair.healthy())?, load_set(root, pair.epileptic())?, pair)
}

/// Per-set summary produced by [`verify_corpus`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetSummary {
    pub set: String,
    pub count: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Fatal problem for this set (missing directory, unreadable file).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub root: PathBuf,
    pub sets: Vec<SetSummary>,
}

impl CorpusReport {
    pub fn has_errors(&self) -> bool {
        self.sets.iter().any(|s| s.error.is_some())
    }

    pub fn has_warnings(&self) -> bool {
        self.sets.iter().any(|s| !s.warnings.is_empty())
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("corpus: {}\n", self.root.display());
        for s in &self.sets {
            match &s.error {
                Some(e) => out.push_str(&format!("  {:<4} ERROR {e}\n", s.set)),
                None => out.push_str(&format!(
                    "  {:<4} count={} length={}..{}\n",
                    s.set, s.count, s.min_len, s.max_len
                )),
            }
            for w in &s.warnings {
                out.push_str(&format!("       warning: {w}\n"));
            }
        }
        out
    }
}

/// Counts records and sample lengths for every set. Never fails: problems
/// are recorded in the report.
pub fn verify_corpus(root: &Path) -> CorpusReport {
    let sets = BonnSet::ALL.iter().map(|&set| summarize_set(root, set)).collect();
    CorpusReport { root: root.to_path_buf(), sets }
}

fn summarize_set(root: &Path, set: BonnSet) -> SetSummary {
    let name = set.letter().to_string();
    let fail = |e: DatasetError| SetSummary {
        set: name.clone(),
        count: 0,
        min_len: 0,
        max_len: 0,
        error: Some(e.to_string()),
        warnings: Vec::new(),
    };
    let Some(dir) = set.locate(root) else {
        return fail(DatasetError::MissingSetDir { set, root: root.to_path_buf() });
    };
    let files = match record_files(&dir) {
        Ok(f) => f,
        Err(e) => return fail(e),
    };
    let mut lengths = Vec::with_capacity(files.len());
    for f in &files {
        match load_record(f, set) {
            Ok(r) => lengths.push(r.samples.len()),
            Err(e) => return fail(e),
        }
    }
    let mut warnings = Vec::new();
    if files.len() != EXPECTED_RECORDS {
        warnings.push(format!("expected {EXPECTED_RECORDS}, found {}", files.len()));
    }
    let min_len = lengths.iter().copied().min().unwrap_or(0);
    let max_len = lengths.iter().copied().max().unwrap_or(0);
    if !lengths.is_empty() && (min_len != EXPECTED_SAMPLES || max_len != EXPECTED_SAMPLES) {
        warnings.push(format!(
            "sample lengths {min_len}..{max_len}, expected {EXPECTED_SAMPLES}"
        ));
    }
    SetSummary { set: name, count: files.len(), min_len, max_len, error: None, warnings }
}
