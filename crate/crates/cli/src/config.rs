use serde::Deserialize;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use eegfuse::{ClassifierKind, ExperimentConfig, FitMode, FusionWeights, KernelSpec, MaxMode, Method, Pair};

use crate::CliError;

pub const DATA_ROOT_ENV: &str = "BONN_DATA_ROOT";

/// Pipeline settings accepted by `run`, `sweep`, `roc` and `confusion`.
#[derive(Debug, Args, Default)]
pub struct PipelineArgs {
    /// JSON file with default settings; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Corpus root [default: $BONN_DATA_ROOT]
    #[arg(long)]
    pub data_root: Option<PathBuf>,
    /// Reducer fitting: nested (per training fold) or faithful (whole dataset)
    #[arg(long)]
    pub mode: Option<FitMode>,
    /// Features kept per subband
    #[arg(short = 'L', long = "feature-len")]
    pub feature_len: Option<usize>,
    /// Weight of the approximation-band features
    #[arg(long)]
    pub mu1: Option<f64>,
    /// Weight of the fused detail-band features
    #[arg(long)]
    pub mu2: Option<f64>,
    /// elementwise or by_norm
    #[arg(long)]
    pub max_mode: Option<MaxMode>,
    #[arg(long)]
    pub knn_k: Option<usize>,
    #[arg(long)]
    pub svm_c: Option<f64>,
    /// linear, rbf or rbf:<gamma>
    #[arg(long)]
    pub svm_kernel: Option<KernelSpec>,
    /// Naive Bayes variance floor, relative to the largest feature variance
    #[arg(long)]
    pub nb_var_floor: Option<f64>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Keep at most this many leading coefficients per subband
    #[arg(long)]
    pub subband_width: Option<usize>,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub data_root: Option<PathBuf>,
    pub pair: Option<String>,
    pub pairs: Option<Vec<String>>,
    pub dimred: Option<String>,
    pub dimreds: Option<Vec<String>>,
    pub classifier: Option<String>,
    pub classifiers: Option<Vec<String>>,
    pub mode: Option<String>,
    #[serde(rename = "L")]
    pub feature_len: Option<usize>,
    pub mu1: Option<f64>,
    pub mu2: Option<f64>,
    pub max_mode: Option<String>,
    pub knn_k: Option<usize>,
    pub svm_c: Option<f64>,
    pub svm_kernel: Option<String>,
    pub nb_var_floor: Option<f64>,
    pub folds: Option<usize>,
    pub seed: Option<u64>,
    pub subband_width: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub format: Option<Vec<String>>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }
}

pub fn parse<T: FromStr<Err = E>, E: Display>(field: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|e| CliError::Usage(format!("{field}: {e}")))
}

pub fn parse_opt<T: FromStr<Err = E>, E: Display>(field: &str, v: Option<&String>) -> Result<Option<T>, CliError> {
    v.map(|s| parse(field, s)).transpose()
}

pub fn parse_list<T: FromStr<Err = E>, E: Display>(field: &str, v: Option<&Vec<String>>) -> Result<Option<Vec<T>>, CliError> {
    v.map(|l| l.iter().map(|s| parse(field, s)).collect()).transpose()
}

/// Resolved pipeline settings.
pub struct Resolved {
    pub data_root: PathBuf,
    pub experiment: ExperimentConfig,
    pub file: FileConfig,
}

impl PipelineArgs {
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let file = FileConfig::load(self.config.as_deref())?;
        let mut cfg = ExperimentConfig::default();

        let mode = match self.mode {
            Some(m) => Some(m),
            None => parse_opt("mode", file.mode.as_ref())?,
        };
        if let Some(m) = mode {
            cfg.mode = m;
        }
        if let Some(l) = self.feature_len.or(file.feature_len) {
            cfg.feature_len = l;
        }
        let mu1 = self.mu1.or(file.mu1).unwrap_or(cfg.weights.mu1());
        let mu2 = self.mu2.or(file.mu2).unwrap_or(cfg.weights.mu2());
        cfg.weights = FusionWeights::new(mu1, mu2).map_err(|e| CliError::Usage(e.to_string()))?;
        let max_mode = match self.max_mode {
            Some(m) => Some(m),
            None => parse_opt("max_mode", file.max_mode.as_ref())?,
        };
        if let Some(m) = max_mode {
            cfg.max_mode = m;
        }
        if let Some(k) = self.knn_k.or(file.knn_k) {
            cfg.classifier.knn_k = k;
        }
        if let Some(c) = self.svm_c.or(file.svm_c) {
            cfg.classifier.svm_c = c;
        }
        let kernel = match self.svm_kernel {
            Some(k) => Some(k),
            None => parse_opt("svm_kernel", file.svm_kernel.as_ref())?,
        };
        if let Some(k) = kernel {
            cfg.classifier.svm_kernel = k;
        }
        if let Some(f) = self.nb_var_floor.or(file.nb_var_floor) {
            cfg.classifier.nb_var_floor = f;
        }
        if let Some(f) = self.folds.or(file.folds) {
            cfg.folds = f;
        }
        if let Some(s) = self.seed.or(file.seed) {
            cfg.seed = s;
        }
        cfg.subband_width = self.subband_width.or(file.subband_width);
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;

        let data_root = self
            .data_root
            .clone()
            .or_else(|| file.data_root.clone())
            .or_else(|| std::env::var_os(DATA_ROOT_ENV).map(PathBuf::from))
            .ok_or_else(|| CliError::Usage(format!("no corpus root: pass --data-root or set {DATA_ROOT_ENV}")))?;
        Ok(Resolved { data_root, experiment: cfg, file })
    }
}

pub fn pick<T>(flag: Option<T>, file: Option<T>, what: &str) -> Result<T, CliError> {
    flag.or(file).ok_or_else(|| CliError::Usage(format!("--{what} is required (flag or config file)")))
}

pub fn one_pair(flag: Option<Pair>, file: &FileConfig) -> Result<Pair, CliError> {
    pick(flag, parse_opt("pair", file.pair.as_ref())?, "pair")
}

pub fn one_method(flag: Option<Method>, file: &FileConfig) -> Result<Method, CliError> {
    pick(flag, parse_opt("dimred", file.dimred.as_ref())?, "dimred")
}

pub fn one_classifier(flag: Option<ClassifierKind>, file: &FileConfig) -> Result<ClassifierKind, CliError> {
    pick(flag, parse_opt("classifier", file.classifier.as_ref())?, "classifier")
}
