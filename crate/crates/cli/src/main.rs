//! `eegfuse` command-line tool.
//!
//! Exit codes: 0 success, 1 finished with warnings, 2 usage or
//! configuration error (or an unusable corpus in `verify`), 3 runtime
//! failure.

mod config;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use eegfuse::dataset::{self, load_pair};
use eegfuse::dwt::decompose5;
use eegfuse::evaluate::{self, EvalReport, SweepResult};
use eegfuse::report;
use eegfuse::{ClassifierKind, ExperimentConfig, FitMode, Method, Pair};

use config::{parse_list, PipelineArgs, Resolved};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

fn runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Clone, Copy)]
enum Outcome {
    Clean,
    Warnings,
}

#[derive(Parser)]
#[command(name = "eegfuse", version, about = "Wavelet-fusion seizure detection on the Bonn EEG corpus")]
struct Cli {
    /// More logging (-v info, -vv debug)
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that the corpus is complete and well formed
    Verify {
        /// Corpus root [default: $BONN_DATA_ROOT]
        #[arg(long)]
        data_root: Option<PathBuf>,
        /// Print the report as JSON
        #[arg(long)]
        json: bool,
    },
    /// Cross-validate one reducer/classifier on one pair
    Run(RunArgs),
    /// Every reducer x classifier on every pair
    Sweep(SweepArgs),
    /// ROC points of one run as `fpr,tpr` CSV
    Roc(DumpArgs),
    /// Per-fold confusion counts of one run
    Confusion(DumpArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Md,
    Json,
}

#[derive(Args)]
struct Selection {
    /// A-C, A-D, A-E, B-C, B-D or B-E
    #[arg(long)]
    pair: Option<Pair>,
    /// pca, ica or lda
    #[arg(long)]
    dimred: Option<Method>,
    /// knn, svm or nb
    #[arg(long)]
    classifier: Option<ClassifierKind>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    select: Selection,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Table formats to write
    #[arg(long, value_enum, value_delimiter = ',')]
    format: Vec<Format>,
    /// Also write the ROC points
    #[arg(long)]
    roc: bool,
    /// Also write per-fold confusion counts and accuracies
    #[arg(long)]
    confusion: bool,
    /// Write every record's subband coefficients as CSV into this directory
    #[arg(long)]
    dump_subbands: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Pairs to include [default: all six]
    #[arg(long, value_delimiter = ',')]
    pairs: Vec<Pair>,
    #[arg(long, value_delimiter = ',')]
    dimreds: Vec<Method>,
    #[arg(long, value_delimiter = ',')]
    classifiers: Vec<ClassifierKind>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',')]
    format: Vec<Format>,
    /// Also run the other fit mode and flag perfect scores that only
    /// appear with faithful fitting
    #[arg(long)]
    compare_modes: bool,
}

#[derive(Args)]
struct DumpArgs {
    #[command(flatten)]
    select: Selection,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Write to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    let result = match cli.command {
        Command::Verify { data_root, json } => cmd_verify(data_root, json),
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Roc(a) => cmd_dump(a, DumpKind::Roc),
        Command::Confusion(a) => cmd_dump(a, DumpKind::Confusion),
    };
    match result {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::Warnings) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn cmd_verify(data_root: Option<PathBuf>, json: bool) -> Result<Outcome, CliError> {
    let root = data_root
        .or_else(|| std::env::var_os(config::DATA_ROOT_ENV).map(PathBuf::from))
        .ok_or_else(|| CliError::Usage(format!("no corpus root: pass --data-root or set {}", config::DATA_ROOT_ENV)))?;
    let rep = dataset::verify_corpus(&root);
    if json {
        println!("{}", serde_json::to_string_pretty(&rep).map_err(runtime)?);
    } else {
        print!("{}", rep.render_text());
    }
    if rep.has_errors() {
        let bad: Vec<&str> = rep.sets.iter().filter(|s| s.error.is_some()).map(|s| s.set.as_str()).collect();
        return Err(CliError::Usage(format!("corpus unusable (sets {})", bad.join(", "))));
    }
    Ok(if rep.has_warnings() { Outcome::Warnings } else { Outcome::Clean })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(runtime)
}

fn stem(method: Method, kind: ClassifierKind) -> String {
    format!("{}_{}", method.to_string().to_lowercase(), kind.name())
}

fn formats(flag: &[Format], resolved: &Resolved) -> Result<Vec<Format>, CliError> {
    if !flag.is_empty() {
        return Ok(flag.to_vec());
    }
    match &resolved.file.format {
        Some(list) => list
            .iter()
            .map(|s| Format::from_str(s, true).map_err(|e| CliError::Usage(format!("format: {e}"))))
            .collect(),
        None => Ok(vec![Format::Csv, Format::Md]),
    }
}

fn out_dir(flag: Option<PathBuf>, resolved: &Resolved) -> PathBuf {
    flag.or_else(|| resolved.file.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"))
}

#[derive(Serialize)]
struct RunManifestFile<'a> {
    config: &'a ExperimentConfig,
    runs: Vec<&'a evaluate::RunManifest>,
    warnings: Vec<String>,
}

fn single_run(select: &Selection, pipeline: &PipelineArgs) -> Result<(Resolved, EvalReport, dataset::PairDataset), CliError> {
    let resolved = pipeline.resolve()?;
    let pair = config::one_pair(select.pair, &resolved.file)?;
    let method = config::one_method(select.dimred, &resolved.file)?;
    let kind = config::one_classifier(select.classifier, &resolved.file)?;
    let data = load_pair(&resolved.data_root, pair).map_err(runtime)?;
    let rep = evaluate::run_experiment(&data, method, kind, &resolved.experiment).map_err(runtime)?;
    for w in &rep.warnings {
        log::warn!("{w}");
    }
    Ok((resolved, rep, data))
}

fn cmd_run(a: RunArgs) -> Result<Outcome, CliError> {
    let (resolved, rep, data) = single_run(&a.select, &a.pipeline)?;
    let out = out_dir(a.out.clone(), &resolved);
    let m = &rep.manifest;
    let name = format!("{}_{}", stem(m.dimred, m.classifier), m.pair);
    for f in formats(&a.format, &resolved)? {
        let (ext, body) = match f {
            Format::Csv => ("csv", report::table_csv(&[&rep])),
            Format::Md => ("md", report::table_markdown(&report::table_title(m.dimred, m.classifier, m.mode), &[&rep])),
            Format::Json => ("json", to_json(&rep)?),
        };
        write_file(&out.join(format!("{name}.{ext}")), &body)?;
    }
    if a.roc {
        write_file(&out.join(format!("{name}_roc.csv")), &report::roc_csv(&rep.roc))?;
    }
    if a.confusion {
        write_file(&out.join(format!("{name}_confusion.csv")), &report::confusion_csv(&rep))?;
        write_file(&out.join(format!("{name}_folds.csv")), &report::fold_accuracy_csv(&rep))?;
    }
    if let Some(dir) = &a.dump_subbands {
        dump_subbands(dir, &data)?;
    }
    let manifest = RunManifestFile { config: &resolved.experiment, runs: vec![m], warnings: rep.warnings.clone() };
    write_file(&out.join("manifest.json"), &to_json(&manifest)?)?;
    print!("{}", report::table_csv(&[&rep]));
    Ok(if rep.warnings.is_empty() { Outcome::Clean } else { Outcome::Warnings })
}

fn dump_subbands(dir: &Path, data: &dataset::PairDataset) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(runtime)?;
    for r in &data.records {
        let bands = decompose5(&r.samples).map_err(|e| CliError::Runtime(format!("{}: {e}", r.file_id)))?;
        let mut buf = Vec::new();
        bands.write_csv(&mut buf).map_err(runtime)?;
        let path = dir.join(format!("{}_{}.csv", r.set.letter(), r.file_id));
        fs::File::create(&path).and_then(|mut f| f.write_all(&buf)).map_err(runtime)?;
    }
    Ok(())
}

enum DumpKind {
    Roc,
    Confusion,
}

fn cmd_dump(a: DumpArgs, kind: DumpKind) -> Result<Outcome, CliError> {
    let (_, rep, _) = single_run(&a.select, &a.pipeline)?;
    let body = match kind {
        DumpKind::Roc => report::roc_csv(&rep.roc),
        DumpKind::Confusion => report::confusion_csv(&rep),
    };
    match &a.out {
        Some(path) => write_file(path, &body)?,
        None => print!("{body}"),
    }
    if let DumpKind::Roc = kind {
        eprintln!("auc = {:.4}", rep.roc.auc);
    }
    Ok(if rep.warnings.is_empty() { Outcome::Clean } else { Outcome::Warnings })
}

#[derive(Serialize)]
struct SweepManifest<'a> {
    config: &'a ExperimentConfig,
    pairs: &'a [Pair],
    dimreds: &'a [Method],
    classifiers: &'a [ClassifierKind],
    runs: Vec<&'a evaluate::RunManifest>,
    failures: Vec<String>,
    warnings: usize,
}

fn cmd_sweep(a: SweepArgs) -> Result<Outcome, CliError> {
    let resolved = a.pipeline.resolve()?;
    let file = &resolved.file;
    let pairs = choose(&a.pairs, parse_list("pairs", file.pairs.as_ref())?, &Pair::ALL);
    let methods = choose(&a.dimreds, parse_list("dimreds", file.dimreds.as_ref())?, &Method::ALL);
    let kinds = choose(&a.classifiers, parse_list("classifiers", file.classifiers.as_ref())?, &ClassifierKind::ALL);
    let out = out_dir(a.out.clone(), &resolved);
    let fmts = formats(&a.format, &resolved)?;

    let datasets = pairs
        .iter()
        .map(|&p| load_pair(&resolved.data_root, p))
        .collect::<Result<Vec<_>, _>>()
        .map_err(runtime)?;
    let cfg = &resolved.experiment;
    let result = evaluate::sweep(&datasets, &methods, &kinds, cfg).map_err(runtime)?;
    let other = if a.compare_modes {
        let mode = match cfg.mode {
            FitMode::Nested => FitMode::Faithful,
            FitMode::Faithful => FitMode::Nested,
        };
        let other_cfg = ExperimentConfig { mode, ..cfg.clone() };
        let r = evaluate::sweep(&datasets, &methods, &kinds, &other_cfg).map_err(runtime)?;
        write_tables(&out.join(mode.to_string()), &r, &methods, &kinds, &fmts)?;
        Some(r)
    } else {
        None
    };

    write_tables(&out, &result, &methods, &kinds, &fmts)?;
    let rows = report::comparison(&result, other.as_ref());
    write_file(&out.join("comparison.csv"), &report::comparison_csv(&rows))?;
    write_file(&out.join("comparison.md"), &report::comparison_markdown(&rows))?;
    let ranking = report::ranking(&result);
    write_file(&out.join("summary.json"), &to_json(&ranking)?)?;

    let mut summary = format!("## Ranking ({})\n\n{}\n", cfg.mode, report::ranking_markdown(&ranking));
    for &m in &methods {
        for &k in &kinds {
            let reps = ok_reports(&result, m, k);
            summary.push_str(&report::table_markdown(&report::table_title(m, k, cfg.mode), &reps));
            summary.push('\n');
        }
    }
    write_file(&out.join("summary.md"), &summary)?;

    let failures: Vec<String> = result
        .failures()
        .map(|c| format!("{} {} {}: {}", c.method, c.classifier, c.pair, c.outcome.as_ref().unwrap_err()))
        .collect();
    let warnings: usize = result.cells.iter().filter_map(|c| c.outcome.as_ref().ok()).map(|r| r.warnings.len()).sum();
    let manifest = SweepManifest {
        config: cfg,
        pairs: &pairs,
        dimreds: &methods,
        classifiers: &kinds,
        runs: result.cells.iter().filter_map(|c| c.outcome.as_ref().ok()).map(|r| &r.manifest).collect(),
        failures: failures.clone(),
        warnings,
    };
    write_file(&out.join("manifest.json"), &to_json(&manifest)?)?;

    print!("{}", report::ranking_markdown(&ranking));
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("failed: {f}");
        }
        return Err(CliError::Runtime(format!("{} of {} runs failed", failures.len(), result.cells.len())));
    }
    if warnings > 0 {
        log::warn!("{warnings} warnings across the sweep; see the JSON reports");
        return Ok(Outcome::Warnings);
    }
    Ok(Outcome::Clean)
}

fn choose<T: Copy>(flag: &[T], file: Option<Vec<T>>, all: &[T]) -> Vec<T> {
    if !flag.is_empty() {
        flag.to_vec()
    } else {
        file.unwrap_or_else(|| all.to_vec())
    }
}

fn ok_reports(result: &SweepResult, m: Method, k: ClassifierKind) -> Vec<&EvalReport> {
    result.table(m, k).into_iter().filter_map(|c| c.outcome.as_ref().ok()).collect()
}

fn write_tables(
    out: &Path,
    result: &SweepResult,
    methods: &[Method],
    kinds: &[ClassifierKind],
    fmts: &[Format],
) -> Result<(), CliError> {
    let mut folds = String::from("dimred,classifier,case,fold,accuracy_pct\n");
    let mut roc = String::from("dimred,classifier,case,fpr,tpr\n");
    for &m in methods {
        for &k in kinds {
            let reps = ok_reports(result, m, k);
            let name = stem(m, k);
            for f in fmts {
                let (ext, body) = match f {
                    Format::Csv => ("csv", report::table_csv(&reps)),
                    Format::Md => {
                        let mode = reps.first().map_or(FitMode::Nested, |r| r.manifest.mode);
                        ("md", report::table_markdown(&report::table_title(m, k, mode), &reps))
                    }
                    Format::Json => ("json", to_json(&reps)?),
                };
                write_file(&out.join(format!("{name}.{ext}")), &body)?;
            }
            for r in &reps {
                for f in &r.folds {
                    folds.push_str(&format!("{m},{k},{},{},{:.4}\n", r.manifest.pair, f.fold + 1, 100.0 * f.metrics.accuracy));
                }
                for (x, y) in &r.roc.points {
                    roc.push_str(&format!("{m},{k},{},{x:.6},{y:.6}\n", r.manifest.pair));
                }
            }
        }
    }
    write_file(&out.join("fold_accuracy.csv"), &folds)?;
    write_file(&out.join("roc.csv"), &roc)
}
