//! Text renderings of evaluation results: metric tables (CSV and
//! markdown), ROC points, confusion and fold-accuracy dumps, the comparison
//! against published values, and the sweep ranking.

use serde::Serialize;
use std::fmt::Write;

use crate::classify::ClassifierKind;
use crate::dataset::Pair;
use crate::dimred::{FitMode, Method};
use crate::evaluate::{EvalReport, MetricSet, RocCurve, SweepCell, SweepResult};
use crate::reference::{self, PublishedRow};

pub const CSV_HEADER: &str =
    "case,accuracy_pct,sensitivity_pct,specificity_pct,precision_pct,recall_pct,f_measure";

fn pct(m: &MetricSet) -> [f64; 6] {
    [
        100.0 * m.accuracy,
        100.0 * m.sensitivity,
        100.0 * m.specificity,
        100.0 * m.precision,
        100.0 * m.recall,
        m.f_measure,
    ]
}

/// One CSV line per report, four decimals.
pub fn table_csv(rows: &[&EvalReport]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in rows {
        let v = pct(&r.metrics);
        writeln!(
            out,
            "{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}",
            r.manifest.pair, v[0], v[1], v[2], v[3], v[4], v[5]
        )
        .unwrap();
    }
    out
}

/// Markdown mirror of [`table_csv`] rounded to two decimals, with the mean
/// of per-fold accuracies as an extra column.
pub fn table_markdown(title: &str, rows: &[&EvalReport]) -> String {
    let mut out = format!("### {title}\n\n");
    out.push_str("| Case | Accuracy (%) | Sensitivity (%) | Specificity (%) | Precision (%) | Recall (%) | F-measure | Fold-mean accuracy (%) |\n");
    out.push_str("|---|---|---|---|---|---|---|---|\n");
    for r in rows {
        let v = pct(&r.metrics);
        writeln!(
            out,
            "| {} | {:.2} | {:.2} | {:.2} | {:.2} | {:.2} | {:.2} | {:.2} |",
            r.manifest.pair,
            v[0],
            v[1],
            v[2],
            v[3],
            v[4],
            v[5],
            100.0 * r.fold_mean_accuracy
        )
        .unwrap();
    }
    out
}

pub fn table_title(method: Method, classifier: ClassifierKind, mode: FitMode) -> String {
    format!("{method} + {classifier} ({mode})")
}

pub fn roc_csv(roc: &RocCurve) -> String {
    let mut out = String::from("fpr,tpr\n");
    for (x, y) in &roc.points {
        writeln!(out, "{x:.6},{y:.6}").unwrap();
    }
    out
}

/// Per-fold confusion counts followed by the pooled row.
pub fn confusion_csv(report: &EvalReport) -> String {
    let mut out = String::from("fold,tp,fp,fn,tn\n");
    for f in &report.folds {
        let c = f.confusion;
        writeln!(out, "{},{},{},{},{}", f.fold + 1, c.tp, c.fp, c.fn_, c.tn).unwrap();
    }
    let c = report.pooled;
    writeln!(out, "pooled,{},{},{},{}", c.tp, c.fp, c.fn_, c.tn).unwrap();
    out
}

pub fn fold_accuracy_csv(report: &EvalReport) -> String {
    let mut out = String::from("fold,accuracy_pct\n");
    for f in &report.folds {
        writeln!(out, "{},{:.4}", f.fold + 1, 100.0 * f.metrics.accuracy).unwrap();
    }
    out
}

/// Checks that every row's F-measure, rounded to two decimals, matches the
/// value implied by its own precision and recall columns. Returns the
/// offending cases.
pub fn f_consistency_failures(rows: &[&EvalReport]) -> Vec<Pair> {
    rows.iter()
        .filter(|r| {
            let v = pct(&r.metrics);
            let printed = (v[5] * 100.0).round() / 100.0;
            !reference::f_consistent(v[3], v[4], printed, 0.01)
        })
        .map(|r| r.manifest.pair)
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub dimred: Method,
    pub classifier: ClassifierKind,
    pub pair: Pair,
    /// Regenerated values (percent, F as fraction); `None` if the run failed.
    pub ours: Option<[f64; 6]>,
    pub published: [f64; 6],
    pub delta: Option<[f64; 6]>,
    pub published_f_consistent: bool,
    pub note: String,
}

fn published_array(p: &PublishedRow) -> [f64; 6] {
    [p.accuracy, p.sensitivity, p.specificity, p.precision, p.recall, p.f_measure]
}

/// Row-by-row deviations from the published values. If `other_mode` holds
/// the same grid run under the other fit mode, perfect scores that appear
/// only under faithful fitting are flagged.
pub fn comparison(sweep: &SweepResult, other_mode: Option<&SweepResult>) -> Vec<ComparisonRow> {
    sweep
        .cells
        .iter()
        .map(|cell| {
            let published = published_array(&reference::published(cell.method, cell.classifier, cell.pair));
            let ours = cell.outcome.as_ref().ok().map(|r| pct(&r.metrics));
            let delta = ours.map(|o| std::array::from_fn(|i| o[i] - published[i]));
            let mut notes = Vec::new();
            if let Err(e) = &cell.outcome {
                notes.push(format!("run failed: {e}"));
            }
            if let Some(n) = leakage_note(cell, other_mode) {
                notes.push(n);
            }
            if published[0] >= 100.0 {
                notes.push("published 100% accuracy".into());
            }
            ComparisonRow {
                dimred: cell.method,
                classifier: cell.classifier,
                pair: cell.pair,
                ours,
                published,
                delta,
                published_f_consistent: reference::f_consistent(published[3], published[4], published[5], 0.01),
                note: notes.join("; "),
            }
        })
        .collect()
}

fn leakage_note(cell: &SweepCell, other: Option<&SweepResult>) -> Option<String> {
    let ours = cell.outcome.as_ref().ok()?;
    let twin = other?.get(cell.method, cell.classifier, cell.pair)?.outcome.as_ref().ok()?;
    let (faithful, nested) = match ours.manifest.mode {
        FitMode::Faithful => (ours, twin),
        FitMode::Nested => (twin, ours),
    };
    (faithful.metrics.accuracy >= 1.0 && nested.metrics.accuracy < 1.0).then(|| {
        format!(
            "consistent with leakage: 100% only when reducers see test folds (nested {:.2}%)",
            100.0 * nested.metrics.accuracy
        )
    })
}

const METRIC_NAMES: [&str; 6] = ["accuracy", "sensitivity", "specificity", "precision", "recall", "f_measure"];

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("dimred,classifier,case");
    for prefix in ["ours", "published", "delta"] {
        for m in METRIC_NAMES {
            write!(out, ",{prefix}_{m}").unwrap();
        }
    }
    out.push_str(",published_f_consistent,note\n");
    let cells = |v: Option<[f64; 6]>| match v {
        Some(v) => v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(","),
        None => [""; 6].join(","),
    };
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},\"{}\"",
            r.dimred,
            r.classifier,
            r.pair,
            cells(r.ours),
            cells(Some(r.published)),
            cells(r.delta),
            r.published_f_consistent,
            r.note.replace('"', "'")
        )
        .unwrap();
    }
    out
}

pub fn comparison_markdown(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("| Dimred | Classifier | Case | Accuracy ours | Accuracy published | Delta | F ours | F published | Note |\n");
    out.push_str("|---|---|---|---|---|---|---|---|---|\n");
    for r in rows {
        let (acc, f, d) = match (r.ours, r.delta) {
            (Some(o), Some(d)) => (format!("{:.2}", o[0]), format!("{:.2}", o[5]), format!("{:+.2}", d[0])),
            _ => ("-".into(), "-".into(), "-".into()),
        };
        writeln!(
            out,
            "| {} | {} | {} | {acc} | {:.2} | {d} | {f} | {:.2} | {} |",
            r.dimred, r.classifier, r.pair, r.published[0], r.published[5], r.note
        )
        .unwrap();
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct RankEntry {
    pub dimred: Method,
    pub classifier: ClassifierKind,
    /// Mean pooled accuracy over the pairs that ran.
    pub mean_accuracy: f64,
    pub pairs: usize,
    pub failures: usize,
}

/// Combinations ordered by mean pooled accuracy, best first. Ties keep
/// the sweep order.
pub fn ranking(sweep: &SweepResult) -> Vec<RankEntry> {
    let mut combos: Vec<(Method, ClassifierKind)> = Vec::new();
    for c in &sweep.cells {
        if !combos.contains(&(c.method, c.classifier)) {
            combos.push((c.method, c.classifier));
        }
    }
    let mut entries: Vec<RankEntry> = combos
        .into_iter()
        .map(|(m, k)| {
            let cells = sweep.table(m, k);
            let ok: Vec<f64> = cells.iter().filter_map(|c| c.outcome.as_ref().ok()).map(|r| r.metrics.accuracy).collect();
            let mean = if ok.is_empty() { 0.0 } else { ok.iter().sum::<f64>() / ok.len() as f64 };
            RankEntry { dimred: m, classifier: k, mean_accuracy: mean, pairs: ok.len(), failures: cells.len() - ok.len() }
        })
        .collect();
    entries.sort_by(|a, b| b.mean_accuracy.total_cmp(&a.mean_accuracy));
    entries
}

pub fn ranking_markdown(entries: &[RankEntry]) -> String {
    let mut out = String::from("| Rank | Dimred | Classifier | Mean pooled accuracy (%) | Pairs | Failures |\n|---|---|---|---|---|---|\n");
    for (i, e) in entries.iter().enumerate() {
        writeln!(
            out,
            "| {} | {} | {} | {:.2} | {} | {} |",
            i + 1,
            e.dimred,
            e.classifier,
            100.0 * e.mean_accuracy,
            e.pairs,
            e.failures
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluate::{ConfusionMatrix, ExperimentConfig, FoldResult, RunManifest};

    fn report(pair: Pair, cm: ConfusionMatrix) -> EvalReport {
        let metrics = crate::evaluate::metrics(&cm).unwrap();
        EvalReport {
            manifest: RunManifest::new(pair, Method::Pca, ClassifierKind::Nb, &ExperimentConfig::default(), cm.total()),
            folds: vec![FoldResult { fold: 0, test_size: cm.total(), confusion: cm, metrics: metrics.clone() }],
            pooled: cm,
            fold_mean_accuracy: metrics.accuracy,
            metrics,
            roc: RocCurve { points: vec![(0.0, 0.0), (0.25, 1.0), (1.0, 1.0)], auc: 0.875 },
            feature_dim: 8,
            warnings: vec![],
        }
    }

    #[test]
    fn csv_layout() {
        let r = report(Pair::AE, ConfusionMatrix { tp: 90, fp: 5, fn_: 10, tn: 95 });
        let csv = table_csv(&[&r]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.next(), Some("A-E,92.5000,90.0000,95.0000,94.7368,90.0000,0.9231"));
        assert!(lines.next().is_none());
    }

    #[test]
    fn markdown_rounds_to_two() {
        let r = report(Pair::BC, ConfusionMatrix { tp: 90, fp: 5, fn_: 10, tn: 95 });
        let md = table_markdown("PCA + NB", &[&r]);
        assert!(md.contains("| B-C | 92.50 | 90.00 | 95.00 | 94.74 | 90.00 | 0.92 | 92.50 |"), "{md}");
    }

    #[test]
    fn dumps() {
        let r = report(Pair::AE, ConfusionMatrix { tp: 3, fp: 1, fn_: 2, tn: 4 });
        assert_eq!(roc_csv(&r.roc), "fpr,tpr\n0.000000,0.000000\n0.250000,1.000000\n1.000000,1.000000\n");
        assert_eq!(confusion_csv(&r), "fold,tp,fp,fn,tn\n1,3,1,2,4\npooled,3,1,2,4\n");
        assert_eq!(fold_accuracy_csv(&r), "fold,accuracy_pct\n1,70.0000\n");
    }

    #[test]
    fn regenerated_rows_are_f_consistent() {
        let rows: Vec<EvalReport> = [(1, 0, 9, 10), (7, 3, 3, 7), (10, 0, 0, 10), (0, 0, 10, 10)]
            .into_iter()
            .map(|(tp, fp, fn_, tn)| report(Pair::AC, ConfusionMatrix { tp, fp, fn_, tn }))
            .collect();
        let refs: Vec<&EvalReport> = rows.iter().collect();
        assert!(f_consistency_failures(&refs).is_empty());
    }
}
