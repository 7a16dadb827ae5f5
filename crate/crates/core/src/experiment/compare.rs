//! Side-by-side comparison of reports that share a dataset and classifier.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::metrics::relative_improvement;

use super::report::ExperimentReport;

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub metric: String,
    /// One value per report, in column order.
    pub values: Vec<f64>,
    /// Relative improvement (percent) of each non-baseline column over the
    /// baseline; `None` when the baseline value is zero.
    pub improvement: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub dataset: String,
    pub classifier: String,
    pub columns: Vec<String>,
    pub baseline: usize,
    pub rows: Vec<ComparisonRow>,
}

/// Builds a comparison. The baseline is the first report run without
/// feature selection, or the first report when there is none.
pub fn compare(reports: &[ExperimentReport]) -> Result<Comparison> {
    let first = reports.first().ok_or_else(|| Error::Incomparable("no reports given".into()))?;
    let dataset = first.dataset_name();
    let classifier = first.classifier_kind();
    for r in reports {
        if r.dataset_name() != dataset {
            return Err(Error::Incomparable(format!(
                "dataset `{}` differs from `{dataset}`",
                r.dataset_name()
            )));
        }
        if r.classifier_kind() != classifier {
            return Err(Error::Incomparable(format!(
                "classifier `{}` differs from `{classifier}`",
                r.classifier_kind()
            )));
        }
    }
    let baseline = reports.iter().position(|r| r.optimizer_kind() == "none").unwrap_or(0);

    let mut columns: Vec<String> = Vec::new();
    for r in reports {
        let base = r.optimizer_kind().to_string();
        let mut name = base.clone();
        let mut n = 2;
        while columns.contains(&name) {
            name = format!("{base}#{n}");
            n += 1;
        }
        columns.push(name);
    }

    type Extract = fn(&ExperimentReport) -> f64;
    let extract: [(&str, Extract); 7] = [
        ("accuracy", |r| r.metrics.accuracy),
        ("precision", |r| r.metrics.scores.macro_precision),
        ("recall", |r| r.metrics.scores.macro_recall),
        ("f1", |r| r.metrics.scores.macro_f1),
        ("features", |r| r.features_after as f64),
        ("train_seconds", |r| r.wall_times.train_seconds),
        ("test_seconds", |r| r.wall_times.test_seconds),
    ];
    let rows = extract
        .iter()
        .map(|(metric, f)| {
            let values: Vec<f64> = reports.iter().map(f).collect();
            let improvement = values
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != baseline)
                .map(|(_, &v)| relative_improvement(v, values[baseline]).ok())
                .collect();
            ComparisonRow {
                metric: metric.to_string(),
                values,
                improvement,
            }
        })
        .collect();

    Ok(Comparison {
        dataset,
        classifier: classifier.to_string(),
        columns,
        baseline,
        rows,
    })
}

impl Comparison {
    fn header(&self) -> Vec<String> {
        let mut h = vec!["metric".to_string()];
        h.extend(self.columns.iter().cloned());
        for (i, c) in self.columns.iter().enumerate() {
            if i != self.baseline {
                h.push(format!("ri_{c}_pct"));
            }
        }
        h
    }

    fn cells(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|row| {
                let mut cells = vec![row.metric.clone()];
                cells.extend(row.values.iter().map(|v| format!("{v:.6}")));
                cells.extend(row.improvement.iter().map(|ri| match ri {
                    Some(v) => format!("{v:+.4}"),
                    None => "n/a".to_string(),
                }));
                cells
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for row in self.cells() {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_table(&self) -> String {
        let header = self.header();
        let cells = self.cells();
        let widths: Vec<usize> = (0..header.len())
            .map(|j| cells.iter().map(|r| r[j].len()).chain([header[j].len()]).max().unwrap_or(0))
            .collect();
        let mut out = format!(
            "dataset: {}  classifier: {}  baseline: {}\n",
            self.dataset, self.classifier, self.columns[self.baseline]
        );
        for row in std::iter::once(&header).chain(cells.iter()) {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(j, (c, &w))| if j == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        out
    }
}
