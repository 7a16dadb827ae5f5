//! Experiment reports as line-oriented `key: value` text.
//!
//! The `[canonical]` section holds everything that is a pure function of
//! the configuration and is hashed into `[hash]`; wall-clock times live in
//! `[timing]` and are excluded from the hash. Rates are printed with six
//! decimals; lists, the config echo, the confusion matrix and the fitness
//! trace are JSON so they parse back exactly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fitness::FeatureMask;
use crate::metrics::{ConfusionMatrix, MetricReport};

use super::config::ExperimentConfig;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

const HEADER: &str = "# hyids experiment report";

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WallTimes {
    pub selection_seconds: f64,
    pub train_seconds: f64,
    pub test_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub tool_version: String,
    pub seed: u64,
    pub raw_attribute_count: usize,
    pub features_before: usize,
    pub features_after: usize,
    pub selected_mask: FeatureMask,
    pub selected_features: Vec<String>,
    pub class_names: Vec<String>,
    pub train_rows: usize,
    pub test_rows: usize,
    pub metrics: MetricReport,
    pub confusion: ConfusionMatrix,
    pub fitness_trace: Vec<f64>,
    pub fitness_evaluations: usize,
    pub best_fitness: Option<f64>,
    pub wall_times: WallTimes,
}

impl ExperimentReport {
    pub fn dataset_name(&self) -> String {
        self.config.dataset.display_name()
    }

    pub fn classifier_kind(&self) -> &'static str {
        self.config.classifier.kind()
    }

    pub fn optimizer_kind(&self) -> &'static str {
        self.config.optimizer.kind()
    }

    /// Equality on every field except wall-clock times.
    pub fn eq_ignoring_times(&self, other: &Self) -> bool {
        let strip = |r: &Self| {
            let mut r = r.clone();
            r.wall_times = WallTimes::default();
            r.metrics.train_seconds = 0.0;
            r.metrics.test_seconds = 0.0;
            r
        };
        strip(self) == strip(other)
    }

    /// Canonical section text, without the section marker.
    pub fn canonical_text(&self) -> String {
        let m = &self.metrics;
        let s = &m.scores;
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k}: {v}");
        };
        line("tool_version", self.tool_version.clone());
        line("seed", self.seed.to_string());
        line("dataset", self.dataset_name());
        line("classifier", self.classifier_kind().into());
        line("optimizer", self.optimizer_kind().into());
        line("config", json(&self.config));
        line("raw_attribute_count", self.raw_attribute_count.to_string());
        line("features_before", self.features_before.to_string());
        line("features_after", self.features_after.to_string());
        line("selected_mask", self.selected_mask.to_bit_string());
        line("selected_features", json(&self.selected_features));
        line("class_names", json(&self.class_names));
        line("train_rows", self.train_rows.to_string());
        line("test_rows", self.test_rows.to_string());
        line("accuracy", rate(m.accuracy));
        line("macro_precision", rate(s.macro_precision));
        line("macro_recall", rate(s.macro_recall));
        line("macro_f1", rate(s.macro_f1));
        line("weighted_precision", rate(s.weighted_precision));
        line("weighted_recall", rate(s.weighted_recall));
        line("weighted_f1", rate(s.weighted_f1));
        line("precision", rates(&s.precision));
        line("recall", rates(&s.recall));
        line("f1", rates(&s.f1));
        line("confusion", json(&self.confusion.rows()));
        line("fitness_evaluations", self.fitness_evaluations.to_string());
        line("best_fitness", json(&self.best_fitness));
        line("fitness_trace", json(&self.fitness_trace));
        out
    }

    pub fn canonical_hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_text().as_bytes()))
    }

    pub fn to_text(&self) -> String {
        let t = &self.wall_times;
        format!(
            "{HEADER}\n[canonical]\n{}[hash]\ncanonical_sha256: {}\n[timing]\nselection_seconds: {:.6}\ntrain_seconds: {:.6}\ntest_seconds: {:.6}\n",
            self.canonical_text(),
            self.canonical_hash(),
            t.selection_seconds,
            t.train_seconds,
            t.test_seconds,
        )
    }
}

fn json<T: Serialize + ?Sized>(v: &T) -> String {
    serde_json::to_string(v).expect("report values serialize")
}

fn rate(v: f64) -> String {
    format!("{v:.6}")
}

fn rates(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|&x| rate(x)).collect();
    format!("[{}]", items.join(", "))
}

/// Curve file written next to a report.
pub fn curve_path(report_path: &Path) -> PathBuf {
    report_path.with_extension("curve.csv")
}

pub fn write_curve(trace: &[f64], path: &Path) -> Result<()> {
    let mut text = String::from("iteration,best_fitness\n");
    for (i, v) in trace.iter().enumerate() {
        let _ = writeln!(text, "{i},{v}");
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes the report and, when there is a fitness trace, its curve CSV.
pub fn emit_report(report: &ExperimentReport, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, report.to_text()).map_err(|e| Error::io(path, e))?;
    if !report.fitness_trace.is_empty() {
        write_curve(&report.fitness_trace, &curve_path(path))?;
    }
    Ok(())
}

struct Fields {
    entries: Vec<(usize, String, String)>,
}

impl Fields {
    fn raw(&self, key: &str) -> Result<(usize, &str)> {
        self.entries
            .iter()
            .find(|(_, k, _)| k == key)
            .map(|(l, _, v)| (*l, v.as_str()))
            .ok_or_else(|| Error::ReportParse {
                line: 0,
                reason: format!("missing field `{key}`"),
            })
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let (line, v) = self.raw(key)?;
        v.parse().map_err(|e: T::Err| Error::ReportParse {
            line,
            reason: format!("{key}: {e}"),
        })
    }

    fn json<T: DeserializeOwned>(&self, key: &str) -> Result<T> {
        let (line, v) = self.raw(key)?;
        serde_json::from_str(v).map_err(|e| Error::ReportParse {
            line,
            reason: format!("{key}: {e}"),
        })
    }
}

/// Parses report text. Metrics are recomputed from the confusion matrix and
/// must agree with the printed rates; the canonical hash must match.
pub fn parse_report(text: &str) -> Result<ExperimentReport> {
    let mut section = "";
    let mut canonical = String::new();
    let mut fields = Fields { entries: Vec::new() };
    let mut hash = None;
    let mut timing = Fields { entries: Vec::new() };
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            section = match line {
                "[canonical]" => "canonical",
                "[hash]" => "hash",
                "[timing]" => "timing",
                other => {
                    return Err(Error::ReportParse {
                        line: lineno,
                        reason: format!("unknown section {other}"),
                    })
                }
            };
            continue;
        }
        let (k, v) = line.split_once(": ").ok_or_else(|| Error::ReportParse {
            line: lineno,
            reason: "expected `key: value`".into(),
        })?;
        match section {
            "canonical" => {
                canonical.push_str(line);
                canonical.push('\n');
                fields.entries.push((lineno, k.to_string(), v.to_string()));
            }
            "hash" if k == "canonical_sha256" => hash = Some(v.to_string()),
            "timing" => timing.entries.push((lineno, k.to_string(), v.to_string())),
            _ => {
                return Err(Error::ReportParse {
                    line: lineno,
                    reason: format!("unexpected field `{k}`"),
                })
            }
        }
    }

    let confusion = ConfusionMatrix::from_counts(&fields.json::<Vec<Vec<u64>>>("confusion")?)?;
    let wall_times = WallTimes {
        selection_seconds: timing.get("selection_seconds")?,
        train_seconds: timing.get("train_seconds")?,
        test_seconds: timing.get("test_seconds")?,
    };
    let metrics = MetricReport::from_confusion(&confusion, wall_times.train_seconds, wall_times.test_seconds)?;
    let report = ExperimentReport {
        config: fields.json("config")?,
        tool_version: fields.get("tool_version")?,
        seed: fields.get("seed")?,
        raw_attribute_count: fields.get("raw_attribute_count")?,
        features_before: fields.get("features_before")?,
        features_after: fields.get("features_after")?,
        selected_mask: FeatureMask::from_bit_string(fields.raw("selected_mask")?.1)?,
        selected_features: fields.json("selected_features")?,
        class_names: fields.json("class_names")?,
        train_rows: fields.get("train_rows")?,
        test_rows: fields.get("test_rows")?,
        metrics,
        confusion,
        fitness_trace: fields.json("fitness_trace")?,
        fitness_evaluations: fields.get("fitness_evaluations")?,
        best_fitness: fields.json("best_fitness")?,
        wall_times,
    };

    if report.canonical_text() != canonical {
        return Err(Error::ReportParse {
            line: 0,
            reason: "canonical section is inconsistent with its recomputed form".into(),
        });
    }
    match hash {
        Some(h) if h == report.canonical_hash() => Ok(report),
        Some(_) => Err(Error::ReportParse {
            line: 0,
            reason: "canonical hash mismatch".into(),
        }),
        None => Err(Error::ReportParse {
            line: 0,
            reason: "missing canonical_sha256".into(),
        }),
    }
}
