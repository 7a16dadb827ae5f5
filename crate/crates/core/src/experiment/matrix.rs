//! Batch runner over datasets × classifiers × optimizers.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::ClassifierSpec;
use crate::error::{Error, Result};
use crate::optimizers::OptimizerSpec;

use super::compare::{compare, Comparison};
use super::config::{DatasetConfig, ExperimentConfig, FitnessConfig, OutputConfig, DEFAULT_SEED};
use super::report::{emit_report, ExperimentReport};
use super::{prepare_data, run_prepared};

fn default_seed() -> u64 {
    DEFAULT_SEED
}

/// A combination to skip. Unset fields match anything.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MatrixExclusion {
    #[serde(default)]
    pub dataset: Option<String>,
    #[serde(default)]
    pub classifier: Option<String>,
    #[serde(default)]
    pub optimizer: Option<String>,
}

impl MatrixExclusion {
    pub fn matches(&self, dataset: &str, classifier: &str, optimizer: &str) -> bool {
        let hit = |f: &Option<String>, v: &str| f.as_deref().is_none_or(|f| f == v);
        hit(&self.dataset, dataset) && hit(&self.classifier, classifier) && hit(&self.optimizer, optimizer)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub datasets: Vec<DatasetConfig>,
    pub classifiers: Vec<ClassifierSpec>,
    pub optimizers: Vec<OptimizerSpec>,
    #[serde(default)]
    pub fitness: Option<FitnessConfig>,
    #[serde(default)]
    pub exclude: Vec<MatrixExclusion>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub parallel: bool,
}

impl MatrixConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Every experiment the matrix will run, in a fixed order.
    pub fn expand(&self) -> Vec<ExperimentConfig> {
        let mut out = Vec::new();
        for ds in &self.datasets {
            let name = ds.display_name();
            for cl in &self.classifiers {
                for op in &self.optimizers {
                    if self.exclude.iter().any(|e| e.matches(&name, cl.kind(), op.kind())) {
                        continue;
                    }
                    let report = self.output_dir.join(&name).join(format!("{}__{}.report", cl.kind(), op.kind()));
                    out.push(ExperimentConfig {
                        seed: self.seed,
                        dataset: ds.clone(),
                        optimizer: op.clone(),
                        classifier: cl.clone(),
                        fitness: self.fitness.clone(),
                        output: OutputConfig { report: Some(report) },
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug)]
pub struct MatrixOutcome {
    pub reports: Vec<ExperimentReport>,
    pub comparisons: Vec<Comparison>,
    pub summary_path: PathBuf,
}

/// Runs the whole matrix. Each dataset is prepared once and shared by all
/// of its runs; reports, per-pair comparisons and `matrix_summary.csv` are
/// written under `output_dir`.
pub fn run_matrix(config: &MatrixConfig) -> Result<MatrixOutcome> {
    let plan = config.expand();
    let mut reports = Vec::with_capacity(plan.len());
    for ds in &config.datasets {
        let runs: Vec<&ExperimentConfig> = plan.iter().filter(|c| &c.dataset == ds).collect();
        if runs.is_empty() {
            continue;
        }
        let prepared = prepare_data(ds, config.seed)?;
        let run_one = |c: &&ExperimentConfig| -> Result<ExperimentReport> {
            let report = run_prepared(&prepared, c, None)?;
            if let Some(path) = &c.output.report {
                emit_report(&report, path)?;
            }
            Ok(report)
        };
        let done: Vec<Result<ExperimentReport>> = if config.parallel {
            runs.par_iter().map(run_one).collect()
        } else {
            runs.iter().map(run_one).collect()
        };
        for r in done {
            reports.push(r?);
        }
    }

    let mut comparisons = Vec::new();
    for ds in &config.datasets {
        for cl in &config.classifiers {
            let group: Vec<ExperimentReport> = reports
                .iter()
                .filter(|r| r.config.dataset == *ds && r.config.classifier == *cl)
                .cloned()
                .collect();
            if group.len() < 2 {
                continue;
            }
            let c = compare(&group)?;
            let path = config.output_dir.join(&c.dataset).join(format!("{}__comparison.csv", c.classifier));
            std::fs::write(&path, c.to_csv()).map_err(|e| Error::io(&path, e))?;
            comparisons.push(c);
        }
    }

    std::fs::create_dir_all(&config.output_dir).map_err(|e| Error::io(&config.output_dir, e))?;
    let summary_path = config.output_dir.join("matrix_summary.csv");
    std::fs::write(&summary_path, summary_csv(&reports)).map_err(|e| Error::io(&summary_path, e))?;
    Ok(MatrixOutcome {
        reports,
        comparisons,
        summary_path,
    })
}

pub fn summary_csv(reports: &[ExperimentReport]) -> String {
    let mut out = String::from(
        "dataset,classifier,optimizer,features_before,features_after,accuracy,precision,recall,f1,best_fitness,fitness_evaluations,selection_seconds,train_seconds,test_seconds\n",
    );
    for r in reports {
        let s = &r.metrics.scores;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{},{},{:.6},{:.6},{:.6}",
            r.dataset_name(),
            r.classifier_kind(),
            r.optimizer_kind(),
            r.features_before,
            r.features_after,
            r.metrics.accuracy,
            s.macro_precision,
            s.macro_recall,
            s.macro_f1,
            r.best_fitness.map(|f| format!("{f:.6}")).unwrap_or_default(),
            r.fitness_evaluations,
            r.wall_times.selection_seconds,
            r.wall_times.train_seconds,
            r.wall_times.test_seconds,
        );
    }
    out
}
