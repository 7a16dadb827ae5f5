//! End-to-end experiments: load → clean/encode → downsample → split →
//! feature selection on the training split → fit → predict → metrics, plus
//! report serialization, report comparison and the config-matrix runner.

mod compare;
mod config;
mod matrix;
mod report;

use std::time::Instant;

use crate::classifiers;
use crate::datasets::{self, DataTable, SplitPair};
use crate::error::{Result, StageContext};
use crate::fitness::{FeatureMask, FitnessEvaluator, RowObserver};
use crate::metrics::{self, MetricReport};

pub use compare::{compare, Comparison, ComparisonRow};
pub use config::{DatasetConfig, ExperimentConfig, FitnessConfig, OutputConfig, DATA_ROOT_ENV, DEFAULT_SEED};
pub use matrix::{run_matrix, MatrixConfig, MatrixExclusion, MatrixOutcome};
pub use report::{curve_path, emit_report, parse_report, write_curve, ExperimentReport, WallTimes, TOOL_VERSION};

/// Preprocessed data shared by every experiment on one dataset.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub dataset: DatasetConfig,
    pub seed: u64,
    /// Width of the source file(s) before drops.
    pub raw_attribute_count: usize,
    pub split: SplitPair,
}

/// Loads and preprocesses a dataset and splits it into train and test.
pub fn prepare_data(dataset: &DatasetConfig, seed: u64) -> Result<PreparedData> {
    let schema = dataset.schema();
    let (train_paths, test_paths) = dataset.resolved_paths();
    let mut groups: Vec<&[std::path::PathBuf]> = vec![&train_paths];
    if !test_paths.is_empty() {
        groups.push(&test_paths);
    }
    let (raw, sizes) = datasets::load_csv_groups(&groups, &schema).stage("load")?;
    let table = datasets::clean_and_encode(&raw).stage("preprocess")?;

    let split = if test_paths.is_empty() {
        let table = maybe_downsample(table, dataset.downsample, seed)?;
        datasets::split(&table, dataset.train_fraction, seed).stage("split")?
    } else {
        let n_train = sizes[0];
        let train = table.select_rows(&(0..n_train).collect::<Vec<_>>());
        let test = table.select_rows(&(n_train..table.n_rows()).collect::<Vec<_>>());
        SplitPair {
            train_fraction: n_train as f64 / table.n_rows() as f64,
            train: maybe_downsample(train, dataset.downsample, seed)?,
            test,
            seed,
        }
    };
    Ok(PreparedData {
        dataset: dataset.clone(),
        seed,
        raw_attribute_count: raw.source_column_count,
        split,
    })
}

fn maybe_downsample(table: DataTable, cap: usize, seed: u64) -> Result<DataTable> {
    if cap == 0 {
        Ok(table)
    } else {
        datasets::downsample(&table, cap, seed).stage("downsample")
    }
}

/// Runs one experiment from scratch.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let prepared = prepare_data(&config.dataset, config.seed)?;
    run_prepared(&prepared, config, None)
}

/// Runs the selection/fit/evaluate stages on already prepared data.
/// `observer`, when given, sees the source row ids of every row each
/// fitness evaluation touches.
pub fn run_prepared(
    prepared: &PreparedData,
    config: &ExperimentConfig,
    observer: Option<RowObserver>,
) -> Result<ExperimentReport> {
    let train = &prepared.split.train;
    let test = &prepared.split.test;
    let d = train.n_features();

    let started = Instant::now();
    let (mask, trace, evaluations, best_fitness) = match config.seeded_optimizer().build() {
        None => (FeatureMask::ones(d), Vec::new(), 0, None),
        Some(selector) => {
            let mut evaluator = FitnessEvaluator::new(train, config.fitness_strategy()).stage("select")?;
            if let Some(obs) = observer {
                evaluator = evaluator.with_observer(obs);
            }
            let mut fitness = |m: &FeatureMask| evaluator.evaluate(m);
            let result = selector.select(&mut fitness, d).stage("select")?;
            (result.best_mask, result.trace, result.evaluations_used, Some(result.best_fitness))
        }
    };
    let selection_seconds = started.elapsed().as_secs_f64();

    let columns = mask.selected();
    let train_sel = train.select_columns(&columns);
    let model = classifiers::fit(&config.classifier, &train_sel, config.seed).stage("train")?;
    let (predicted, test_seconds) = model
        .predict(&test.features.select_columns(&columns))
        .stage("test")?;
    let confusion = metrics::confusion(&test.labels, &predicted, test.n_classes()).stage("metrics")?;
    let metrics = MetricReport::from_confusion(&confusion, model.train_seconds, test_seconds).stage("metrics")?;

    Ok(ExperimentReport {
        config: config.clone(),
        tool_version: TOOL_VERSION.to_string(),
        seed: config.seed,
        raw_attribute_count: prepared.raw_attribute_count,
        features_before: d,
        features_after: mask.popcount(),
        selected_features: columns.iter().map(|&j| train.feature_names[j].clone()).collect(),
        selected_mask: mask,
        class_names: train.class_names.clone(),
        train_rows: train.n_rows(),
        test_rows: test.n_rows(),
        metrics,
        confusion,
        fitness_trace: trace,
        fitness_evaluations: evaluations,
        best_fitness,
        wall_times: WallTimes {
            selection_seconds,
            train_seconds: model.train_seconds,
            test_seconds,
        },
    })
}
