use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifiers::ClassifierSpec;
use crate::datasets::{DatasetSchema, SchemaName};
use crate::error::{Error, Result};
use crate::fitness::{FitnessMode, FitnessStrategy};
use crate::optimizers::OptimizerSpec;

/// Environment variable that relative dataset paths are resolved against.
pub const DATA_ROOT_ENV: &str = "HYIDS_DATA_ROOT";

pub const DEFAULT_SEED: u64 = 42;

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_train_fraction() -> f64 {
    0.8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    /// Display name; defaults to the schema name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub schema: SchemaName,
    pub paths: Vec<PathBuf>,
    /// Separate test files (e.g. KDDTest+). When non-empty no split is made.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub test_paths: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_column: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drop_columns: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub header_present: Option<bool>,
    /// Per-class cap; 0 disables downsampling.
    #[serde(default)]
    pub downsample: usize,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
}

impl DatasetConfig {
    pub fn new(schema: SchemaName, paths: Vec<PathBuf>) -> Self {
        DatasetConfig {
            name: None,
            schema,
            paths,
            test_paths: Vec::new(),
            label_column: None,
            drop_columns: None,
            header_present: None,
            downsample: 0,
            train_fraction: default_train_fraction(),
        }
    }

    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.schema.to_string())
    }

    /// Built-in schema with any overrides from this config applied.
    pub fn schema(&self) -> DatasetSchema {
        let mut s = DatasetSchema::builtin(self.schema);
        if let Some(l) = &self.label_column {
            s.label_column = l.clone();
        }
        if let Some(d) = &self.drop_columns {
            s.drop_columns = d.clone();
        }
        if let Some(h) = self.header_present {
            s.header_present = h;
            if h {
                s.column_names.clear();
            }
        }
        s
    }

    pub fn resolved_paths(&self) -> (Vec<PathBuf>, Vec<PathBuf>) {
        let root = std::env::var_os(DATA_ROOT_ENV).map(PathBuf::from);
        let fix = |p: &PathBuf| match &root {
            Some(r) if p.is_relative() => r.join(p),
            _ => p.clone(),
        };
        (
            self.paths.iter().map(fix).collect(),
            self.test_paths.iter().map(fix).collect(),
        )
    }
}

/// Fitness settings; unset fields fall back to the optimizer's defaults
/// and the experiment classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFitness", into = "RawFitness")]
pub struct FitnessConfig {
    pub mode: Option<FitnessMode>,
    pub classifier: Option<ClassifierSpec>,
}

/// On-disk form of [`FitnessConfig`]: `mode` names the strategy and its
/// parameter sits beside it.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFitness {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    folds: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    validation_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    classifier: Option<ClassifierSpec>,
}

impl TryFrom<RawFitness> for FitnessConfig {
    type Error = String;

    fn try_from(raw: RawFitness) -> std::result::Result<Self, String> {
        let mode = match (raw.mode.as_deref(), raw.folds, raw.validation_fraction) {
            (None, None, None) => None,
            (None, _, _) => return Err("fitness.mode is required when folds or validation_fraction is set".into()),
            (Some("kfold_cv"), folds, None) => Some(FitnessMode::KfoldCv { folds: folds.unwrap_or(5) }),
            (Some("holdout"), None, vf) => Some(FitnessMode::Holdout {
                validation_fraction: vf.unwrap_or(0.2),
            }),
            (Some(m @ ("kfold_cv" | "holdout")), _, _) => {
                return Err(format!("fitness mode `{m}` takes only its own parameter"))
            }
            (Some(other), _, _) => {
                return Err(format!("unknown fitness mode `{other}` (expected kfold_cv or holdout)"))
            }
        };
        Ok(FitnessConfig {
            mode,
            classifier: raw.classifier,
        })
    }
}

impl From<FitnessConfig> for RawFitness {
    fn from(f: FitnessConfig) -> Self {
        let (mode, folds, validation_fraction) = match f.mode {
            None => (None, None, None),
            Some(FitnessMode::KfoldCv { folds }) => (Some("kfold_cv".to_string()), Some(folds), None),
            Some(FitnessMode::Holdout { validation_fraction }) => {
                (Some("holdout".to_string()), None, Some(validation_fraction))
            }
        };
        RawFitness {
            mode,
            folds,
            validation_fraction,
            classifier: f.classifier,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub optimizer: OptimizerSpec,
    #[serde(default)]
    pub classifier: ClassifierSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitness: Option<FitnessConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn new(dataset: DatasetConfig, optimizer: OptimizerSpec, classifier: ClassifierSpec) -> Self {
        ExperimentConfig {
            seed: DEFAULT_SEED,
            dataset,
            optimizer,
            classifier,
            fitness: None,
            output: OutputConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// The strategy the optimizer scores masks with. EVO defaults to 5-fold
    /// cross-validation, GWO to a 20% holdout.
    pub fn fitness_strategy(&self) -> FitnessStrategy {
        let mode = match (self.fitness.as_ref().and_then(|f| f.mode), &self.optimizer) {
            (Some(mode), _) => mode,
            (None, OptimizerSpec::Gwo(_)) => FitnessMode::holdout(),
            (None, _) => FitnessMode::kfold(),
        };
        let classifier = self
            .fitness
            .as_ref()
            .and_then(|f| f.classifier.clone())
            .unwrap_or_else(|| self.classifier.clone());
        FitnessStrategy {
            mode,
            classifier,
            seed: self.seed,
        }
    }

    /// Optimizer spec with its seed tied to the experiment seed.
    pub fn seeded_optimizer(&self) -> OptimizerSpec {
        let mut o = self.optimizer.clone();
        o.set_seed(self.seed);
        o
    }
}
