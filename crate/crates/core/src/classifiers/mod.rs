//! From-scratch supervised classifiers behind a common fit/predict contract.
//!
//! Each family implements [`Classifier`]; fitting yields a boxed
//! [`Predictor`]. [`ClassifierSpec`] is the serializable choice of family and
//! hyperparameters, and [`registry`] resolves family names (as used on the
//! command line) to default specs.

mod forest;
mod knn;
mod svm;
mod tree;

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::datasets::{DataTable, Matrix};
use crate::error::{Error, Result};

pub use forest::{ForestParams, RandomForest};
pub use knn::{Knn, KnnParams};
pub use svm::{train_binary, BinaryMachine, SvmParams, SvmRbf};
pub use tree::{best_split, DecisionTree, MaxFeatures, Split, TreeParams};

/// A fitted model able to label feature vectors.
pub trait Predictor: Debug + Send + Sync {
    /// Label for one row. The caller guarantees `row.len()` equals the
    /// training width.
    fn predict_row(&self, row: &[f64]) -> usize;
}

/// A classifier family with its hyperparameters bound.
pub trait Classifier: Send + Sync {
    fn name(&self) -> &'static str;

    /// Fits on `x`/`y`. Labels are `< n_classes`; randomness draws only from
    /// `seed`.
    fn fit(&self, x: &Matrix, y: &[usize], n_classes: usize, seed: u64) -> Result<Box<dyn Predictor>>;
}

/// Classifier family plus hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierSpec {
    Dtree(TreeParams),
    Rforest(ForestParams),
    Knn(KnnParams),
    SvmRbf(SvmParams),
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        ClassifierSpec::Dtree(TreeParams::default())
    }
}

impl ClassifierSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ClassifierSpec::Dtree(_) => "dtree",
            ClassifierSpec::Rforest(_) => "rforest",
            ClassifierSpec::Knn(_) => "knn",
            ClassifierSpec::SvmRbf(_) => "svm_rbf",
        }
    }

    pub fn build(&self) -> Box<dyn Classifier> {
        match self {
            ClassifierSpec::Dtree(p) => Box::new(p.clone()),
            ClassifierSpec::Rforest(p) => Box::new(p.clone()),
            ClassifierSpec::Knn(p) => Box::new(p.clone()),
            ClassifierSpec::SvmRbf(p) => Box::new(p.clone()),
        }
    }
}

type SpecFactory = fn() -> ClassifierSpec;

/// Name → default spec table.
pub struct ClassifierRegistry {
    entries: BTreeMap<&'static str, SpecFactory>,
}

impl ClassifierRegistry {
    pub fn register(&mut self, name: &'static str, factory: SpecFactory) {
        self.entries.insert(name, factory);
    }

    pub fn spec(&self, name: &str) -> Result<ClassifierSpec> {
        self.entries
            .get(name)
            .map(|f| f())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "classifier",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

/// Built-in classifiers. `svm` is an alias of `svm_rbf`.
pub fn registry() -> ClassifierRegistry {
    let mut r = ClassifierRegistry {
        entries: BTreeMap::new(),
    };
    r.register("dtree", || ClassifierSpec::Dtree(TreeParams::default()));
    r.register("rforest", || ClassifierSpec::Rforest(ForestParams::default()));
    r.register("knn", || ClassifierSpec::Knn(KnnParams::default()));
    r.register("svm_rbf", || ClassifierSpec::SvmRbf(SvmParams::default()));
    r.register("svm", || ClassifierSpec::SvmRbf(SvmParams::default()));
    r
}

/// Fitted model with its shape and training time.
#[derive(Debug)]
pub struct TrainedModel {
    pub spec: ClassifierSpec,
    pub class_count: usize,
    pub feature_count: usize,
    pub train_seconds: f64,
    inner: Box<dyn Predictor>,
}

pub fn fit(spec: &ClassifierSpec, train: &DataTable, seed: u64) -> Result<TrainedModel> {
    fit_matrix(spec, &train.features, &train.labels, &train.class_names, seed)
}

/// [`fit`] on bare arrays; `class_names` gives the class count and the names
/// used in errors.
pub fn fit_matrix(
    spec: &ClassifierSpec,
    x: &Matrix,
    y: &[usize],
    class_names: &[String],
    seed: u64,
) -> Result<TrainedModel> {
    if y.len() != x.rows() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: x.rows(),
        });
    }
    if x.rows() == 0 {
        return Err(Error::Config("cannot fit on an empty training set".into()));
    }
    let k = class_names.len();
    if let Some(&bad) = y.iter().find(|&&l| l >= k) {
        return Err(Error::LabelOutOfRange { label: bad, classes: k });
    }
    if y.iter().all(|&l| l == y[0]) {
        return Err(Error::SingleClass(class_names[y[0]].clone()));
    }
    let start = Instant::now();
    let inner = spec.build().fit(x, y, k, seed)?;
    Ok(TrainedModel {
        spec: spec.clone(),
        class_count: k,
        feature_count: x.cols(),
        train_seconds: start.elapsed().as_secs_f64(),
        inner,
    })
}

impl TrainedModel {
    /// Labels every row and reports the wall-clock time for the batch.
    pub fn predict(&self, rows: &Matrix) -> Result<(Vec<usize>, f64)> {
        if rows.cols() != self.feature_count && rows.rows() > 0 {
            return Err(Error::WidthMismatch {
                expected: self.feature_count,
                got: rows.cols(),
            });
        }
        let start = Instant::now();
        let labels = rows.iter_rows().map(|r| self.inner.predict_row(r)).collect();
        Ok((labels, start.elapsed().as_secs_f64()))
    }

    pub fn predict_row(&self, row: &[f64]) -> Result<usize> {
        if row.len() != self.feature_count {
            return Err(Error::WidthMismatch {
                expected: self.feature_count,
                got: row.len(),
            });
        }
        Ok(self.inner.predict_row(row))
    }
}

/// Most frequent label; ties go to the smallest class index.
pub(crate) fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|c| format!("c{c}")).collect()
    }

    #[test]
    fn registry_resolves_names() {
        let r = registry();
        assert_eq!(r.spec("svm").unwrap().kind(), "svm_rbf");
        assert_eq!(r.spec("rforest").unwrap().kind(), "rforest");
        assert!(matches!(r.spec("xgboost"), Err(Error::UnknownStrategy { .. })));
        assert_eq!(r.names().count(), 5);
    }

    #[test]
    fn single_class_training_is_an_error() {
        let x = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
        let err = fit_matrix(&ClassifierSpec::default(), &x, &[1, 1], &names(2), 0).unwrap_err();
        assert!(matches!(err, Error::SingleClass(ref c) if c == "c1"));
    }

    #[test]
    fn width_mismatch_and_empty_batch() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let m = fit_matrix(&ClassifierSpec::default(), &x, &[0, 1], &names(2), 0).unwrap();
        assert!(matches!(
            m.predict(&Matrix::from_rows(&[[0.0]]).unwrap()),
            Err(Error::WidthMismatch { expected: 2, got: 1 })
        ));
        let (labels, secs) = m.predict(&Matrix::empty(2)).unwrap();
        assert!(labels.is_empty() && secs >= 0.0);
    }

    #[test]
    fn separable_toy_fits_perfectly() {
        let x = Matrix::from_rows(&[[0.1, 0.9], [0.2, 0.8], [0.8, 0.1], [0.9, 0.3]]).unwrap();
        let y = [0, 0, 1, 1];
        for name in ["dtree", "rforest", "knn", "svm"] {
            let mut spec = registry().spec(name).unwrap();
            if let ClassifierSpec::Knn(p) = &mut spec {
                p.k = 1;
            }
            let m = fit_matrix(&spec, &x, &y, &names(2), 3).unwrap();
            assert_eq!(m.predict(&x).unwrap().0, y, "{name}");
            assert!(m.train_seconds >= 0.0);
        }
    }

    #[test]
    fn majority_ties_to_smallest() {
        assert_eq!(majority(&[2, 3, 3]), 1);
        assert_eq!(majority(&[0, 0]), 0);
    }
}
