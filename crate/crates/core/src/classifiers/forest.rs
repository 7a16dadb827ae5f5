use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::datasets::Matrix;
use crate::error::{Error, Result};
use crate::rng;

use super::tree::{DecisionTree, MaxFeatures, TreeParams};
use super::{majority, Classifier, Predictor};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_estimators: 100,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            max_depth: None,
            min_samples_split: 2,
        }
    }
}

impl ForestParams {
    fn tree_params(&self) -> TreeParams {
        TreeParams {
            max_depth: self.max_depth,
            min_samples_split: self.min_samples_split,
            max_features: self.max_features,
        }
    }
}

impl Classifier for ForestParams {
    fn name(&self) -> &'static str {
        "rforest"
    }

    fn fit(&self, x: &Matrix, y: &[usize], n_classes: usize, seed: u64) -> Result<Box<dyn Predictor>> {
        if self.n_estimators == 0 {
            return Err(Error::config("n_estimators must be positive"));
        }
        let params = self.tree_params();
        params.validate()?;
        let n = x.rows();
        let trees = (0..self.n_estimators)
            .map(|t| {
                let mut rng = rng::stream(seed, &[0xF0, t as u64]);
                let rows = if self.bootstrap {
                    (0..n).map(|_| rng.gen_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                DecisionTree::grow(x, y, rows, n_classes, &params, &mut rng)
            })
            .collect();
        Ok(Box::new(RandomForest { trees, n_classes }))
    }
}

/// Majority vote over member trees; ties go to the smallest class index.
#[derive(Debug, Clone)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    n_classes: usize,
}

impl RandomForest {
    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn from_trees(trees: Vec<DecisionTree>, n_classes: usize) -> Self {
        RandomForest { trees, n_classes }
    }
}

impl Predictor for RandomForest {
    fn predict_row(&self, row: &[f64]) -> usize {
        let mut votes = vec![0usize; self.n_classes];
        for t in &self.trees {
            votes[t.predict_row(row)] += 1;
        }
        majority(&votes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vote_ties_go_to_smallest_class() {
        // Two stumps disagreeing everywhere: one always says 1, one always 0.
        let x = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
        let stump = |labels: [usize; 2]| {
            DecisionTree::grow(&x, &labels, vec![0, 1], 2, &TreeParams::default(), &mut rng::seeded(0))
        };
        let forest = RandomForest::from_trees(vec![stump([1, 0]), stump([0, 1])], 2);
        assert_eq!(forest.predict_row(&[0.0]), 0);
        assert_eq!(forest.predict_row(&[1.0]), 0);
        let forest = RandomForest::from_trees(vec![stump([1, 0]), stump([1, 0]), stump([0, 1])], 2);
        assert_eq!(forest.predict_row(&[0.0]), 1);
    }
}
