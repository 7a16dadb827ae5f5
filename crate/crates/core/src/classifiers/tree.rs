use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::datasets::Matrix;
use crate::error::{Error, Result};
use crate::rng::{self, Rng};

use super::{majority, Classifier, Predictor};

/// Number of features examined at each split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    #[default]
    All,
    /// ⌈√d⌉
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::All => d,
            MaxFeatures::Sqrt => (d as f64).sqrt().ceil() as usize,
            MaxFeatures::Count(n) => n,
        }
        .clamp(1, d.max(1))
    }
}

/// CART with Gini impurity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_split: 2,
            max_features: MaxFeatures::All,
        }
    }
}

impl TreeParams {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.min_samples_split < 2 {
            return Err(Error::config("min_samples_split must be at least 2"));
        }
        if self.max_depth == Some(0) {
            return Err(Error::config("max_depth must be positive"));
        }
        if self.max_features == MaxFeatures::Count(0) {
            return Err(Error::config("max_features must be positive"));
        }
        Ok(())
    }
}

impl Classifier for TreeParams {
    fn name(&self) -> &'static str {
        "dtree"
    }

    fn fit(&self, x: &Matrix, y: &[usize], n_classes: usize, seed: u64) -> Result<Box<dyn Predictor>> {
        self.validate()?;
        let rows: Vec<usize> = (0..x.rows()).collect();
        let mut rng = rng::stream(seed, &[0x7EE]);
        Ok(Box::new(DecisionTree::grow(x, y, rows, n_classes, self, &mut rng)))
    }
}

/// Chosen split: rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    /// Weighted Gini impurity of the two children.
    pub impurity: f64,
}

/// Size-weighted Gini of a two-way partition as an exact ratio
/// `(numerator, denominator)`, scaled by the total row count. Both sides are
/// non-empty.
fn partition_gini(left: &[usize], n_left: usize, right: &[usize], n_right: usize) -> (u128, u128) {
    let side = |counts: &[usize], n: usize| {
        let sq: u128 = counts.iter().map(|&c| (c as u128) * (c as u128)).sum();
        (n as u128) * (n as u128) - sq
    };
    let (nl, nr) = (n_left as u128, n_right as u128);
    (side(left, n_left) * nr + side(right, n_right) * nl, nl * nr)
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m >= b {
        a
    } else {
        m
    }
}

/// Best Gini split of `rows` over `features`, scanning features in the given
/// order and thresholds ascending; the first strictly better candidate wins.
/// `None` when every examined feature is constant on `rows`.
pub fn best_split(x: &Matrix, y: &[usize], rows: &[usize], n_classes: usize, features: &[usize]) -> Option<Split> {
    let n = rows.len();
    let mut total = vec![0usize; n_classes];
    for &r in rows {
        total[y[r]] += 1;
    }
    let mut best: Option<Split> = None;
    let mut best_key: (u128, u128) = (1, 0);
    let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(n);
    let mut left = vec![0usize; n_classes];
    let mut right = vec![0usize; n_classes];
    for &f in features {
        sorted.clear();
        sorted.extend(rows.iter().map(|&r| (x.get(r, f), y[r])));
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        left.iter_mut().for_each(|c| *c = 0);
        right.copy_from_slice(&total);
        for i in 0..n - 1 {
            let (v, label) = sorted[i];
            left[label] += 1;
            right[label] -= 1;
            let next = sorted[i + 1].0;
            if v >= next {
                continue;
            }
            let key = partition_gini(&left, i + 1, &right, n - i - 1);
            if best.is_none() || key.0 * best_key.1 < best_key.0 * key.1 {
                best_key = key;
                best = Some(Split {
                    feature: f,
                    threshold: midpoint(v, next),
                    impurity: key.0 as f64 / (key.1 as f64 * n as f64),
                });
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf { class: usize },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    /// Grows a tree on the given row multiset (duplicates allowed, as in a
    /// bootstrap sample). `rng` is only consulted when `max_features` is
    /// smaller than the feature count.
    pub(crate) fn grow(
        x: &Matrix,
        y: &[usize],
        rows: Vec<usize>,
        n_classes: usize,
        params: &TreeParams,
        rng: &mut Rng,
    ) -> Self {
        let d = x.cols();
        let k_features = params.max_features.resolve(d);
        let mut nodes = vec![Node::Leaf { class: 0 }];
        // (node slot, rows, depth)
        let mut work = vec![(0usize, rows, 0usize)];
        let mut all_features: Vec<usize> = (0..d).collect();
        while let Some((slot, rows, depth)) = work.pop() {
            let mut counts = vec![0usize; n_classes];
            for &r in &rows {
                counts[y[r]] += 1;
            }
            let class = majority(&counts);
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            let depth_capped = params.max_depth.is_some_and(|m| depth >= m);
            if pure || depth_capped || rows.len() < params.min_samples_split {
                nodes[slot] = Node::Leaf { class };
                continue;
            }

            let split = if k_features >= d {
                best_split(x, y, &rows, n_classes, &all_features)
            } else {
                all_features.shuffle(rng);
                let mut chosen = all_features[..k_features].to_vec();
                chosen.sort_unstable();
                // Keep drawing past the quota until some feature can split.
                best_split(x, y, &rows, n_classes, &chosen).or_else(|| {
                    all_features[k_features..]
                        .iter()
                        .find_map(|&f| best_split(x, y, &rows, n_classes, &[f]))
                })
            };
            let Some(split) = split else {
                nodes[slot] = Node::Leaf { class };
                continue;
            };
            let (l_rows, r_rows): (Vec<usize>, Vec<usize>) =
                rows.iter().partition(|&&r| x.get(r, split.feature) <= split.threshold);
            let left = nodes.len();
            let right = left + 1;
            nodes.push(Node::Leaf { class });
            nodes.push(Node::Leaf { class });
            nodes[slot] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left,
                right,
            };
            work.push((right, r_rows, depth + 1));
            work.push((left, l_rows, depth + 1));
        }
        DecisionTree { nodes }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Root split, if the tree has one.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes[0] {
            Node::Split { feature, threshold, .. } => Some((feature, threshold)),
            Node::Leaf { .. } => None,
        }
    }
}

impl Predictor for DecisionTree {
    fn predict_row(&self, row: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { class } => return class,
                Node::Split { feature, threshold, left, right } => {
                    at = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit(x: &Matrix, y: &[usize], k: usize, params: &TreeParams) -> DecisionTree {
        DecisionTree::grow(x, y, (0..x.rows()).collect(), k, params, &mut rng::seeded(0))
    }

    #[test]
    fn root_split_on_simple_threshold() {
        let x = Matrix::from_rows(&[[0.0, 5.0], [1.0, 5.0], [2.0, 5.0], [3.0, 5.0]]).unwrap();
        let y = [0, 0, 1, 1];
        let s = best_split(&x, &y, &[0, 1, 2, 3], 2, &[0, 1]).unwrap();
        assert_eq!((s.feature, s.threshold, s.impurity), (0, 1.5, 0.0));
        // Constant feature alone has no split.
        assert!(best_split(&x, &y, &[0, 1, 2, 3], 2, &[1]).is_none());
    }

    #[test]
    fn ties_prefer_lower_feature() {
        // Features 0 and 1 are identical, so both give the same impurity.
        let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let s = best_split(&x, &[0, 1], &[0, 1], 2, &[0, 1]).unwrap();
        assert_eq!(s.feature, 0);
    }

    #[test]
    fn unlimited_tree_fits_training_data() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0], [0.5, 0.5]]).unwrap();
        let y = [0, 1, 1, 0, 2];
        let t = fit(&x, &y, 3, &TreeParams::default());
        for (i, &label) in y.iter().enumerate() {
            assert_eq!(t.predict_row(x.row(i)), label);
        }
    }

    #[test]
    fn depth_cap_limits_growth() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0], [3.0]]).unwrap();
        let y = [0, 1, 0, 1];
        let params = TreeParams {
            max_depth: Some(1),
            ..Default::default()
        };
        assert_eq!(fit(&x, &y, 2, &params).node_count(), 3);
    }

    #[test]
    fn duplicate_points_with_conflicting_labels_become_a_leaf() {
        let x = Matrix::from_rows(&[[1.0], [1.0], [1.0]]).unwrap();
        let t = fit(&x, &[1, 0, 1], 2, &TreeParams::default());
        assert_eq!(t.node_count(), 1);
        assert_eq!(t.predict_row(&[1.0]), 1);
    }

    #[test]
    fn resolve_max_features() {
        assert_eq!(MaxFeatures::Sqrt.resolve(82), 10);
        assert_eq!(MaxFeatures::Sqrt.resolve(41), 7);
        assert_eq!(MaxFeatures::All.resolve(5), 5);
        assert_eq!(MaxFeatures::Count(99).resolve(5), 5);
    }
}
