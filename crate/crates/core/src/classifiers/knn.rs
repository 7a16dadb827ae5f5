use serde::{Deserialize, Serialize};

use crate::datasets::Matrix;
use crate::error::{Error, Result};

use super::{majority, Classifier, Predictor};

/// Brute-force Euclidean k-nearest-neighbours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

impl Classifier for KnnParams {
    fn name(&self) -> &'static str {
        "knn"
    }

    fn fit(&self, x: &Matrix, y: &[usize], n_classes: usize, _seed: u64) -> Result<Box<dyn Predictor>> {
        if self.k == 0 {
            return Err(Error::config("k must be positive"));
        }
        if self.k > x.rows() {
            return Err(Error::KTooLarge {
                k: self.k,
                rows: x.rows(),
            });
        }
        Ok(Box::new(Knn {
            k: self.k,
            x: x.clone(),
            y: y.to_vec(),
            n_classes,
        }))
    }
}

#[derive(Debug, Clone)]
pub struct Knn {
    k: usize,
    x: Matrix,
    y: Vec<usize>,
    n_classes: usize,
}

impl Knn {
    /// Training-row indices of the k nearest neighbours, nearest first.
    /// Equal distances order by training-row index.
    pub fn neighbours(&self, row: &[f64]) -> Vec<usize> {
        let mut dist: Vec<(f64, usize)> = self
            .x
            .iter_rows()
            .enumerate()
            .map(|(i, t)| (t.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum(), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, cmp);
            dist.truncate(self.k);
        }
        dist.sort_unstable_by(cmp);
        dist.into_iter().map(|(_, i)| i).collect()
    }
}

impl Predictor for Knn {
    fn predict_row(&self, row: &[f64]) -> usize {
        let mut votes = vec![0usize; self.n_classes];
        for i in self.neighbours(row) {
            votes[self.y[i]] += 1;
        }
        majority(&votes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_larger_than_rows_is_rejected() {
        let x = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
        assert!(matches!(
            KnnParams { k: 3 }.fit(&x, &[0, 1], 2, 0),
            Err(Error::KTooLarge { k: 3, rows: 2 })
        ));
    }

    #[test]
    fn distance_ties_use_row_index() {
        let x = Matrix::from_rows(&[[1.0], [-1.0], [2.0]]).unwrap();
        let m = KnnParams { k: 1 }.fit(&x, &[1, 0, 0], 2, 0).unwrap();
        // Rows 0 and 1 are equidistant from 0; row 0 wins.
        assert_eq!(m.predict_row(&[0.0]), 1);
    }

    #[test]
    fn vote_ties_use_class_index() {
        let x = Matrix::from_rows(&[[1.0], [-1.0]]).unwrap();
        let m = KnnParams { k: 2 }.fit(&x, &[1, 0], 2, 0).unwrap();
        assert_eq!(m.predict_row(&[0.3]), 0);
    }
}
