//! Confusion matrix, classification rates and the relative-improvement
//! comparator.
//!
//! Per-class rates use the one-vs-rest readout of the matrix. A rate whose
//! denominator is zero is reported as 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// k×k count grid; rows are actual classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    k: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn zeros(k: usize) -> Self {
        ConfusionMatrix {
            k,
            counts: vec![0; k * k],
        }
    }

    pub fn from_counts(rows: &[Vec<u64>]) -> Result<Self> {
        let k = rows.len();
        let mut cm = Self::zeros(k);
        for (a, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::WidthMismatch {
                    expected: k,
                    got: row.len(),
                });
            }
            cm.counts[a * k..(a + 1) * k].copy_from_slice(row);
        }
        Ok(cm)
    }

    pub fn classes(&self) -> usize {
        self.k
    }

    pub fn get(&self, actual: usize, predicted: usize) -> u64 {
        self.counts[actual * self.k + predicted]
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        (0..self.k)
            .map(|a| self.counts[a * self.k..(a + 1) * self.k].to_vec())
            .collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.k).map(|c| self.get(c, c)).sum()
    }

    pub fn tp(&self, c: usize) -> u64 {
        self.get(c, c)
    }

    pub fn fp(&self, c: usize) -> u64 {
        (0..self.k).map(|a| self.get(a, c)).sum::<u64>() - self.tp(c)
    }

    pub fn fn_(&self, c: usize) -> u64 {
        (0..self.k).map(|p| self.get(c, p)).sum::<u64>() - self.tp(c)
    }

    pub fn tn(&self, c: usize) -> u64 {
        self.total() - self.tp(c) - self.fp(c) - self.fn_(c)
    }

    pub fn support(&self, c: usize) -> u64 {
        self.tp(c) + self.fn_(c)
    }
}

pub fn confusion(actual: &[usize], predicted: &[usize], k: usize) -> Result<ConfusionMatrix> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: actual.len(),
            right: predicted.len(),
        });
    }
    let mut cm = ConfusionMatrix::zeros(k);
    for (&a, &p) in actual.iter().zip(predicted) {
        if let Some(&bad) = [a, p].iter().find(|&&l| l >= k) {
            return Err(Error::LabelOutOfRange { label: bad, classes: k });
        }
        cm.counts[a * k + p] += 1;
    }
    Ok(cm)
}

/// Correct predictions over all predictions; the multiclass form of
/// (TP + TN) / (TP + TN + FP + FN).
pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    match cm.total() {
        0 => Err(Error::EmptyMatrix),
        total => Ok(cm.correct() as f64 / total as f64),
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * (precision * recall) / (precision + recall)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
}

pub fn precision_recall_f1(cm: &ConfusionMatrix) -> ClassScores {
    let k = cm.classes();
    let precision: Vec<f64> = (0..k).map(|c| ratio(cm.tp(c), cm.tp(c) + cm.fp(c))).collect();
    let recall: Vec<f64> = (0..k).map(|c| ratio(cm.tp(c), cm.tp(c) + cm.fn_(c))).collect();
    let f1s: Vec<f64> = precision.iter().zip(&recall).map(|(&p, &r)| f1(p, r)).collect();

    let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
    let total = cm.total();
    let weighted = |v: &[f64]| {
        if total == 0 {
            0.0
        } else {
            v.iter().enumerate().map(|(c, x)| x * cm.support(c) as f64).sum::<f64>() / total as f64
        }
    };
    ClassScores {
        macro_precision: mean(&precision),
        macro_recall: mean(&recall),
        macro_f1: mean(&f1s),
        weighted_precision: weighted(&precision),
        weighted_recall: weighted(&recall),
        weighted_f1: weighted(&f1s),
        precision,
        recall,
        f1: f1s,
    }
}

/// Headline evaluation numbers for one trained model on one test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub accuracy: f64,
    pub scores: ClassScores,
    pub train_seconds: f64,
    pub test_seconds: f64,
}

impl MetricReport {
    pub fn from_confusion(cm: &ConfusionMatrix, train_seconds: f64, test_seconds: f64) -> Result<Self> {
        Ok(MetricReport {
            accuracy: accuracy(cm)?,
            scores: precision_recall_f1(cm),
            train_seconds,
            test_seconds,
        })
    }
}

/// Signed percentage change `(new - old) / |old| * 100`.
pub fn relative_improvement(new_value: f64, old_value: f64) -> Result<f64> {
    if old_value == 0.0 {
        return Err(Error::ZeroBaseline);
    }
    Ok((new_value - old_value) / old_value.abs() * 100.0)
}
