#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::Path;

use hyids::classifiers::{ClassifierSpec, KnnParams};
use hyids::datasets::{DataTable, Matrix};
use hyids::fitness::{FeatureMask, FitnessEvaluator, FitnessMode, FitnessStrategy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Random table with values on a coarse grid, so ties between feature
/// values and between distances actually occur.
pub fn random_table(seed: u64, rows: usize, cols: usize, classes: usize, grid: u32) -> DataTable {
    let mut r = rng(seed);
    let data: Vec<f64> = (0..rows * cols).map(|_| r.gen_range(0..grid) as f64 / grid as f64).collect();
    let mut labels: Vec<usize> = (0..rows).map(|_| r.gen_range(0..classes)).collect();
    labels[0] = 0;
    labels[rows - 1] = classes - 1;
    DataTable::new(
        Matrix::new(rows, cols, data).unwrap(),
        labels,
        names("f", cols),
        names("c", classes),
    )
    .unwrap()
}

/// Six columns; the label is `x0 + x1 > 1` with a little label noise, and
/// the other four columns are uniform noise.
pub fn six_feature_table() -> DataTable {
    let n = 150;
    let mut r = rng(2024);
    let mut data = Vec::with_capacity(n * 6);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..6).map(|_| r.gen::<f64>()).collect();
        let mut y = usize::from(row[0] + row[1] > 1.0);
        if r.gen::<f64>() < 0.05 {
            y = 1 - y;
        }
        data.extend(row);
        labels.push(y);
    }
    DataTable::new(Matrix::new(n, 6, data).unwrap(), labels, names("x", 6), names("y", 2)).unwrap()
}

pub fn six_feature_strategy() -> FitnessStrategy {
    FitnessStrategy {
        mode: FitnessMode::KfoldCv { folds: 5 },
        classifier: ClassifierSpec::Knn(KnnParams { k: 5 }),
        seed: 7,
    }
}

/// Fitness of every non-empty mask over `d` features, indexed by mask word.
pub fn brute_force_fitness(table: &DataTable, strategy: &FitnessStrategy) -> Vec<f64> {
    let d = table.n_features();
    let ev = FitnessEvaluator::new(table, strategy.clone()).unwrap();
    (1u64..(1 << d))
        .map(|w| ev.evaluate(&FeatureMask::from_word(w, d)).unwrap())
        .collect()
}

/// Writes a CSV with a header, a categorical column, a few missing cells and
/// a `Label` column. Three classes; columns a and c carry the signal.
pub fn write_synthetic_csv(path: &Path, rows: usize, seed: u64) {
    let mut r = rng(seed);
    let mut text = String::from("id,a,b,c,d,proto,Label\n");
    let classes = ["BENIGN", "DDoS", "PortScan"];
    for i in 0..rows {
        let y = i % 3;
        let a = y as f64 + r.gen_range(-0.3..0.3);
        let c = -(y as f64) * 2.0 + r.gen_range(-0.4..0.4);
        let b = if i % 37 == 5 { String::new() } else { format!("{}", r.gen::<f64>()) };
        let d = r.gen::<f64>() * 10.0;
        let proto = ["tcp", "udp", "icmp"][r.gen_range(0..3)];
        let _ = writeln!(text, "{i},{a},{b},{c},{d},{proto},{}", classes[y]);
    }
    std::fs::write(path, text).unwrap();
}

/// Per-sample metric oracle using exact integer counts.
pub struct MetricOracle {
    pub accuracy: f64,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
}

pub fn metric_oracle(actual: &[usize], predicted: &[usize], k: usize) -> MetricOracle {
    let n = actual.len();
    let correct = actual.iter().zip(predicted).filter(|(a, p)| a == p).count();
    let mut precision = Vec::new();
    let mut recall = Vec::new();
    let mut f1 = Vec::new();
    for c in 0..k {
        let mut tp = 0u64;
        let mut fp = 0u64;
        let mut fneg = 0u64;
        for i in 0..n {
            match (actual[i] == c, predicted[i] == c) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fneg += 1,
                _ => {}
            }
        }
        let p = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let rc = if tp + fneg == 0 { 0.0 } else { tp as f64 / (tp + fneg) as f64 };
        // 2·TP / (2·TP + FP + FN), the integer form of the harmonic mean.
        let f = if tp == 0 { 0.0 } else { (2 * tp) as f64 / (2 * tp + fp + fneg) as f64 };
        precision.push(p);
        recall.push(rc);
        f1.push(f);
    }
    MetricOracle {
        accuracy: correct as f64 / n as f64,
        precision,
        recall,
        f1,
    }
}

/// Exhaustive Gini split search: every feature, every midpoint between
/// adjacent distinct values, scored with exact rational arithmetic.
/// Returns (feature, threshold, weighted impurity) of the lowest impurity;
/// ties keep the earliest feature, then the lowest threshold.
pub fn exhaustive_split(table: &DataTable) -> Option<(usize, f64, f64)> {
    let n = table.n_rows();
    let k = table.n_classes();
    // Impurity as num / den.
    let mut best: Option<(usize, f64, u128, u128)> = None;
    for f in 0..table.n_features() {
        let mut values = table.features.column(f);
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let mut left = vec![0u128; k];
            let mut right = vec![0u128; k];
            for i in 0..n {
                if table.features.get(i, f) <= t {
                    left[table.labels[i]] += 1;
                } else {
                    right[table.labels[i]] += 1;
                }
            }
            // n·G = Σ_side (n_s² − Σ c²) / n_s
            let (nl, nr): (u128, u128) = (left.iter().sum(), right.iter().sum());
            let a = nl * nl - left.iter().map(|c| c * c).sum::<u128>();
            let b = nr * nr - right.iter().map(|c| c * c).sum::<u128>();
            let (num, den) = (a * nr + b * nl, nl * nr * n as u128);
            if best.is_none_or(|(_, _, bn, bd)| num * bd < bn * den) {
                best = Some((f, t, num, den));
            }
        }
    }
    best.map(|(f, t, num, den)| (f, t, num as f64 / den as f64))
}

/// All-pairs KNN oracle: full sort by (squared distance, index), majority
/// vote with ties to the smallest class.
pub fn knn_oracle(train: &DataTable, row: &[f64], k: usize) -> usize {
    let mut d: Vec<(f64, usize)> = (0..train.n_rows())
        .map(|i| {
            let dist = train.features.row(i).iter().zip(row).map(|(a, b)| (a - b).powi(2)).sum();
            (dist, i)
        })
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut votes = vec![0usize; train.n_classes()];
    for &(_, i) in &d[..k] {
        votes[train.labels[i]] += 1;
    }
    let max = *votes.iter().max().unwrap();
    votes.iter().position(|&v| v == max).unwrap()
}
