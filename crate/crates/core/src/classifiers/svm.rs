//! RBF-kernel support vector machine trained with a simplified SMO, made
//! multiclass by one-vs-rest.

use std::collections::{HashMap, VecDeque};
use std::rc::Rc;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::datasets::Matrix;
use crate::error::{Error, Result};
use crate::rng::{self, Rng};

use super::{Classifier, Predictor};

const KERNEL_CACHE_BYTES: usize = 256 << 20;
const MIN_ALPHA_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmParams {
    pub c: f64,
    /// Kernel width; `None` selects 1 / (d · var(X)).
    pub gamma: Option<f64>,
    /// Consecutive sweeps without an update before stopping.
    pub max_passes: usize,
    pub tolerance: f64,
    /// Hard cap on sweeps over the training set.
    pub max_iterations: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            gamma: None,
            max_passes: 5,
            tolerance: 1e-3,
            max_iterations: 1000,
        }
    }
}

impl SvmParams {
    fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::config("svm c must be positive"));
        }
        if self.gamma.is_some_and(|g| !(g > 0.0)) {
            return Err(Error::config("svm gamma must be positive"));
        }
        if self.max_passes == 0 || self.max_iterations == 0 {
            return Err(Error::config("svm max_passes and max_iterations must be positive"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::config("svm tolerance must be positive"));
        }
        Ok(())
    }

    /// Gamma actually used for `x`.
    pub fn resolve_gamma(&self, x: &Matrix) -> f64 {
        if let Some(g) = self.gamma {
            return g;
        }
        let vals = x.as_slice();
        if vals.is_empty() {
            return 1.0;
        }
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        if var > 0.0 {
            1.0 / (x.cols() as f64 * var)
        } else {
            1.0
        }
    }
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// FIFO cache of full kernel rows.
struct KernelRows<'a> {
    x: &'a Matrix,
    gamma: f64,
    rows: HashMap<usize, Rc<Vec<f64>>>,
    order: VecDeque<usize>,
    capacity: usize,
}

impl<'a> KernelRows<'a> {
    fn new(x: &'a Matrix, gamma: f64) -> Self {
        let capacity = (KERNEL_CACHE_BYTES / (8 * x.rows().max(1))).max(2);
        KernelRows {
            x,
            gamma,
            rows: HashMap::new(),
            order: VecDeque::new(),
            capacity,
        }
    }

    fn row(&mut self, i: usize) -> Rc<Vec<f64>> {
        if let Some(r) = self.rows.get(&i) {
            return Rc::clone(r);
        }
        let xi = self.x.row(i);
        let r: Rc<Vec<f64>> = Rc::new(self.x.iter_rows().map(|xj| rbf(xi, xj, self.gamma)).collect());
        if self.order.len() >= self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.rows.remove(&old);
            }
        }
        self.order.push_back(i);
        self.rows.insert(i, Rc::clone(&r));
        r
    }
}

/// One binary machine from SMO, with training-set state kept for inspection.
#[derive(Debug, Clone)]
pub struct BinaryMachine {
    pub alphas: Vec<f64>,
    pub b: f64,
    /// True when training stopped because `max_passes` sweeps made no update.
    pub converged: bool,
    support: Matrix,
    coef: Vec<f64>,
    gamma: f64,
}

impl BinaryMachine {
    pub fn decision(&self, row: &[f64]) -> f64 {
        self.support
            .iter_rows()
            .zip(&self.coef)
            .map(|(sv, c)| c * rbf(sv, row, self.gamma))
            .sum::<f64>()
            + self.b
    }
}

/// Trains one machine on targets in {-1, +1}.
pub fn train_binary(x: &Matrix, targets: &[f64], params: &SvmParams, gamma: f64, rng: &mut Rng) -> BinaryMachine {
    let n = x.rows();
    let c = params.c;
    let tol = params.tolerance;
    let mut kernel = KernelRows::new(x, gamma);
    let mut alpha = vec![0.0; n];
    let mut err: Vec<f64> = targets.iter().map(|y| -y).collect();
    let mut b = 0.0;

    let mut step = |i: usize, j: usize, alpha: &mut [f64], err: &mut [f64], b: &mut f64| -> bool {
        let (ai, aj, yi, yj) = (alpha[i], alpha[j], targets[i], targets[j]);
        let (lo, hi) = if yi != yj {
            ((aj - ai).max(0.0), (c + aj - ai).min(c))
        } else {
            ((ai + aj - c).max(0.0), (ai + aj).min(c))
        };
        if hi - lo < 1e-12 {
            return false;
        }
        let ki = kernel.row(i);
        let kij = ki[j];
        let eta = 2.0 * kij - 2.0;
        if eta >= 0.0 {
            return false;
        }
        let aj_new = (aj - yj * (err[i] - err[j]) / eta).clamp(lo, hi);
        if (aj_new - aj).abs() < MIN_ALPHA_STEP {
            return false;
        }
        let ai_new = ai + yi * yj * (aj - aj_new);
        let (dai, daj) = (ai_new - ai, aj_new - aj);
        let b1 = *b - err[i] - yi * dai - yj * daj * kij;
        let b2 = *b - err[j] - yi * dai * kij - yj * daj;
        let b_new = if ai_new > 0.0 && ai_new < c {
            b1
        } else if aj_new > 0.0 && aj_new < c {
            b2
        } else {
            (b1 + b2) / 2.0
        };
        let kj = kernel.row(j);
        let db = b_new - *b;
        for k in 0..n {
            err[k] += yi * dai * ki[k] + yj * daj * kj[k] + db;
        }
        alpha[i] = ai_new;
        alpha[j] = aj_new;
        *b = b_new;
        true
    };

    let mut passes = 0;
    let mut converged = false;
    for _ in 0..params.max_iterations {
        let mut changed = 0;
        for i in 0..n {
            let r = targets[i] * err[i];
            if !((r < -tol && alpha[i] < c) || (r > tol && alpha[i] > 0.0)) {
                continue;
            }
            let j = {
                let j = rng.gen_range(0..n - 1);
                if j >= i { j + 1 } else { j }
            };
            if step(i, j, &mut alpha, &mut err, &mut b) {
                changed += 1;
                continue;
            }
            let offset = rng.gen_range(0..n);
            for t in 0..n {
                let j = (offset + t) % n;
                if j != i && step(i, j, &mut alpha, &mut err, &mut b) {
                    changed += 1;
                    break;
                }
            }
        }
        if changed == 0 {
            passes += 1;
            if passes >= params.max_passes {
                converged = true;
                break;
            }
        } else {
            passes = 0;
        }
    }

    let support_idx: Vec<usize> = (0..n).filter(|&i| alpha[i] > 0.0).collect();
    BinaryMachine {
        support: x.select_rows(&support_idx),
        coef: support_idx.iter().map(|&i| alpha[i] * targets[i]).collect(),
        alphas: alpha,
        b,
        converged,
        gamma,
    }
}

impl Classifier for SvmParams {
    fn name(&self) -> &'static str {
        "svm_rbf"
    }

    fn fit(&self, x: &Matrix, y: &[usize], n_classes: usize, seed: u64) -> Result<Box<dyn Predictor>> {
        self.validate()?;
        let gamma = self.resolve_gamma(x);
        let machines = (0..n_classes)
            .map(|class| {
                if !y.contains(&class) {
                    return None;
                }
                let targets: Vec<f64> = y.iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect();
                let mut rng = rng::stream(seed, &[0x5F, class as u64]);
                Some(train_binary(x, &targets, self, gamma, &mut rng))
            })
            .collect();
        Ok(Box::new(SvmRbf { machines }))
    }
}

/// One-vs-rest machines; the highest decision value wins, ties to the
/// smaller class. Classes absent from training never win.
#[derive(Debug, Clone)]
pub struct SvmRbf {
    machines: Vec<Option<BinaryMachine>>,
}

impl Predictor for SvmRbf {
    fn predict_row(&self, row: &[f64]) -> usize {
        let mut best = (0, f64::NEG_INFINITY);
        for (c, m) in self.machines.iter().enumerate() {
            if let Some(m) = m {
                let v = m.decision(row);
                if v > best.1 {
                    best = (c, v);
                }
            }
        }
        best.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_gamma() {
        let x = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        // var of {0,1,1,0} = 0.25, d = 2
        assert_eq!(SvmParams::default().resolve_gamma(&x), 2.0);
        let flat = Matrix::from_rows(&[[0.5], [0.5]]).unwrap();
        assert_eq!(SvmParams::default().resolve_gamma(&flat), 1.0);
    }

    #[test]
    fn absent_class_never_predicted() {
        let x = Matrix::from_rows(&[[0.0], [0.1], [0.9], [1.0]]).unwrap();
        let m = SvmParams::default().fit(&x, &[0, 0, 2, 2], 3, 1).unwrap();
        for v in [0.0, 0.5, 1.0] {
            assert_ne!(m.predict_row(&[v]), 1);
        }
    }

    #[test]
    fn rejects_bad_params() {
        let x = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
        let p = SvmParams { c: 0.0, ..Default::default() };
        assert!(p.fit(&x, &[0, 1], 2, 0).is_err());
    }
}
