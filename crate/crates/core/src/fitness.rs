//! Wrapper fitness: score a feature subset by training a classifier on the
//! selected columns and returning the negated validation accuracy.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{self, ClassifierSpec};
use crate::datasets::DataTable;
use crate::error::{Error, Result};
use crate::rng;

/// Fitness assigned to the empty subset: worse than any achievable −accuracy.
pub const ZERO_MASK_FITNESS: f64 = 1.0;

/// Binary inclusion vector over feature columns.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureMask(Vec<bool>);

impl FeatureMask {
    pub fn new(bits: Vec<bool>) -> Self {
        FeatureMask(bits)
    }

    pub fn zeros(d: usize) -> Self {
        FeatureMask(vec![false; d])
    }

    pub fn ones(d: usize) -> Self {
        FeatureMask(vec![true; d])
    }

    /// Mask whose bit `k` is bit `k` of `word` (LSB first).
    pub fn from_word(word: u64, d: usize) -> Self {
        FeatureMask((0..d).map(|k| word >> k & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn popcount(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn get(&self, k: usize) -> bool {
        self.0[k]
    }

    pub fn set(&mut self, k: usize, v: bool) {
        self.0[k] = v;
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Bits as 0.0 / 1.0.
    pub fn as_reals(&self) -> Vec<f64> {
        self.0.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }

    pub fn selected(&self) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(k, _)| k).collect()
    }

    pub fn to_bit_string(&self) -> String {
        self.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn from_bit_string(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::config(format!("invalid mask character `{other}`"))),
            })
            .collect::<Result<_>>()
            .map(FeatureMask)
    }
}

impl fmt::Debug for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FeatureMask({})", self.to_bit_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum FitnessMode {
    KfoldCv { folds: usize },
    Holdout { validation_fraction: f64 },
}

impl FitnessMode {
    pub fn kfold() -> Self {
        FitnessMode::KfoldCv { folds: 5 }
    }

    pub fn holdout() -> Self {
        FitnessMode::Holdout {
            validation_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessStrategy {
    #[serde(flatten)]
    pub mode: FitnessMode,
    pub classifier: ClassifierSpec,
    pub seed: u64,
}

/// Row partitions into (train, validation) index lists, over table positions.
pub fn kfold_partitions(n: usize, folds: usize, seed: u64) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng::stream(seed, &[0xF01D]));
    (0..folds)
        .map(|f| {
            let (lo, hi) = (f * n / folds, (f + 1) * n / folds);
            let val = perm[lo..hi].to_vec();
            let train = perm[..lo].iter().chain(&perm[hi..]).copied().collect();
            (train, val)
        })
        .collect()
}

/// Callback receiving the source row ids an evaluation touches.
pub type RowObserver = Arc<dyn Fn(&[usize]) + Send + Sync>;

/// Evaluates masks against one table with a fixed partition plan.
///
/// The partition is drawn once from the strategy seed, so every mask is
/// scored on the same folds. The evaluation counter is shared across threads.
pub struct FitnessEvaluator<'a> {
    table: &'a DataTable,
    strategy: FitnessStrategy,
    plan: Vec<(Vec<usize>, Vec<usize>)>,
    counter: AtomicUsize,
    observer: Option<RowObserver>,
}

impl<'a> FitnessEvaluator<'a> {
    pub fn new(table: &'a DataTable, strategy: FitnessStrategy) -> Result<Self> {
        let n = table.n_rows();
        let plan = match strategy.mode {
            FitnessMode::KfoldCv { folds } => {
                if folds < 2 {
                    return Err(Error::config("folds must be at least 2"));
                }
                for (c, &count) in table.class_counts().iter().enumerate() {
                    if count > 0 && count < folds {
                        return Err(Error::TooManyFolds {
                            folds,
                            class: table.class_names[c].clone(),
                            count,
                        });
                    }
                }
                kfold_partitions(n, folds, strategy.seed)
            }
            FitnessMode::Holdout { validation_fraction } => {
                if !(validation_fraction > 0.0 && validation_fraction < 1.0) {
                    return Err(Error::config("validation_fraction must lie in (0, 1)"));
                }
                let cut = (n as f64 * (1.0 - validation_fraction) + 1e-9).floor() as usize;
                if cut == 0 || cut >= n {
                    return Err(Error::InvalidSplit(format!(
                        "holdout fraction {validation_fraction} leaves an empty part of {n} rows"
                    )));
                }
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut rng::stream(strategy.seed, &[0x40D]));
                vec![(perm[..cut].to_vec(), perm[cut..].to_vec())]
            }
        };
        Ok(FitnessEvaluator {
            table,
            strategy,
            plan,
            counter: AtomicUsize::new(0),
            observer: None,
        })
    }

    /// Calls `observer` with the source row ids of every row an evaluation
    /// trains or validates on.
    pub fn with_observer(mut self, observer: RowObserver) -> Self {
        self.observer = Some(observer);
        self
    }

    pub fn evaluations(&self) -> usize {
        self.counter.load(Ordering::Relaxed)
    }

    pub fn strategy(&self) -> &FitnessStrategy {
        &self.strategy
    }

    pub fn partitions(&self) -> &[(Vec<usize>, Vec<usize>)] {
        &self.plan
    }

    /// −accuracy in [−1, 0], or [`ZERO_MASK_FITNESS`] for the empty mask.
    pub fn evaluate(&self, mask: &FeatureMask) -> Result<f64> {
        if mask.len() != self.table.n_features() {
            return Err(Error::LengthMismatch {
                left: mask.len(),
                right: self.table.n_features(),
            });
        }
        self.counter.fetch_add(1, Ordering::Relaxed);
        if mask.popcount() == 0 {
            return Ok(ZERO_MASK_FITNESS);
        }
        let masked = self.table.features.select_columns(&mask.selected());
        // Folds are scored in parallel and summed in fold order, so the
        // result does not depend on scheduling.
        let scores = self
            .plan
            .par_iter()
            .map(|(train, val)| {
                if let Some(observe) = &self.observer {
                    let ids: Vec<usize> = train.iter().chain(val).map(|&i| self.table.row_ids[i]).collect();
                    observe(&ids);
                }
                let y: Vec<usize> = train.iter().map(|&i| self.table.labels[i]).collect();
                let model = classifiers::fit_matrix(
                    &self.strategy.classifier,
                    &masked.select_rows(train),
                    &y,
                    &self.table.class_names,
                    self.strategy.seed,
                )?;
                let (pred, _) = model.predict(&masked.select_rows(val))?;
                let correct = pred
                    .iter()
                    .zip(val)
                    .filter(|(&p, &i)| p == self.table.labels[i])
                    .count();
                Ok(correct as f64 / val.len() as f64)
            })
            .collect::<Result<Vec<f64>>>()?;
        let total: f64 = scores.iter().sum();
        Ok(-(total / self.plan.len() as f64))
    }
}

/// One-shot evaluation of `mask` on `table`.
pub fn evaluate_mask(table: &DataTable, mask: &FeatureMask, strategy: &FitnessStrategy) -> Result<f64> {
    FitnessEvaluator::new(table, strategy.clone())?.evaluate(mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::Matrix;
    use proptest::prelude::*;

    /// Feature 0 determines the class; features 1 and 2 are noise.
    fn toy() -> DataTable {
        let rows: Vec<[f64; 3]> = (0..40)
            .map(|i| {
                let f = if i < 20 { i as f64 / 50.0 } else { 0.6 + (i - 20) as f64 / 50.0 };
                [f, ((i * 7) % 11) as f64 / 10.0, ((i * 3) % 5) as f64 / 4.0]
            })
            .collect();
        let labels = (0..40).map(|i| usize::from(i >= 20)).collect();
        DataTable::new(
            Matrix::from_rows(&rows).unwrap(),
            labels,
            vec!["a".into(), "b".into(), "c".into()],
            vec!["x".into(), "y".into()],
        )
        .unwrap()
    }

    fn strategy(mode: FitnessMode) -> FitnessStrategy {
        FitnessStrategy {
            mode,
            classifier: ClassifierSpec::default(),
            seed: 42,
        }
    }

    #[test]
    fn separable_mask_scores_minus_one() {
        let t = toy();
        let m = FeatureMask::new(vec![true, false, false]);
        assert_eq!(evaluate_mask(&t, &m, &strategy(FitnessMode::kfold())).unwrap(), -1.0);
        assert_eq!(evaluate_mask(&t, &m, &strategy(FitnessMode::holdout())).unwrap(), -1.0);
    }

    #[test]
    fn zero_mask_is_sentinel_and_counted() {
        let t = toy();
        let ev = FitnessEvaluator::new(&t, strategy(FitnessMode::kfold())).unwrap();
        assert_eq!(ev.evaluate(&FeatureMask::zeros(3)).unwrap(), ZERO_MASK_FITNESS);
        ev.evaluate(&FeatureMask::ones(3)).unwrap();
        assert_eq!(ev.evaluations(), 2);
    }

    #[test]
    fn too_many_folds_names_class() {
        let t = toy().select_rows(&[0, 1, 2, 20, 21, 22, 23, 24, 25]);
        let err = FitnessEvaluator::new(&t, strategy(FitnessMode::KfoldCv { folds: 4 })).err().unwrap();
        assert!(matches!(err, Error::TooManyFolds { ref class, count: 3, .. } if class == "x"), "{err}");
    }

    #[test]
    fn mask_length_is_checked() {
        let t = toy();
        assert!(evaluate_mask(&t, &FeatureMask::ones(2), &strategy(FitnessMode::kfold())).is_err());
    }

    #[test]
    fn bit_strings() {
        let m = FeatureMask::from_bit_string("1010").unwrap();
        assert_eq!(m.selected(), vec![0, 2]);
        assert_eq!(m.to_bit_string(), "1010");
        assert_eq!(FeatureMask::from_word(0b101, 4), m);
        assert!(FeatureMask::from_bit_string("10x").is_err());
    }

    proptest! {
        #[test]
        fn folds_partition_rows(n in 2usize..300, folds in 2usize..10, seed: u64) {
            prop_assume!(folds <= n);
            let plan = kfold_partitions(n, folds, seed);
            let mut seen: Vec<usize> = plan.iter().flat_map(|(_, v)| v.clone()).collect();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
            let sizes: Vec<usize> = plan.iter().map(|(_, v)| v.len()).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            for (train, val) in &plan {
                prop_assert_eq!(train.len() + val.len(), n);
                prop_assert!(train.iter().all(|i| !val.contains(i)));
            }
        }

        #[test]
        fn fitness_range_and_column_consistency(word in 1u64..8, holdout: bool) {
            let t = toy();
            let mode = if holdout { FitnessMode::holdout() } else { FitnessMode::kfold() };
            let s = strategy(mode);
            let m = FeatureMask::from_word(word, 3);
            let f = evaluate_mask(&t, &m, &s).unwrap();
            prop_assert!((-1.0..=0.0).contains(&f));
            let restricted = t.select_columns(&m.selected());
            let g = evaluate_mask(&restricted, &FeatureMask::ones(m.popcount()), &s).unwrap();
            prop_assert_eq!(f.to_bits(), g.to_bits());
            prop_assert_eq!(f.to_bits(), evaluate_mask(&t, &m, &s).unwrap().to_bits());
        }
    }
}
