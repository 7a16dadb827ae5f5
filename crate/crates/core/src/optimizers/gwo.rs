//! Binary Grey Wolf Optimizer.
//!
//! Wolves move toward the three best positions found so far (alpha, beta,
//! delta) with the coefficient `a` decaying linearly from 2 to 0. Positions
//! are 0/1 vectors; the averaged continuous step is mapped back to bits
//! through a transfer function.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitness::FeatureMask;
use crate::rng::{self, Rng};

use super::{random_mask, FeatureSelector, FitnessFn, SelectionResult};

const SIGMOID_SLOPE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Transfer {
    /// Bit set with probability 1 / (1 + exp(−10 (y − 0.5))).
    #[default]
    Sigmoid,
    ThresholdHalf,
}

impl Transfer {
    pub fn probability(self, y: f64) -> f64 {
        match self {
            Transfer::Sigmoid => 1.0 / (1.0 + (-SIGMOID_SLOPE * (y - 0.5)).exp()),
            Transfer::ThresholdHalf => f64::from(u8::from(y >= 0.5)),
        }
    }

    fn bit(self, y: f64, rng: &mut Rng) -> bool {
        match self {
            Transfer::Sigmoid => rng.gen::<f64>() < self.probability(y),
            Transfer::ThresholdHalf => y >= 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GwoConfig {
    pub n_iterations: usize,
    pub population_size: usize,
    pub seed: u64,
    pub transfer: Transfer,
}

impl Default for GwoConfig {
    fn default() -> Self {
        GwoConfig {
            n_iterations: 20,
            population_size: 20,
            seed: 42,
            transfer: Transfer::Sigmoid,
        }
    }
}

impl GwoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 3 {
            return Err(Error::config("GWO needs at least 3 wolves"));
        }
        if self.n_iterations == 0 {
            return Err(Error::config("GWO needs at least one iteration"));
        }
        Ok(())
    }
}

/// `a` at iteration `t` of `total`: 2 at the start, 0 at the end.
pub fn coefficient_a(t: usize, total: usize) -> f64 {
    2.0 * (1.0 - t as f64 / total as f64)
}

/// One leader's pull on one coordinate: returns (X_L', A).
pub fn leader_step(leader: f64, x: f64, a: f64, r1: f64, r2: f64) -> (f64, f64) {
    let big_a = 2.0 * a * r1 - a;
    let big_c = 2.0 * r2;
    (leader - big_a * (big_c * leader - x).abs(), big_a)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Leader {
    pub position: FeatureMask,
    pub fitness: f64,
}

/// Current pack and its three best-ever leaders.
#[derive(Debug, Clone)]
pub struct WolfPack {
    pub positions: Vec<FeatureMask>,
    pub fitnesses: Vec<f64>,
    /// alpha, beta, delta
    pub leaders: [Leader; 3],
}

impl WolfPack {
    fn from_initial(positions: Vec<FeatureMask>, fitnesses: Vec<f64>) -> Self {
        let mut order: Vec<usize> = (0..positions.len()).collect();
        order.sort_by(|&a, &b| fitnesses[a].total_cmp(&fitnesses[b]));
        let leader = |r: usize| Leader {
            position: positions[order[r]].clone(),
            fitness: fitnesses[order[r]],
        };
        let leaders = [leader(0), leader(1), leader(2)];
        WolfPack {
            positions,
            fitnesses,
            leaders,
        }
    }

    /// Inserts a candidate into the leader ranks if it strictly beats one.
    fn offer(&mut self, position: &FeatureMask, fitness: f64) {
        if let Some(rank) = self.leaders.iter().position(|l| fitness < l.fitness) {
            for r in (rank + 1..3).rev() {
                self.leaders[r] = self.leaders[r - 1].clone();
            }
            self.leaders[rank] = Leader {
                position: position.clone(),
                fitness,
            };
        }
    }

    pub fn alpha(&self) -> &Leader {
        &self.leaders[0]
    }

    /// alpha ≤ beta ≤ delta, and every wolf that is not itself a leader is
    /// no better than delta.
    pub fn leaders_ordered(&self) -> bool {
        let [a, b, d] = &self.leaders;
        a.fitness <= b.fitness
            && b.fitness <= d.fitness
            && self
                .fitnesses
                .iter()
                .all(|&f| f >= d.fitness || self.leaders.iter().any(|l| l.fitness == f))
    }
}

pub struct Gwo {
    pub config: GwoConfig,
}

impl Gwo {
    pub fn new(config: GwoConfig) -> Self {
        Gwo { config }
    }

    /// Runs the optimizer, calling `observe` with the pack after
    /// initialization and after every iteration.
    pub fn run_observed(
        &self,
        fitness: &mut FitnessFn<'_>,
        d: usize,
        observe: &mut dyn FnMut(&WolfPack),
    ) -> Result<SelectionResult> {
        let cfg = &self.config;
        cfg.validate()?;
        if d == 0 {
            return Err(Error::config("feature count must be at least 1"));
        }
        let mut fes = 0usize;
        let mut init_rng = rng::stream(cfg.seed, &[0x6A0]);
        let mut positions = Vec::with_capacity(cfg.population_size);
        let mut fitnesses = Vec::with_capacity(cfg.population_size);
        for _ in 0..cfg.population_size {
            let m = random_mask(d, &mut init_rng);
            fitnesses.push(fitness(&m)?);
            fes += 1;
            positions.push(m);
        }
        let mut pack = WolfPack::from_initial(positions, fitnesses);
        observe(&pack);
        let mut trace = vec![pack.alpha().fitness];

        for t in 0..cfg.n_iterations {
            let a = coefficient_a(t, cfg.n_iterations);
            let leaders: Vec<Vec<f64>> = pack.leaders.iter().map(|l| l.position.as_reals()).collect();
            let mut moved = Vec::with_capacity(cfg.population_size);
            for (w, pos) in pack.positions.iter().enumerate() {
                let mut wrng = rng::stream(cfg.seed, &[0x6A1, t as u64, w as u64]);
                let x = pos.as_reals();
                let bits = (0..d)
                    .map(|k| {
                        let y = leaders
                            .iter()
                            .map(|l| leader_step(l[k], x[k], a, wrng.gen(), wrng.gen()).0)
                            .sum::<f64>()
                            / 3.0;
                        cfg.transfer.bit(y, &mut wrng)
                    })
                    .collect();
                moved.push(FeatureMask::new(bits));
            }
            for (w, m) in moved.into_iter().enumerate() {
                let f = fitness(&m)?;
                fes += 1;
                pack.offer(&m, f);
                pack.positions[w] = m;
                pack.fitnesses[w] = f;
            }
            observe(&pack);
            trace.push(pack.alpha().fitness);
        }

        Ok(SelectionResult {
            best_mask: pack.alpha().position.clone(),
            best_fitness: pack.alpha().fitness,
            trace,
            evaluations_used: fes,
        })
    }
}

impl FeatureSelector for Gwo {
    fn name(&self) -> &'static str {
        "gwo"
    }

    fn select(&self, fitness: &mut FitnessFn<'_>, d: usize) -> Result<SelectionResult> {
        self.run_observed(fitness, d, &mut |_| {})
    }
}

pub fn run_gwo(fitness: &mut FitnessFn<'_>, d: usize, config: &GwoConfig) -> Result<SelectionResult> {
    Gwo::new(config.clone()).select(fitness, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn coefficient_schedule() {
        assert_eq!(coefficient_a(0, 20), 2.0);
        assert_eq!(coefficient_a(20, 20), 0.0);
        assert_eq!(coefficient_a(10, 20), 1.0);
    }

    #[test]
    fn constant_fitness_keeps_alpha() {
        let mut f = |_: &FeatureMask| Ok(-0.5);
        let mut first_alpha = None;
        let r = Gwo::new(GwoConfig { n_iterations: 5, population_size: 6, ..Default::default() })
            .run_observed(&mut f, 4, &mut |p| {
                let a = p.alpha().position.clone();
                assert_eq!(first_alpha.get_or_insert(a.clone()), &a);
            })
            .unwrap();
        assert!(r.trace.iter().all(|&v| v == -0.5));
        assert_eq!(r.trace.len(), 6);
        assert_eq!(r.evaluations_used, 36);
    }

    #[test]
    fn offer_keeps_ranks() {
        let m = |s: &str| FeatureMask::from_bit_string(s).unwrap();
        let mut pack = WolfPack::from_initial(vec![m("00"), m("01"), m("10"), m("11")], vec![-0.1, -0.4, -0.3, -0.2]);
        assert_eq!(pack.alpha().position, m("01"));
        pack.offer(&m("11"), -0.35);
        let f: Vec<f64> = pack.leaders.iter().map(|l| l.fitness).collect();
        assert_eq!(f, vec![-0.4, -0.35, -0.3]);
    }

    #[test]
    fn config_is_validated() {
        let mut f = |_: &FeatureMask| Ok(0.0);
        let bad = GwoConfig { population_size: 2, ..Default::default() };
        assert!(run_gwo(&mut f, 3, &bad).is_err());
    }

    proptest! {
        #[test]
        fn step_coefficient_bounded(t in 0usize..=50, r1 in 0.0f64..1.0, r2 in 0.0f64..1.0, l: bool, x: bool) {
            let a = coefficient_a(t, 50);
            prop_assert!((0.0..=2.0).contains(&a));
            let (_, big_a) = leader_step(f64::from(u8::from(l)), f64::from(u8::from(x)), a, r1, r2);
            prop_assert!(big_a.abs() <= a + 1e-12);
        }
    }
}
