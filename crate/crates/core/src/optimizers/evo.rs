//! Binary Energy Valley Optimizer.
//!
//! Particles are binary masks whose energy level (NEL) is their fitness. Each
//! sweep moves every particle toward the best particle and either the
//! population centre (particles below the energy barrier) or the
//! gravitational point of its two nearest neighbours (particles at or above
//! it). Candidates are binarized, evaluated, merged with the old population,
//! and the best `n_particles` survive. The run stops once the fitness
//! evaluation budget `max_fes` is spent, counting the initial population.

use std::sync::Arc;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitness::FeatureMask;
use crate::rng::{self, Rng};

use super::{random_mask, FeatureSelector, FitnessFn, SelectionResult};

/// How a fractional candidate becomes a mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Binarization {
    /// Bit k is set with probability y_k.
    #[default]
    Bernoulli,
    /// Bit k is set when y_k ≥ 0.5.
    ThresholdHalf,
}

impl Binarization {
    pub fn apply(self, y: &[f64], rng: &mut Rng) -> FeatureMask {
        FeatureMask::new(
            y.iter()
                .map(|&v| match self {
                    Binarization::Bernoulli => rng.gen::<f64>() < v,
                    Binarization::ThresholdHalf => v >= 0.5,
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvoConfig {
    pub max_fes: usize,
    pub n_particles: usize,
    pub seed: u64,
    pub binarization: Binarization,
}

impl Default for EvoConfig {
    fn default() -> Self {
        EvoConfig {
            max_fes: 100,
            n_particles: 40,
            seed: 42,
            binarization: Binarization::Bernoulli,
        }
    }
}

impl EvoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_particles < 3 {
            return Err(Error::config("EVO needs at least 3 particles"));
        }
        if self.max_fes < self.n_particles {
            return Err(Error::config("EVO max_fes must be at least n_particles"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: FeatureMask,
    pub nel: f64,
}

/// Population-level threshold splitting exploiting from exploring particles.
pub trait EnergyBarrier: Send + Sync {
    fn barrier(&self, population: &[Particle]) -> f64;
}

/// Mean energy level of the population.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeanBarrier;

impl EnergyBarrier for MeanBarrier {
    fn barrier(&self, population: &[Particle]) -> f64 {
        energy_barrier(population)
    }
}

pub fn hamming_distance(a: &FeatureMask, b: &FeatureMask) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.bits().iter().zip(b.bits()).filter(|(x, y)| x != y).count())
}

/// The two particles nearest to particle `i` by Hamming distance, nearest
/// first; equal distances order by index. Requires at least 3 particles.
pub fn cluster_points(i: usize, population: &[Particle]) -> (usize, usize) {
    let me = &population[i].position;
    let mut others: Vec<(usize, usize)> = population
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(j, p)| (hamming_distance(me, &p.position).unwrap_or(usize::MAX), j))
        .collect();
    others.sort_unstable();
    (others[0].1, others[1].1)
}

/// Per-bit mean of all positions.
pub fn center_point(population: &[Particle]) -> Vec<f64> {
    let d = population.first().map_or(0, |p| p.position.len());
    let mut sum = vec![0.0; d];
    for p in population {
        for (s, &b) in sum.iter_mut().zip(p.position.bits()) {
            if b {
                *s += 1.0;
            }
        }
    }
    let n = population.len() as f64;
    sum.into_iter().map(|s| s / n).collect()
}

/// Per-bit mean of two positions.
pub fn gravitational_point(a: &FeatureMask, b: &FeatureMask) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.bits()
        .iter()
        .zip(b.bits())
        .map(|(&x, &y)| (u8::from(x) + u8::from(y)) as f64 / 2.0)
        .collect())
}

/// Mean NEL of the population.
pub fn energy_barrier(population: &[Particle]) -> f64 {
    population.iter().map(|p| p.nel).sum::<f64>() / population.len() as f64
}

/// Position of `nel` between the best and worst levels, in [0, 1].
pub fn slope(nel: f64, best_nel: f64, worst_nel: f64) -> f64 {
    let span = worst_nel - best_nel;
    if !(span > 0.0) {
        return 0.0;
    }
    ((nel - best_nel) / span).clamp(0.0, 1.0)
}

/// Population quantities a particle update reads.
#[derive(Debug, Clone)]
pub struct UpdateContext<'a> {
    pub best: &'a FeatureMask,
    pub center: &'a [f64],
    pub gravitational: &'a [f64],
    pub barrier: f64,
    pub slope: f64,
}

/// Fractional candidate before binarization, clamped to [0, 1].
pub fn candidate_vector(particle: &Particle, ctx: &UpdateContext<'_>, rng: &mut Rng) -> Vec<f64> {
    let x = particle.position.as_reals();
    let best = ctx.best.as_reals();
    let (attractor, scale) = if particle.nel < ctx.barrier {
        (ctx.center, 1.0 - ctx.slope)
    } else {
        (ctx.gravitational, ctx.slope)
    };
    x.iter()
        .enumerate()
        .map(|(k, &xk)| {
            let r_best = scale * rng.gen::<f64>();
            let r_attr = scale * rng.gen::<f64>();
            (xk + r_best * (best[k] - xk) + r_attr * (attractor[k] - xk)).clamp(0.0, 1.0)
        })
        .collect()
}

pub fn update_position(
    particle: &Particle,
    ctx: &UpdateContext<'_>,
    binarization: Binarization,
    rng: &mut Rng,
) -> FeatureMask {
    let y = candidate_vector(particle, ctx, rng);
    binarization.apply(&y, rng)
}

/// Stable sort by NEL; ties keep their relative order.
fn sort_by_nel(population: &mut [Particle]) {
    population.sort_by(|a, b| a.nel.total_cmp(&b.nel));
}

pub struct Evo {
    pub config: EvoConfig,
    barrier: Arc<dyn EnergyBarrier>,
}

impl Evo {
    pub fn new(config: EvoConfig) -> Self {
        Evo {
            config,
            barrier: Arc::new(MeanBarrier),
        }
    }

    pub fn with_barrier(mut self, barrier: Arc<dyn EnergyBarrier>) -> Self {
        self.barrier = barrier;
        self
    }

    /// Runs the optimizer, calling `observe` with the population after every
    /// merge-and-truncate step.
    pub fn run_observed(
        &self,
        fitness: &mut FitnessFn<'_>,
        d: usize,
        observe: &mut dyn FnMut(&[Particle]),
    ) -> Result<SelectionResult> {
        let cfg = &self.config;
        cfg.validate()?;
        if d == 0 {
            return Err(Error::config("feature count must be at least 1"));
        }
        let n = cfg.n_particles;
        let mut fes = 0usize;

        let mut init_rng = rng::stream(cfg.seed, &[0xE0]);
        let mut population = Vec::with_capacity(2 * n);
        for _ in 0..n {
            let position = random_mask(d, &mut init_rng);
            let nel = fitness(&position)?;
            fes += 1;
            population.push(Particle { position, nel });
        }
        sort_by_nel(&mut population);
        observe(&population);
        let mut trace = vec![population[0].nel];

        let mut iteration = 0u64;
        while fes < cfg.max_fes {
            iteration += 1;
            let best = population[0].position.clone();
            let best_nel = population[0].nel;
            let worst_nel = population[n - 1].nel;
            let center = center_point(&population);
            let barrier = self.barrier.barrier(&population);

            let mut fresh = Vec::with_capacity(n);
            for i in 0..n {
                let (a, b) = cluster_points(i, &population);
                let gravitational = gravitational_point(&population[a].position, &population[b].position)?;
                let ctx = UpdateContext {
                    best: &best,
                    center: &center,
                    gravitational: &gravitational,
                    barrier,
                    slope: slope(population[i].nel, best_nel, worst_nel),
                };
                let mut prng = rng::stream(cfg.seed, &[iteration, i as u64]);
                let position = update_position(&population[i], &ctx, cfg.binarization, &mut prng);
                let nel = fitness(&position)?;
                fes += 1;
                fresh.push(Particle { position, nel });
                if fes >= cfg.max_fes {
                    break;
                }
            }
            population.extend(fresh);
            sort_by_nel(&mut population);
            population.truncate(n);
            observe(&population);
            trace.push(population[0].nel);
        }

        Ok(SelectionResult {
            best_mask: population[0].position.clone(),
            best_fitness: population[0].nel,
            trace,
            evaluations_used: fes,
        })
    }
}

impl FeatureSelector for Evo {
    fn name(&self) -> &'static str {
        "evo"
    }

    fn select(&self, fitness: &mut FitnessFn<'_>, d: usize) -> Result<SelectionResult> {
        self.run_observed(fitness, d, &mut |_| {})
    }
}

/// Convenience wrapper with the default energy barrier.
pub fn run_evo(fitness: &mut FitnessFn<'_>, d: usize, config: &EvoConfig) -> Result<SelectionResult> {
    Evo::new(config.clone()).select(fitness, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(bits: &str) -> FeatureMask {
        FeatureMask::from_bit_string(bits).unwrap()
    }

    fn pop(bits: &[&str]) -> Vec<Particle> {
        bits.iter().map(|b| Particle { position: mask(b), nel: 0.0 }).collect()
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming_distance(&mask("101"), &mask("110")).unwrap(), 2);
        assert_eq!(hamming_distance(&mask("101"), &mask("101")).unwrap(), 0);
        assert_eq!(hamming_distance(&mask("000"), &mask("111")).unwrap(), 3);
        assert!(hamming_distance(&mask("0"), &mask("01")).is_err());
    }

    #[test]
    fn cluster_point_examples() {
        let p = pop(&["00", "01", "11"]);
        assert_eq!(cluster_points(0, &p), (1, 2));
        assert_eq!(cluster_points(2, &p), (1, 0));
        let same = pop(&["10", "10", "10", "10"]);
        assert_eq!(cluster_points(2, &same), (0, 1));
        assert_eq!(cluster_points(0, &same), (1, 2));
    }

    #[test]
    fn center_and_gravitational_examples() {
        assert_eq!(center_point(&pop(&["10", "00"])), vec![0.5, 0.0]);
        assert_eq!(center_point(&pop(&["101", "101"])), vec![1.0, 0.0, 1.0]);
        assert_eq!(center_point(&pop(&["1", "0", "1", "0"])), vec![0.5]);
        assert_eq!(gravitational_point(&mask("11"), &mask("01")).unwrap(), vec![0.5, 1.0]);
        assert_eq!(gravitational_point(&mask("10"), &mask("10")).unwrap(), vec![1.0, 0.0]);
        assert_eq!(gravitational_point(&mask("100"), &mask("001")).unwrap(), vec![0.5, 0.0, 0.5]);
        assert!(gravitational_point(&mask("1"), &mask("10")).is_err());
    }

    #[test]
    fn barrier_and_slope_examples() {
        let with = |nels: &[f64]| -> Vec<Particle> {
            nels.iter().map(|&nel| Particle { position: mask("0"), nel }).collect()
        };
        assert_eq!(energy_barrier(&with(&[-1.0, 0.0])), -0.5);
        assert_eq!(energy_barrier(&with(&[-0.3; 4])), -0.3);
        assert!((energy_barrier(&with(&[-0.9, -0.8, -0.7])) + 0.8).abs() < 1e-12);
        assert_eq!(slope(-1.0, -1.0, -0.5), 0.0);
        assert_eq!(slope(-0.5, -1.0, -0.5), 1.0);
        assert!((slope(-0.8, -1.0, -0.5) - 0.4).abs() < 1e-12);
        assert_eq!(slope(-0.7, -0.7, -0.7), 0.0);
    }

    #[test]
    fn update_fixed_points() {
        let x = mask("1010");
        let reals = x.as_reals();
        let particle = Particle { position: x.clone(), nel: -0.9 };
        // Branch A with x = best = centre.
        let ctx = UpdateContext {
            best: &x,
            center: &reals,
            gravitational: &[0.5; 4],
            barrier: -0.5,
            slope: 0.3,
        };
        let mut r = rng::seeded(1);
        assert_eq!(update_position(&particle, &ctx, Binarization::ThresholdHalf, &mut r), x);
        // Branch B with zero slope.
        let other = mask("0101");
        let ctx = UpdateContext {
            best: &other,
            center: &[0.5; 4],
            gravitational: &[0.0; 4],
            barrier: -1.0,
            slope: 0.0,
        };
        assert_eq!(update_position(&particle, &ctx, Binarization::ThresholdHalf, &mut r), x);
    }

    #[test]
    fn config_is_validated() {
        let mut f = |_: &FeatureMask| Ok(0.0);
        let bad = EvoConfig { n_particles: 2, max_fes: 10, ..Default::default() };
        assert!(run_evo(&mut f, 3, &bad).is_err());
        let bad = EvoConfig { n_particles: 10, max_fes: 5, ..Default::default() };
        assert!(run_evo(&mut f, 3, &bad).is_err());
        assert!(run_evo(&mut f, 0, &EvoConfig::default()).is_err());
    }

    #[test]
    fn constant_fitness_keeps_flat_trace() {
        let mut f = |_: &FeatureMask| Ok(-0.25);
        let cfg = EvoConfig { max_fes: 60, n_particles: 10, seed: 3, ..Default::default() };
        let r = run_evo(&mut f, 5, &cfg).unwrap();
        assert!(r.trace.iter().all(|&v| v == -0.25));
        assert_eq!(r.evaluations_used, 60);
    }

    #[test]
    fn fitness_errors_propagate() {
        let mut calls = 0;
        let mut f = |_: &FeatureMask| {
            calls += 1;
            if calls > 12 { Err(Error::config("boom")) } else { Ok(0.0) }
        };
        let cfg = EvoConfig { max_fes: 60, n_particles: 10, ..Default::default() };
        assert!(run_evo(&mut f, 4, &cfg).is_err());
    }
}
