//! Feature-subset optimizers.
//!
//! Every optimizer implements [`FeatureSelector`]: given a fitness closure
//! over [`FeatureMask`]s (lower is better) and the feature count, it returns
//! a [`SelectionResult`]. Optimizers are resolved by name via [`registry`].

pub mod evo;
pub mod gwo;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitness::FeatureMask;

pub use evo::{Binarization, EnergyBarrier, Evo, EvoConfig, MeanBarrier, Particle};
pub use gwo::{Gwo, GwoConfig, Transfer, WolfPack};

/// Initial position: each bit set with probability 1/2. An all-zero draw
/// gets one uniformly chosen bit set, so the search never starts with only
/// empty subsets.
pub(crate) fn random_mask(d: usize, rng: &mut crate::rng::Rng) -> FeatureMask {
    use rand::Rng as _;
    let mut m = FeatureMask::new((0..d).map(|_| rng.gen::<f64>() > 0.5).collect());
    if m.popcount() == 0 {
        m.set(rng.gen_range(0..d), true);
    }
    m
}

/// Fitness callback handed to optimizers.
pub type FitnessFn<'a> = dyn FnMut(&FeatureMask) -> Result<f64> + 'a;

/// Outcome of a selection run; shared by all optimizers.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub best_mask: FeatureMask,
    pub best_fitness: f64,
    /// Best fitness after initialization (index 0) and after every iteration.
    pub trace: Vec<f64>,
    pub evaluations_used: usize,
}

pub type EvoResult = SelectionResult;

impl SelectionResult {
    /// `(iteration, best_fitness)` pairs.
    pub fn trace_pairs(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.trace.iter().copied().enumerate()
    }
}

pub trait FeatureSelector: Send + Sync {
    fn name(&self) -> &'static str;

    fn select(&self, fitness: &mut FitnessFn<'_>, d: usize) -> Result<SelectionResult>;
}

/// Serializable optimizer choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerSpec {
    #[default]
    None,
    Evo(EvoConfig),
    Gwo(GwoConfig),
}

impl OptimizerSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            OptimizerSpec::None => "none",
            OptimizerSpec::Evo(_) => "evo",
            OptimizerSpec::Gwo(_) => "gwo",
        }
    }

    /// `None` for the pass-through (no selection) choice.
    pub fn build(&self) -> Option<Box<dyn FeatureSelector>> {
        match self {
            OptimizerSpec::None => None,
            OptimizerSpec::Evo(c) => Some(Box::new(Evo::new(c.clone()))),
            OptimizerSpec::Gwo(c) => Some(Box::new(Gwo::new(c.clone()))),
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            OptimizerSpec::None => {}
            OptimizerSpec::Evo(c) => c.seed = seed,
            OptimizerSpec::Gwo(c) => c.seed = seed,
        }
    }
}

type OptimizerFactory = fn() -> OptimizerSpec;

pub struct OptimizerRegistry {
    entries: BTreeMap<&'static str, OptimizerFactory>,
}

impl OptimizerRegistry {
    pub fn register(&mut self, name: &'static str, factory: OptimizerFactory) {
        self.entries.insert(name, factory);
    }

    pub fn spec(&self, name: &str) -> Result<OptimizerSpec> {
        self.entries
            .get(name)
            .map(|f| f())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "optimizer",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

pub fn registry() -> OptimizerRegistry {
    let mut r = OptimizerRegistry {
        entries: BTreeMap::new(),
    };
    r.register("none", || OptimizerSpec::None);
    r.register("evo", || OptimizerSpec::Evo(EvoConfig::default()));
    r.register("gwo", || OptimizerSpec::Gwo(GwoConfig::default()));
    r
}
