//! Hybrid intrusion-detection toolkit: wrapper feature selection driven by a
//! binary Energy Valley Optimizer or Grey Wolf Optimizer, over from-scratch
//! classifiers, with the dataset preprocessing, evaluation and reporting
//! pipeline needed to run reproducible experiments on flow datasets.
//!
//! Classifiers and feature-selection optimizers are strategies behind the
//! [`classifiers::Classifier`] and [`optimizers::FeatureSelector`] traits and
//! are looked up by name through their registries.

// `!(x > 0.0)` is used on purpose so NaN is rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classifiers;
pub mod datasets;
pub mod error;
pub mod experiment;
pub mod fitness;
pub mod metrics;
pub mod optimizers;
pub mod rng;

pub use error::{Error, Result};
