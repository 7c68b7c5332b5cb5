//! Partially synthetic categorical microdata toolkit.
//!
//! `catsyn` fits a truncated Dirichlet-process mixture of products of
//! multinomials to coded categorical data by blocked Gibbs sampling, replaces
//! sensitive columns with posterior-predictive draws, and scores the released
//! replicates with utility metrics (propensity-score MSE, cross-tabulation
//! deviations, combining rules with interval overlap) and disclosure-risk
//! metrics (matching, probabilistic record linkage, correct attribution
//! probability, classification contrast).
//!
//! The crate is organized around immutable [`dataset::CategoricalDataset`]
//! values: the sampler in [`dpmpm`] consumes one and produces retained
//! posterior draws, [`dpmpm::synthesize_partial`] turns a draw into a partially
//! synthetic replicate, and the [`utility`] and [`risk`] modules compare
//! replicates against the confidential source. [`pipeline`] wires everything
//! into the config-driven CLI commands.

pub mod config;
pub mod dataset;
pub mod dpmpm;
pub mod error;
pub mod pipeline;
pub mod report;
pub mod risk;
pub mod rng;
pub mod sim;
pub mod snapshot;
pub mod statmodels;
pub mod utility;

pub use error::{Error, Result};
