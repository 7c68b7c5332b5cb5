//! Truncated Dirichlet-process mixture of products of multinomials.
//!
//! Each record belongs to one of `K` latent classes; within a class every
//! variable is an independent multinomial. Mixture weights come from a
//! truncated stick-breaking construction with Beta sticks and a Gamma prior
//! on the concentration. The blocked Gibbs sampler in [`gibbs`] cycles the
//! full conditionals; [`synth`] turns retained draws into partially
//! synthetic replicates.

mod gibbs;
mod synth;

pub use gibbs::{gibbs_sweep, run_chain, run_chain_with, ChainProgress};
pub use synth::{
    generate_replicates, synthesize_partial, DrawSelection, SyntheticReplicates,
};

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::dataset::CategoricalDataset;
use crate::error::{Error, Result};

/// Sampler configuration. Defaults follow the established practice for this
/// synthesizer on survey-scale categorical data: K = 80 classes, weak
/// Gamma(0.25, 0.25) concentration prior, uniform Dirichlet kernel prior,
/// 10000 sweeps with 5000 burn-in thinned by 10, and 5 replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpmpmHyperparams {
    /// Truncation level K of the stick-breaking representation.
    #[serde(rename = "K")]
    pub num_classes: usize,
    pub a_alpha: f64,
    pub b_alpha: f64,
    /// Uniform per-category Dirichlet prior mass on kernel rows.
    #[serde(default = "default_dirichlet_a")]
    pub dirichlet_a: f64,
    pub nrun: usize,
    pub burn: usize,
    pub thin: usize,
    pub seed: u64,
    /// Number of synthetic replicates to generate.
    pub m: usize,
}

fn default_dirichlet_a() -> f64 {
    1.0
}

impl Default for DpmpmHyperparams {
    fn default() -> Self {
        DpmpmHyperparams {
            num_classes: 80,
            a_alpha: 0.25,
            b_alpha: 0.25,
            dirichlet_a: 1.0,
            nrun: 10_000,
            burn: 5_000,
            thin: 10,
            seed: 221,
            m: 5,
        }
    }
}

impl DpmpmHyperparams {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes == 0 {
            return Err(Error::InvalidConfig("K must be at least 1".into()));
        }
        for (name, v) in [
            ("a_alpha", self.a_alpha),
            ("b_alpha", self.b_alpha),
            ("dirichlet_a", self.dirichlet_a),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if self.burn >= self.nrun {
            return Err(Error::InvalidConfig(format!(
                "burn ({}) must be less than nrun ({})",
                self.burn, self.nrun
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidConfig("thin must be at least 1".into()));
        }
        if self.m == 0 {
            return Err(Error::InvalidConfig("m must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of post-burn states the chain retains.
    pub fn retained_count(&self) -> usize {
        (self.nrun - self.burn) / self.thin
    }
}

/// Full sampler state between sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpmpmState {
    /// 0-based latent class of each record.
    pub assignments: Vec<usize>,
    /// Stick variables V in [0,1]; the last is pinned to 1.
    pub sticks: Vec<f64>,
    /// Mixture weights derived from the sticks; sums to 1.
    pub weights: Vec<f64>,
    /// Kernel rows `[variable][class][level]`; each row sums to 1.
    pub kernels: Vec<Vec<Vec<f64>>>,
    /// DP concentration.
    pub alpha: f64,
}

/// One retained posterior draw: weights, kernels, and concentration only.
/// Class assignments are redrawn at synthesis time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetainedDraw {
    pub weights: Vec<f64>,
    pub kernels: Vec<Vec<Vec<f64>>>,
    pub alpha: f64,
}

/// Thinned post-burn draws plus per-draw occupancy diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDraws {
    pub draws: Vec<RetainedDraw>,
    /// Number of classes with at least one assigned record, per draw.
    pub occupied_counts: Vec<usize>,
    /// Configuration echo.
    pub hyper: DpmpmHyperparams,
}

/// `weights[k] = sticks[k] * prod_{l<k} (1 - sticks[l])`.
pub fn stick_breaking_weights(sticks: &[f64]) -> Vec<f64> {
    let mut weights = Vec::with_capacity(sticks.len());
    let mut remaining = 1.0;
    for &v in sticks {
        weights.push(v * remaining);
        remaining *= 1.0 - v;
    }
    weights
}

/// Draw a Dirichlet vector with uniform mass `a + count_c` via Gamma draws.
fn sample_dirichlet(shapes: &[f64], rng: &mut impl Rng) -> Vec<f64> {
    let mut draws: Vec<f64> = shapes
        .iter()
        .map(|&s| Gamma::new(s, 1.0).expect("positive shape").sample(rng))
        .collect();
    let total: f64 = draws.iter().sum();
    if total <= 0.0 {
        // All gamma draws underflowed; fall back to the normalized shapes.
        let shape_total: f64 = shapes.iter().sum();
        return shapes.iter().map(|&s| s / shape_total).collect();
    }
    for d in draws.iter_mut() {
        *d /= total;
    }
    draws
}

/// Independent random initialization. Assignments are uniform over classes,
/// sticks come from the prior at the prior-mean concentration, and kernel
/// rows are drawn from their Dirichlet prior.
pub fn init_state(
    dataset: &CategoricalDataset,
    hyper: &DpmpmHyperparams,
    rng: &mut impl Rng,
) -> Result<DpmpmState> {
    hyper.validate()?;
    if dataset.has_missing() {
        return Err(Error::invalid(
            "sampler requires complete data; call drop_incomplete first",
        ));
    }
    let n = dataset.n_rows();
    let k = hyper.num_classes;
    let alpha0 = hyper.a_alpha / hyper.b_alpha;

    let assignments: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();

    let mut sticks = Vec::with_capacity(k);
    if k > 1 {
        let beta = Beta::new(1.0, alpha0).map_err(|e| Error::FitFailed(e.to_string()))?;
        for _ in 0..k - 1 {
            sticks.push(beta.sample(rng));
        }
    }
    sticks.push(1.0);
    let weights = stick_breaking_weights(&sticks);

    let codebook = dataset.codebook();
    let mut kernels = Vec::with_capacity(codebook.num_vars());
    for j in 0..codebook.num_vars() {
        let d = codebook.var(j).cardinality();
        let shapes = vec![hyper.dirichlet_a; d];
        let rows = (0..k).map(|_| sample_dirichlet(&shapes, rng)).collect();
        kernels.push(rows);
    }

    Ok(DpmpmState {
        assignments,
        sticks,
        weights,
        kernels,
        alpha: alpha0,
    })
}

impl DpmpmState {
    pub fn num_classes(&self) -> usize {
        self.weights.len()
    }

    /// Structural invariants: weight and kernel-row sums, the stick-breaking
    /// identity, positive concentration, in-range assignments.
    pub fn check_invariants(&self) -> Result<()> {
        let k = self.num_classes();
        let weight_sum: f64 = self.weights.iter().sum();
        if (weight_sum - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!(
                "mixture weights sum to {weight_sum}"
            )));
        }
        let rebuilt = stick_breaking_weights(&self.sticks);
        for (kk, (&w, r)) in self.weights.iter().zip(&rebuilt).enumerate() {
            if (w - r).abs() > 1e-12 {
                return Err(Error::invalid(format!(
                    "weight {kk} = {w} violates the stick-breaking identity ({r})"
                )));
            }
        }
        if !(self.alpha > 0.0) {
            return Err(Error::invalid("concentration must be positive"));
        }
        for rows in &self.kernels {
            if rows.len() != k {
                return Err(Error::invalid("kernel class count mismatch"));
            }
            for row in rows {
                let s: f64 = row.iter().sum();
                if (s - 1.0).abs() > 1e-10 {
                    return Err(Error::invalid(format!("kernel row sums to {s}")));
                }
            }
        }
        if self.assignments.iter().any(|&z| z >= k) {
            return Err(Error::invalid("assignment out of class range"));
        }
        Ok(())
    }

    /// Complete-data log-likelihood given the current assignments.
    pub fn log_likelihood(&self, dataset: &CategoricalDataset) -> f64 {
        let mut ll = 0.0;
        for i in 0..dataset.n_rows() {
            let z = self.assignments[i];
            ll += self.weights[z].max(f64::MIN_POSITIVE).ln();
            for (j, rows) in self.kernels.iter().enumerate() {
                let v = dataset.cell(i, j) as usize - 1;
                ll += rows[z][v].max(f64::MIN_POSITIVE).ln();
            }
        }
        ll
    }
}
