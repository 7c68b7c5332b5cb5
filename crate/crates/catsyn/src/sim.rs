//! Ground-truth data simulation.
//!
//! Draws complete categorical datasets from a known finite mixture of
//! products of multinomials: each row picks a latent class from the mixing
//! weights, then fills every variable independently from that class's kernel.
//! The true parameters and class assignments are returned (and persisted by
//! the CLI) so downstream tests can score recovery against them.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{CategoricalDataset, Codebook, RecordId, VariableSpec};
use crate::error::{Error, Result};
use crate::rng::{sample_categorical, substream, Domain};

/// One simulated variable: metadata plus its per-class kernel rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimVariable {
    pub name: String,
    /// Explicit level labels; mutually exclusive with `arity`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<String>>,
    /// Shorthand for auto-labeled levels "1".."arity".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arity: Option<usize>,
    #[serde(default)]
    pub sensitive: bool,
    /// Kernel rows, one per latent class, each summing to 1.
    pub theta: Vec<Vec<f64>>,
}

impl SimVariable {
    fn resolved_levels(&self) -> Result<Vec<String>> {
        match (&self.levels, self.arity) {
            (Some(levels), None) => Ok(levels.clone()),
            (None, Some(d)) => Ok((1..=d).map(|v| v.to_string()).collect()),
            (Some(_), Some(_)) => Err(Error::InvalidConfig(format!(
                "variable '{}': give either levels or arity, not both",
                self.name
            ))),
            (None, None) => Err(Error::InvalidConfig(format!(
                "variable '{}': levels or arity required",
                self.name
            ))),
        }
    }
}

/// Full specification of the generative model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimSpec {
    pub n: usize,
    pub seed: u64,
    /// Mixing weights; length = number of true classes.
    pub pi: Vec<f64>,
    pub variables: Vec<SimVariable>,
}

/// True parameters persisted next to a simulated dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth {
    pub class_count: usize,
    pub pi: Vec<f64>,
    /// `[variable][class][level]`.
    pub theta: Vec<Vec<Vec<f64>>>,
    /// 0-based latent class of each generated row.
    pub assignments: Vec<usize>,
    pub seed: u64,
}

fn normalized(probs: &[f64], what: &str) -> Result<Vec<f64>> {
    if probs.is_empty() {
        return Err(Error::InvalidConfig(format!("{what} has no entries")));
    }
    if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "{what} has a negative or non-finite entry"
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidConfig(format!(
            "{what} sums to {total}, expected 1"
        )));
    }
    Ok(probs.iter().map(|&p| p / total).collect())
}

impl SimSpec {
    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Toml(e.to_string()))
    }

    pub fn class_count(&self) -> usize {
        self.pi.len()
    }

    /// Codebook implied by the variable metadata.
    pub fn codebook(&self) -> Result<Codebook> {
        let mut vars = Vec::with_capacity(self.variables.len());
        for v in &self.variables {
            vars.push(VariableSpec::new(
                v.name.clone(),
                v.resolved_levels()?,
                v.sensitive,
            ));
        }
        Codebook::new(vars)
    }

    fn validate(&self) -> Result<(Vec<f64>, Vec<Vec<Vec<f64>>>)> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be positive".into()));
        }
        let pi = normalized(&self.pi, "pi")?;
        let k = pi.len();
        let mut theta = Vec::with_capacity(self.variables.len());
        for v in &self.variables {
            let d = v.resolved_levels()?.len();
            if v.theta.len() != k {
                return Err(Error::InvalidConfig(format!(
                    "variable '{}': {} kernel rows for {} classes",
                    v.name,
                    v.theta.len(),
                    k
                )));
            }
            let mut rows = Vec::with_capacity(k);
            for (cls, row) in v.theta.iter().enumerate() {
                if row.len() != d {
                    return Err(Error::InvalidConfig(format!(
                        "variable '{}', class {}: row length {} != {} levels",
                        v.name,
                        cls + 1,
                        row.len(),
                        d
                    )));
                }
                rows.push(normalized(
                    row,
                    &format!("theta row for '{}' class {}", v.name, cls + 1),
                )?);
            }
            theta.push(rows);
        }
        Ok((pi, theta))
    }

    /// Draw the dataset: class from the mixing weights, then each variable
    /// independently from that class's kernel row.
    pub fn generate(&self) -> Result<(CategoricalDataset, GroundTruth)> {
        let (pi, theta) = self.validate()?;
        let codebook = self.codebook()?;
        let mut rng = substream(self.seed, Domain::Simulate, 0);
        let mut rows = Vec::with_capacity(self.n);
        let mut assignments = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            let z = sample_categorical(&pi, &mut rng);
            let mut row = Vec::with_capacity(self.variables.len());
            for kernel in &theta {
                row.push(sample_categorical(&kernel[z], &mut rng) as u32 + 1);
            }
            rows.push(row);
            assignments.push(z);
        }
        let ids = (1..=self.n as u64).map(RecordId).collect();
        let dataset = CategoricalDataset::new(codebook, rows, ids)?;
        let truth = GroundTruth {
            class_count: pi.len(),
            pi,
            theta,
            assignments,
            seed: self.seed,
        };
        Ok((dataset, truth))
    }
}
