//! Dummy coding of categorical datasets into regression design matrices.

use nalgebra::DMatrix;

use crate::dataset::CategoricalDataset;
use crate::error::{Error, Result};

/// Intercept plus dummy-coded indicators, reference level = first codebook
/// level of each variable. Constant columns are pruned (and recorded) so the
/// matrix keeps full column rank on degenerate inputs.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    labels: Vec<String>,
    data: DMatrix<f64>,
    pruned: Vec<String>,
}

pub const INTERCEPT_LABEL: &str = "(intercept)";

impl DesignMatrix {
    /// Build from one or more datasets stacked row-wise (all must share the
    /// codebook). `variables` selects the predictors, in codebook order of
    /// their dummy columns.
    pub fn from_datasets(datasets: &[&CategoricalDataset], variables: &[String]) -> Result<Self> {
        let first = datasets
            .first()
            .ok_or_else(|| Error::invalid("no datasets given"))?;
        let codebook = first.codebook();
        for ds in datasets {
            if ds.codebook() != codebook {
                return Err(Error::invalid("datasets have different codebooks"));
            }
            if ds.has_missing() {
                return Err(Error::invalid("design matrix requires complete data"));
            }
        }
        let cols = codebook.require_all(variables)?;
        let n: usize = datasets.iter().map(|d| d.n_rows()).sum();

        let mut labels = vec![INTERCEPT_LABEL.to_string()];
        // (column, level) pairs for every non-reference level.
        let mut dummies = Vec::new();
        for &j in &cols {
            let var = codebook.var(j);
            for level in 2..=var.cardinality() as u32 {
                labels.push(format!("{}={}", var.name, var.level_label(level).unwrap()));
                dummies.push((j, level));
            }
        }

        let p = 1 + dummies.len();
        let mut data = DMatrix::zeros(n, p);
        let mut row = 0usize;
        for ds in datasets {
            for i in 0..ds.n_rows() {
                data[(row, 0)] = 1.0;
                for (slot, &(j, level)) in dummies.iter().enumerate() {
                    if ds.cell(i, j) == level {
                        data[(row, slot + 1)] = 1.0;
                    }
                }
                row += 1;
            }
        }

        // Prune constant columns (never the intercept).
        let mut keep = vec![0usize];
        let mut pruned = Vec::new();
        for c in 1..p {
            let col = data.column(c);
            let first_val = col[0];
            if col.iter().all(|&v| v == first_val) {
                pruned.push(labels[c].clone());
            } else {
                keep.push(c);
            }
        }
        if keep.len() < p {
            let kept_labels: Vec<String> = keep.iter().map(|&c| labels[c].clone()).collect();
            let data = data.select_columns(keep.iter());
            return Ok(DesignMatrix {
                labels: kept_labels,
                data,
                pruned,
            });
        }
        Ok(DesignMatrix {
            labels,
            data,
            pruned,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn n_rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.data.ncols()
    }

    /// Labels of dummy columns dropped for being constant.
    pub fn pruned_columns(&self) -> &[String] {
        &self.pruned
    }
}
