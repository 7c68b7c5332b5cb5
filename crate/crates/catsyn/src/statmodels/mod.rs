//! In-house statistical learners shared by the utility and risk suites:
//! binary logistic regression with coefficient covariance, and a bagged
//! classification-tree ensemble for categorical predictors.

mod design;
mod forest;
mod logistic;

pub use design::DesignMatrix;
pub use forest::{fit_forest, ForestModel, ForestParams};
pub use logistic::{fit_logistic, predict_proba, LogisticFit, COEFFICIENT_CAP};
