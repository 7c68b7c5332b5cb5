//! Binary logistic regression by Newton/IRLS with step halving.

use nalgebra::{DMatrix, DVector};

use super::design::DesignMatrix;
use crate::error::{Error, Result};

/// Coefficient magnitude beyond which the fit is treated as separated:
/// the run stops, coefficients are capped, and the fit is flagged so
/// downstream scores can still be computed from clamped probabilities.
pub const COEFFICIENT_CAP: f64 = 30.0;

const PROB_CLAMP: f64 = 1e-12;

/// Fitted logistic regression with observed-information covariance.
#[derive(Debug, Clone)]
pub struct LogisticFit {
    pub labels: Vec<String>,
    pub coefficients: DVector<f64>,
    /// Inverse observed information at the optimum.
    pub covariance: DMatrix<f64>,
    pub converged: bool,
    pub separation_flagged: bool,
    pub iterations: usize,
    /// Log-likelihood after each accepted step (non-decreasing).
    pub ll_trace: Vec<f64>,
}

impl LogisticFit {
    /// Variance of each coefficient (covariance diagonal).
    pub fn variances(&self) -> Vec<f64> {
        (0..self.coefficients.len())
            .map(|i| self.covariance[(i, i)])
            .collect()
    }
}

fn log_likelihood(eta: &DVector<f64>, y: &[bool]) -> f64 {
    // sum_i [ y_i*eta_i - ln(1 + e^eta_i) ], with a stable softplus.
    let mut ll = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        let e = eta[i];
        let softplus = if e > 30.0 { e } else { (1.0 + e.exp()).ln() };
        ll += if yi { e } else { 0.0 } - softplus;
    }
    ll
}

fn sigmoid(e: f64) -> f64 {
    1.0 / (1.0 + (-e).exp())
}

/// Fit `P(y=1 | x) = sigmoid(x beta)` by Newton steps with halving, so the
/// log-likelihood never decreases. Stops when the gradient sup-norm drops
/// below `tol`, the iteration budget runs out, or coefficients blow past
/// [`COEFFICIENT_CAP`] (complete separation).
pub fn fit_logistic(x: &DesignMatrix, y: &[bool], tol: f64, max_iter: usize) -> Result<LogisticFit> {
    let m = x.matrix();
    let n = m.nrows();
    let p = m.ncols();
    if y.len() != n {
        return Err(Error::invalid(format!(
            "{} responses for {} design rows",
            y.len(),
            n
        )));
    }
    let ones = y.iter().filter(|&&b| b).count();
    if ones == 0 || ones == n {
        return Err(Error::invalid(
            "response is single-class; logistic regression needs both outcomes",
        ));
    }

    let mut beta = DVector::zeros(p);
    let mut eta = m * &beta;
    let mut ll = log_likelihood(&eta, y);
    let mut ll_trace = vec![ll];
    let mut converged = false;
    let mut separation_flagged = false;
    let mut iterations = 0;

    for iter in 1..=max_iter {
        iterations = iter;
        // Gradient X'(y - p) and Hessian X'WX with W = p(1-p).
        let probs: Vec<f64> = (0..n).map(|i| sigmoid(eta[i])).collect();
        let mut grad = DVector::zeros(p);
        for i in 0..n {
            let resid = (y[i] as u8 as f64) - probs[i];
            for c in 0..p {
                grad[c] += m[(i, c)] * resid;
            }
        }
        if grad.amax() < tol {
            converged = true;
            break;
        }
        let hessian = information_matrix(m, &probs);
        let delta = match solve_spd(&hessian, &grad) {
            Some(d) => d,
            None => {
                // Singular even after jitter: give up with the partial fit.
                break;
            }
        };

        // Step halving keeps the log-likelihood non-decreasing.
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = &beta + &delta * step;
            let cand_eta = m * &cand;
            let cand_ll = log_likelihood(&cand_eta, y);
            if cand_ll >= ll {
                beta = cand;
                eta = cand_eta;
                debug_assert!(cand_ll >= ll);
                ll = cand_ll;
                ll_trace.push(ll);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        if beta.amax() > COEFFICIENT_CAP {
            // Diverging norms: complete or quasi-complete separation.
            for b in beta.iter_mut() {
                *b = b.clamp(-COEFFICIENT_CAP, COEFFICIENT_CAP);
            }
            eta = m * &beta;
            separation_flagged = true;
            converged = false;
            break;
        }
    }

    let probs: Vec<f64> = (0..n).map(|i| sigmoid(eta[i])).collect();
    let information = information_matrix(m, &probs);
    let covariance = invert_spd(&information).unwrap_or_else(|| DMatrix::zeros(p, p));

    Ok(LogisticFit {
        labels: x.labels().to_vec(),
        coefficients: beta,
        covariance,
        converged,
        separation_flagged,
        iterations,
        ll_trace,
    })
}

fn information_matrix(m: &DMatrix<f64>, probs: &[f64]) -> DMatrix<f64> {
    let p = m.ncols();
    let mut info = DMatrix::zeros(p, p);
    for (i, &pi) in probs.iter().enumerate() {
        let w = (pi * (1.0 - pi)).max(1e-10);
        for a in 0..p {
            let wa = w * m[(i, a)];
            if wa == 0.0 {
                continue;
            }
            for b in a..p {
                info[(a, b)] += wa * m[(i, b)];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            info[(a, b)] = info[(b, a)];
        }
    }
    info
}

fn solve_spd(a: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(chol) = a.clone().cholesky() {
        return Some(chol.solve(rhs));
    }
    // Collinear dummies can make the information singular; a small ridge
    // keeps the step well-defined.
    let p = a.nrows();
    let jittered = a + DMatrix::identity(p, p) * 1e-8;
    jittered.cholesky().map(|c| c.solve(rhs))
}

fn invert_spd(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if let Some(chol) = a.clone().cholesky() {
        return Some(chol.inverse());
    }
    let p = a.nrows();
    let jittered = a + DMatrix::identity(p, p) * 1e-8;
    jittered.cholesky().map(|c| c.inverse())
}

/// Apply the logistic link rowwise; output clamped away from exact 0/1.
pub fn predict_proba(fit: &LogisticFit, x: &DesignMatrix) -> Result<Vec<f64>> {
    if fit.labels != x.labels() {
        return Err(Error::DesignMismatch(format!(
            "fit columns {:?} vs input columns {:?}",
            fit.labels,
            x.labels()
        )));
    }
    let eta = x.matrix() * &fit.coefficients;
    Ok(eta
        .iter()
        .map(|&e| sigmoid(e).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP))
        .collect())
}
