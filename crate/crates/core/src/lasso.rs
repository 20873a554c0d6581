//! Lasso by cyclic coordinate descent:
//!
//! ```text
//! minimize (1/2n)‖y − Xβ‖² + λ‖β‖₁
//! ```
//!
//! Each coordinate update is the exact soft-threshold minimizer along that
//! coordinate, computed over the sparse column, so a sweep costs O(nnz).

use serde::{Deserialize, Serialize};

use crate::ensemble::SparseMeasurementMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LassoConfig {
    pub lambda: f64,
    /// Bound on the largest coordinate change in a sweep; the KKT residual
    /// must also be within `10 * tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Magnitudes at or below this are reported as zero.
    pub zero_tol: f64,
}

impl LassoConfig {
    pub fn new(lambda: f64) -> Self {
        LassoConfig {
            lambda,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::parameter(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::parameter(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::parameter("max_iter must be at least 1"));
        }
        if !(self.zero_tol >= 0.0) {
            return Err(Error::parameter(format!(
                "zero_tol must be non-negative, got {}",
                self.zero_tol
            )));
        }
        Ok(())
    }
}

impl Default for LassoConfig {
    fn default() -> Self {
        LassoConfig {
            lambda: 0.1,
            tol: 1e-10,
            max_iter: 10_000,
            zero_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoSolution {
    pub beta_hat: Vec<f64>,
    pub objective: f64,
    pub kkt_residual: f64,
    /// Sweeps performed.
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each sweep.
    pub objective_trace: Vec<f64>,
}

#[inline]
pub(crate) fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

fn check_inputs(m: &SparseMeasurementMatrix, y: &[f64]) -> Result<()> {
    if y.len() != m.n() {
        return Err(Error::parameter(format!(
            "y has length {} but the matrix has {} rows",
            y.len(),
            m.n()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::data("y contains non-finite values"));
    }
    if m.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::data("matrix contains non-finite values"));
    }
    Ok(())
}

/// Solve from β = 0.
pub fn solve(m: &SparseMeasurementMatrix, y: &[f64], cfg: &LassoConfig) -> Result<LassoSolution> {
    solve_from(m, y, cfg, &vec![0.0; m.p()])
}

/// Solve starting from `start` (warm start).
pub fn solve_from(
    m: &SparseMeasurementMatrix,
    y: &[f64],
    cfg: &LassoConfig,
    start: &[f64],
) -> Result<LassoSolution> {
    cfg.validate()?;
    check_inputs(m, y)?;
    if start.len() != m.p() {
        return Err(Error::parameter("warm start has the wrong length"));
    }
    if start.iter().any(|v| !v.is_finite()) {
        return Err(Error::data("warm start contains non-finite values"));
    }

    let n = m.n() as f64;
    let lambda = cfg.lambda;
    let cols = m.to_columns();
    let curvature: Vec<f64> = (0..m.p()).map(|j| cols.squared_norm(j) / n).collect();

    let mut beta = start.to_vec();
    let mut resid = residual(m, y, &beta);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut kkt = f64::INFINITY;
    let mut sweeps = 0;

    while sweeps < cfg.max_iter {
        sweeps += 1;
        let mut max_delta: f64 = 0.0;
        for j in 0..m.p() {
            let c = curvature[j];
            let new = if c > 0.0 {
                let rho = cols.dot(j, &resid) / n + c * beta[j];
                soft_threshold(rho, lambda) / c
            } else {
                0.0
            };
            let delta = new - beta[j];
            if delta != 0.0 {
                cols.axpy(j, -delta, &mut resid);
                beta[j] = new;
                max_delta = max_delta.max(delta.abs());
            }
        }
        trace.push(objective_from_residual(&resid, &beta, lambda));

        if max_delta <= cfg.tol {
            // refresh to drop accumulated drift before certifying
            resid = residual(m, y, &beta);
            kkt = kkt_from_residual(m, &resid, lambda, &beta);
            if kkt <= 10.0 * cfg.tol {
                converged = true;
                break;
            }
        }
    }

    let resid = residual(m, y, &beta);
    if !converged {
        kkt = kkt_from_residual(m, &resid, lambda, &beta);
    }
    Ok(LassoSolution {
        objective: objective_from_residual(&resid, &beta, lambda),
        beta_hat: beta,
        kkt_residual: kkt,
        iterations: sweeps,
        converged,
        objective_trace: trace,
    })
}

/// Solve along a decreasing sequence of λ values, warm-starting each solve
/// from the previous solution.
pub fn solve_path(
    m: &SparseMeasurementMatrix,
    y: &[f64],
    lambdas: &[f64],
    cfg: &LassoConfig,
) -> Result<Vec<LassoSolution>> {
    let mut start = vec![0.0; m.p()];
    let mut out = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let sol = solve_from(m, y, &LassoConfig { lambda, ..*cfg }, &start)?;
        start.clone_from(&sol.beta_hat);
        out.push(sol);
    }
    Ok(out)
}

/// Lasso objective `(1/2n)‖y − Xβ‖² + λ‖β‖₁`.
pub fn objective(m: &SparseMeasurementMatrix, y: &[f64], lambda: f64, beta: &[f64]) -> f64 {
    objective_from_residual(&residual(m, y, beta), beta, lambda)
}

/// Largest violation of the zero-subgradient condition
/// `(1/n)Xᵀ(Xβ − y) + λz = 0` over coordinates, using the best admissible
/// subgradient z.
pub fn kkt_residual(
    m: &SparseMeasurementMatrix,
    y: &[f64],
    lambda: f64,
    beta: &[f64],
) -> Result<f64> {
    check_inputs(m, y)?;
    if beta.len() != m.p() {
        return Err(Error::parameter(format!(
            "beta has length {} but p = {}",
            beta.len(),
            m.p()
        )));
    }
    if beta.iter().any(|v| !v.is_finite()) || !lambda.is_finite() {
        return Err(Error::data("beta or lambda is non-finite"));
    }
    Ok(kkt_from_residual(m, &residual(m, y, beta), lambda, beta))
}

/// Signed support with magnitudes at or below `zero_tol` mapped to 0.
pub fn signed_support(beta: &[f64], zero_tol: f64) -> Vec<i8> {
    beta.iter()
        .map(|&b| {
            if b.abs() <= zero_tol {
                0
            } else if b > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect()
}

fn residual(m: &SparseMeasurementMatrix, y: &[f64], beta: &[f64]) -> Vec<f64> {
    let fit = m.mul_vec(beta);
    y.iter().zip(fit).map(|(a, b)| a - b).collect()
}

fn objective_from_residual(resid: &[f64], beta: &[f64], lambda: f64) -> f64 {
    let n = resid.len() as f64;
    resid.iter().map(|r| r * r).sum::<f64>() / (2.0 * n) + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
}

fn kkt_from_residual(m: &SparseMeasurementMatrix, resid: &[f64], lambda: f64, beta: &[f64]) -> f64 {
    let n = m.n() as f64;
    // gradient of the smooth part: -(1/n) Xᵀ r
    let corr = m.tr_mul_vec(resid);
    corr.iter()
        .zip(beta)
        .map(|(&c, &b)| {
            let g = -c / n;
            if b != 0.0 {
                (g + lambda * b.signum()).abs()
            } else {
                (g.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}
