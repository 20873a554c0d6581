//! Independent dense reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use sparsified_lasso::ensemble::SparseMeasurementMatrix;

pub fn dense(m: &SparseMeasurementMatrix) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(m.n(), m.p());
    for (i, (cols, vals)) in m.rows().enumerate() {
        for (&j, &v) in cols.iter().zip(vals) {
            x[(i, j)] = v;
        }
    }
    x
}

pub struct ReferenceLasso {
    pub beta: Vec<f64>,
    /// The support/sign pattern was confirmed by an exact KKT solve with
    /// strict dual feasibility off the support.
    pub certified: bool,
}

fn soft(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Accelerated proximal gradient followed by an exact polish: the support
/// and signs found by FISTA define a linear system whose solution is the
/// Lasso optimum whenever it satisfies the optimality conditions.
pub fn reference_lasso(x: &DMatrix<f64>, y: &[f64], lambda: f64) -> ReferenceLasso {
    let n = x.nrows() as f64;
    let p = x.ncols();
    let yv = DVector::from_column_slice(y);
    let gram = x.transpose() * x / n;
    let xty = x.transpose() * &yv / n;
    let lip = gram.symmetric_eigenvalues().max().max(1e-12);
    let step = 1.0 / lip;

    let mut beta = DVector::zeros(p);
    let mut z = beta.clone();
    let mut t = 1.0f64;
    for _ in 0..200_000 {
        let grad = &gram * &z - &xty;
        let next = DVector::from_fn(p, |j, _| soft(z[j] - step * grad[j], step * lambda));
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let change = (&next - &beta).amax();
        z = &next + (&next - &beta) * ((t - 1.0) / t_next);
        beta = next;
        t = t_next;
        if change < 1e-14 {
            break;
        }
    }

    let support: Vec<usize> = (0..p).filter(|&j| beta[j].abs() > 1e-7).collect();
    let signs: Vec<f64> = support.iter().map(|&j| beta[j].signum()).collect();
    let mut polished = vec![0.0; p];
    let mut certified = false;
    if !support.is_empty() {
        let k = support.len();
        let g_ss = DMatrix::from_fn(k, k, |a, b| gram[(support[a], support[b])]);
        let rhs = DVector::from_fn(k, |a, _| xty[support[a]] - lambda * signs[a]);
        if let Some(sol) = g_ss.lu().solve(&rhs) {
            for (a, &j) in support.iter().enumerate() {
                polished[j] = sol[a];
            }
            let pb = DVector::from_column_slice(&polished);
            let corr = &xty - &gram * &pb;
            let signs_ok = support
                .iter()
                .zip(&signs)
                .all(|(&j, &s)| polished[j] * s > 0.0);
            let dual_ok = (0..p)
                .filter(|j| !support.contains(j))
                .all(|j| corr[j].abs() < lambda * (1.0 - 1e-9));
            certified = signs_ok && dual_ok;
        }
    } else {
        certified = xty.amax() < lambda * (1.0 - 1e-9);
    }
    if !certified {
        polished = beta.iter().copied().collect();
    }
    ReferenceLasso {
        beta: polished,
        certified,
    }
}

pub fn sign_vector(beta: &[f64], zero_tol: f64) -> Vec<i8> {
    beta.iter()
        .map(|&b| {
            if b > zero_tol {
                1
            } else if b < -zero_tol {
                -1
            } else {
                0
            }
        })
        .collect()
}

/// Dense witness quantities: U, V^a, V^b computed with explicit inverses.
pub struct DenseWitness {
    pub u: Vec<f64>,
    pub va: Vec<f64>,
    pub vb: Vec<f64>,
}

pub fn dense_witness(
    x: &DMatrix<f64>,
    support: &[usize],
    signs: &[f64],
    w: &[f64],
    lambda: f64,
) -> Option<DenseWitness> {
    let n = x.nrows() as f64;
    let x_s = x.select_columns(support);
    let sigma_inv = (x_s.transpose() * &x_s / n).try_inverse()?;
    let wv = DVector::from_column_slice(w);
    let s = DVector::from_column_slice(signs);
    let u = &sigma_inv * (x_s.transpose() * &wv / n - &s * lambda);
    let h = &x_s * (&sigma_inv * &s) / n;
    let proj = DMatrix::identity(x.nrows(), x.nrows()) - &x_s * &sigma_inv * x_s.transpose() / n;
    let pw = proj * &wv;
    let rest: Vec<usize> = (0..x.ncols()).filter(|j| !support.contains(j)).collect();
    let va = rest.iter().map(|&j| lambda * x.column(j).dot(&h)).collect();
    let vb = rest.iter().map(|&j| x.column(j).dot(&pw) / n).collect();
    Some(DenseWitness {
        u: u.iter().copied().collect(),
        va,
        vb,
    })
}
