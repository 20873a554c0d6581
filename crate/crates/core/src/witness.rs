//! Primal-dual witness for signed-support recovery.
//!
//! Construction, for a signal with support S and signs s = sign(β*_S):
//!
//! 1. fix β̂ = 0 off the support and ẑ_S = s;
//! 2. solve Σ̂_SS U = (1/n) X_Sᵀ w − λ s, with Σ̂_SS = (1/n) X_Sᵀ X_S, and set
//!    β̂_S = β*_S + U;
//! 3. read off λ ẑ_j = V^a_j + V^b_j for j ∉ S, where
//!    V^a_j = λ X_jᵀ h with h = (1/n) X_S Σ̂_SS⁻¹ s, and
//!    V^b_j = X_jᵀ Π⊥ w / n with Π⊥ = I − X_S (X_SᵀX_S)⁻¹ X_Sᵀ.
//!
//! The pair certifies that the Lasso's unique solution has exactly the signed
//! support of β* when max_j |V^a_j + V^b_j| < λ and sign(β*_i + U_i) agrees
//! with sign(β*_i) on S.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::ensemble::{ColumnMatrix, SignalSpec, SparseMeasurementMatrix};
use crate::error::{Error, Result};
use crate::lasso::LassoSolution;
use crate::linalg::{Cholesky, DenseSym};
use crate::rng::{Stream, StreamLabel};

/// Margins of the three recovery conditions; positive means satisfied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Margins {
    /// λ − max_j |V^a_j + V^b_j|
    pub dual: f64,
    /// β_min − max_i |U_i|
    pub error: f64,
    /// min_i sign(β*_i)·(β*_i + U_i)
    pub sign: f64,
}

impl Margins {
    pub fn all_exceed(&self, eps: f64) -> bool {
        self.dual > eps && self.error > eps && self.sign > eps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Events {
    pub event_v: bool,
    pub event_u: bool,
    pub sign_consistent: bool,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub invertible: bool,
    pub u: Option<Vec<f64>>,
    pub va: Option<Vec<f64>>,
    pub vb: Option<Vec<f64>>,
    #[serde(skip)]
    pub zhat_sc: Option<Vec<f64>>,
    pub event_v: Option<bool>,
    pub event_u: Option<bool>,
    pub sign_consistent: Option<bool>,
    pub success: bool,
    pub margins: Option<Margins>,
    #[serde(skip)]
    beta_support: Vec<f64>,
    #[serde(skip)]
    lambda: f64,
}

impl WitnessReport {
    fn singular(lambda: f64, beta_support: Vec<f64>) -> Self {
        WitnessReport {
            invertible: false,
            u: None,
            va: None,
            vb: None,
            zhat_sc: None,
            event_v: None,
            event_u: None,
            sign_consistent: None,
            success: false,
            margins: None,
            beta_support,
            lambda,
        }
    }

    /// Assemble a report from its dual quantities and evaluate the events.
    /// `beta_support` holds β* on the support, in support order.
    pub fn from_parts(
        lambda: f64,
        beta_support: Vec<f64>,
        u: Vec<f64>,
        va: Vec<f64>,
        vb: Vec<f64>,
    ) -> Result<Self> {
        if u.len() != beta_support.len() || va.len() != vb.len() {
            return Err(Error::parameter("witness parts have inconsistent lengths"));
        }
        if !(lambda > 0.0) {
            return Err(Error::parameter("lambda must be positive"));
        }
        let zhat: Vec<f64> = va.iter().zip(&vb).map(|(a, b)| (a + b) / lambda).collect();
        let beta_min = beta_support.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        let mut report = WitnessReport {
            invertible: true,
            u: Some(u),
            va: Some(va),
            vb: Some(vb),
            zhat_sc: Some(zhat),
            event_v: None,
            event_u: None,
            sign_consistent: None,
            success: false,
            margins: None,
            beta_support,
            lambda,
        };
        let events = check_events(&report, lambda, beta_min)?;
        report.event_v = Some(events.event_v);
        report.event_u = Some(events.event_u);
        report.sign_consistent = Some(events.sign_consistent);
        report.success = events.success;
        report.margins = Some(report.compute_margins(lambda, beta_min));
        Ok(report)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// max_j |V^a_j + V^b_j|, or `None` for a singular report.
    pub fn max_dual(&self) -> Option<f64> {
        let (va, vb) = (self.va.as_ref()?, self.vb.as_ref()?);
        Some(max_abs_sum(va, vb))
    }

    /// max_i |U_i|.
    pub fn max_error(&self) -> Option<f64> {
        Some(self.u.as_ref()?.iter().fold(0.0, |m, x| m.max(x.abs())))
    }

    /// True when either decisive margin (dual or sign) is within `eps` of
    /// zero, where floating-point error can flip the verdict.
    pub fn is_boundary(&self, eps: f64) -> bool {
        match self.margins {
            Some(m) => m.dual.abs() <= eps || m.sign.abs() <= eps,
            None => false,
        }
    }

    fn compute_margins(&self, lambda: f64, beta_min: f64) -> Margins {
        let u = self.u.as_deref().unwrap_or(&[]);
        let sign = self
            .beta_support
            .iter()
            .zip(u)
            .map(|(b, ui)| b.signum() * (b + ui))
            .fold(f64::INFINITY, f64::min);
        Margins {
            dual: lambda - self.max_dual().unwrap_or(0.0),
            error: beta_min - self.max_error().unwrap_or(0.0),
            sign,
        }
    }
}

fn max_abs_sum(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x + y).abs()))
}

/// Evaluate the recovery events of an invertible report.
///
/// `event_v` is strict (max |V^a + V^b| < λ), `event_u` is non-strict
/// (max |U| ≤ β_min) and sign consistency is strict. Success requires
/// `event_v` and sign consistency.
pub fn check_events(r: &WitnessReport, lambda: f64, beta_min: f64) -> Result<Events> {
    if !r.invertible {
        return Err(Error::contract(
            "events are undefined for a report with singular Σ̂_SS",
        ));
    }
    let (Some(u), Some(max_dual)) = (r.u.as_ref(), r.max_dual()) else {
        return Err(Error::contract("invertible report is missing its dual variables"));
    };
    let event_v = max_dual < lambda;
    let event_u = u.iter().all(|x| x.abs() <= beta_min);
    let sign_consistent = r
        .beta_support
        .iter()
        .zip(u)
        .all(|(b, ui)| (b + ui).signum() == b.signum() && b + ui != 0.0);
    Ok(Events {
        event_v,
        event_u,
        sign_consistent,
        success: event_v && sign_consistent,
    })
}

/// Σ̂_SS and its factor, plus the column view used to build it.
struct SupportSystem {
    cols: ColumnMatrix,
    chol: Option<Cholesky>,
}

impl SupportSystem {
    fn new(m: &SparseMeasurementMatrix, support: &[usize]) -> Self {
        let cols = m.to_columns();
        let n = m.n() as f64;
        let k = support.len();
        let mut gram = DenseSym::zeros(k);
        let mut scratch = vec![0.0; m.n()];
        for a in 0..k {
            cols.axpy(support[a], 1.0, &mut scratch);
            for b in a..k {
                gram.set_sym(a, b, cols.dot(support[b], &scratch) / n);
            }
            let (rows, _) = cols.column(support[a]);
            for &r in rows {
                scratch[r] = 0.0;
            }
        }
        let chol = Cholesky::factor(&gram);
        SupportSystem { cols, chol }
    }

    /// (1/n) X_S c for coefficients c over the support.
    fn combine(&self, support: &[usize], coef: &[f64], scale: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.cols.n()];
        for (&j, &c) in support.iter().zip(coef) {
            self.cols.axpy(j, c * scale, &mut out);
        }
        out
    }
}

fn check_dims(m: &SparseMeasurementMatrix, s: &SignalSpec, w: Option<&[f64]>) -> Result<()> {
    if m.p() != s.p() {
        return Err(Error::parameter(format!(
            "matrix has p = {} but signal has p = {}",
            m.p(),
            s.p()
        )));
    }
    if let Some(w) = w {
        if w.len() != m.n() {
            return Err(Error::parameter(format!(
                "noise has length {} but n = {}",
                w.len(),
                m.n()
            )));
        }
    }
    Ok(())
}

/// Run the witness construction for β* = `s`, noise `w` and penalty `lambda`.
pub fn build(
    m: &SparseMeasurementMatrix,
    s: &SignalSpec,
    w: &[f64],
    lambda: f64,
) -> Result<WitnessReport> {
    check_dims(m, s, Some(w))?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::parameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let support = s.support();
    let system = SupportSystem::new(m, support);
    let Some(chol) = system.chol.as_ref() else {
        return Ok(WitnessReport::singular(lambda, s.values().to_vec()));
    };
    let n = m.n() as f64;
    let signs = s.support_signs();
    let cols = &system.cols;

    let xs_w: Vec<f64> = support.iter().map(|&j| cols.dot(j, w) / n).collect();
    let rhs: Vec<f64> = xs_w
        .iter()
        .zip(&signs)
        .map(|(x, sg)| x - lambda * sg)
        .collect();
    let u = chol.solve(&rhs);

    let h = system.combine(support, &chol.solve(&signs), 1.0 / n);
    let q = chol.solve(&xs_w);
    let fitted = system.combine(support, &q, 1.0);
    let projected: Vec<f64> = w.iter().zip(&fitted).map(|(a, b)| a - b).collect();

    let complement = s.complement();
    let va: Vec<f64> = complement.iter().map(|&j| lambda * cols.dot(j, &h)).collect();
    let vb: Vec<f64> = complement
        .iter()
        .map(|&j| cols.dot(j, &projected) / n)
        .collect();

    WitnessReport::from_parts(lambda, s.values().to_vec(), u, va, vb)
}

/// h = (1/n) X_S Σ̂_SS⁻¹ 1 and its squared norm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HVector {
    pub h: Vec<f64>,
    pub squared_norm: f64,
}

pub fn h_vector(m: &SparseMeasurementMatrix, s: &SignalSpec) -> Result<HVector> {
    check_dims(m, s, None)?;
    let system = SupportSystem::new(m, s.support());
    let chol = system
        .chol
        .as_ref()
        .ok_or_else(|| Error::contract("Σ̂_SS is singular; h is undefined"))?;
    let ones = vec![1.0; s.k()];
    let h = system.combine(s.support(), &chol.solve(&ones), 1.0 / m.n() as f64);
    let squared_norm = h.iter().map(|x| x * x).sum();
    Ok(HVector { h, squared_norm })
}

/// ‖H‖² where H_l = h_l with probability γ and 0 otherwise, independently,
/// drawn from the thinning stream of `seed`.
pub fn thinned_squared_norm(h: &[f64], gamma: f64, seed: u64) -> f64 {
    let stream = Stream::new(seed, StreamLabel::Thinning);
    h.iter()
        .enumerate()
        .filter(|(l, _)| stream.bernoulli(*l as u64, gamma))
        .map(|(_, x)| x * x)
        .sum()
}

/// Compare the witness against a full Lasso solution and against an
/// independently computed projection.
///
/// Returns the larger of ‖U − (β̂_S − β*_S)‖∞ and
/// ‖V^b − X_S^cᵀ Π⊥ w / n‖∞, where Π⊥ comes from a QR factorization of X_S.
pub fn dual_identity_check(
    m: &SparseMeasurementMatrix,
    s: &SignalSpec,
    w: &[f64],
    lambda: f64,
    full_solution: &LassoSolution,
) -> Result<f64> {
    if !full_solution.converged {
        return Err(Error::contract("full solution did not converge"));
    }
    if full_solution.beta_hat.len() != m.p() {
        return Err(Error::parameter("solution length differs from p"));
    }
    let report = build(m, s, w, lambda)?;
    match report.margins {
        Some(mg) if report.success && mg.all_exceed(1e-6) => {}
        _ => {
            return Err(Error::contract(
                "witness must succeed with every margin above 1e-6",
            ))
        }
    }
    let u = report.u.as_ref().expect("invertible report");
    let vb = report.vb.as_ref().expect("invertible report");

    let restricted = s
        .support()
        .iter()
        .zip(s.values())
        .zip(u)
        .map(|((&i, &b), &ui)| (ui - (full_solution.beta_hat[i] - b)).abs())
        .fold(0.0, f64::max);

    let cols = m.to_columns();
    let support = s.support();
    let x_s = DMatrix::from_fn(m.n(), support.len(), |r, c| 0.0 * r as f64 + {
        let (rows, vals) = cols.column(support[c]);
        rows.binary_search(&r).map_or(0.0, |pos| vals[pos])
    });
    let q = x_s.qr().q();
    let wv = nalgebra::DVector::from_column_slice(w);
    let projected = &wv - &q * (q.transpose() * &wv);
    let n = m.n() as f64;
    let projection = s
        .complement()
        .iter()
        .zip(vb)
        .map(|(&j, &v)| (v - cols.dot(j, projected.as_slice()) / n).abs())
        .fold(0.0, f64::max);

    Ok(restricted.max(projection))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{make_signal, Convention, SignPattern};

    /// n = 4, p = 4, columns 0 and 1 orthogonal with squared norm n.
    fn orthonormal_design() -> SparseMeasurementMatrix {
        let dense = vec![
            vec![1.0, 1.0, 0.5, 0.0],
            vec![1.0, -1.0, 0.0, 0.0],
            vec![1.0, 1.0, 0.0, 0.0],
            vec![1.0, -1.0, -0.25, 0.0],
        ];
        SparseMeasurementMatrix::from_dense(&dense, 1.0, Convention::Standard).unwrap()
    }

    #[test]
    fn orthonormal_noiseless() {
        let m = orthonormal_design();
        let s = make_signal(4, 2, 1.0, SignPattern::AllPlus).unwrap();
        let r = build(&m, &s, &[0.0; 4], 0.2).unwrap();
        assert!(r.invertible);
        for u in r.u.as_ref().unwrap() {
            assert!((u + 0.2).abs() < 1e-15);
        }
        assert!(r.vb.as_ref().unwrap().iter().all(|v| *v == 0.0));
        // the zero column never violates the dual condition
        assert_eq!(r.va.as_ref().unwrap()[1], 0.0);
        assert!(r.success);
    }

    #[test]
    fn zhat_is_scaled_dual_sum() {
        let m = orthonormal_design();
        let s = make_signal(4, 2, 1.0, SignPattern::AllPlus).unwrap();
        let r = build(&m, &s, &[0.1, -0.2, 0.05, 0.3], 0.3).unwrap();
        let z = r.zhat_sc.as_ref().unwrap();
        for ((a, b), z) in r.va.as_ref().unwrap().iter().zip(r.vb.as_ref().unwrap()).zip(z) {
            assert!((0.3 * z - (a + b)).abs() <= 1e-15 * (a + b).abs().max(1.0));
        }
    }

    #[test]
    fn singular_support_reports_not_invertible() {
        let dense = vec![vec![1.0, 1.0, 1.0, 1.0], vec![2.0, 2.0, 0.0, 1.0]];
        let m = SparseMeasurementMatrix::from_dense(&dense, 1.0, Convention::Standard).unwrap();
        let s = make_signal(4, 2, 1.0, SignPattern::AllPlus).unwrap();
        let r = build(&m, &s, &[0.0; 2], 0.1).unwrap();
        assert!(!r.invertible);
        assert!(!r.success);
        assert!(r.u.is_none() && r.va.is_none() && r.margins.is_none());
        assert!(matches!(check_events(&r, 0.1, 1.0), Err(Error::Contract(_))));
        assert!(matches!(h_vector(&m, &s), Err(Error::Contract(_))));
    }

    #[test]
    fn strict_dual_boundary() {
        let r = WitnessReport::from_parts(0.5, vec![1.0], vec![0.0], vec![0.25], vec![0.25]).unwrap();
        assert_eq!(r.event_v, Some(false));
        assert!(!r.success);
    }

    #[test]
    fn error_boundary_destroys_sign() {
        let r = WitnessReport::from_parts(
            0.1,
            vec![1.0, 1.0],
            vec![-1.0, 0.0],
            vec![0.0],
            vec![0.0],
        )
        .unwrap();
        let ev = check_events(&r, 0.1, 1.0).unwrap();
        assert!(ev.event_u);
        assert!(!ev.sign_consistent);
        assert!(!ev.success);
    }

    #[test]
    fn all_zero_duals_pass() {
        let r = WitnessReport::from_parts(0.1, vec![2.0], vec![0.0], vec![0.0, 0.0], vec![0.0, 0.0])
            .unwrap();
        let ev = check_events(&r, 0.1, 2.0).unwrap();
        assert!(ev.event_v && ev.event_u && ev.sign_consistent && ev.success);
    }

    #[test]
    fn h_vector_orthonormal_and_single_entry() {
        let m = orthonormal_design();
        let s = make_signal(4, 2, 1.0, SignPattern::AllPlus).unwrap();
        let h = h_vector(&m, &s).unwrap();
        let dense = m.to_dense();
        for (l, row) in dense.iter().enumerate() {
            assert!((h.h[l] - (row[0] + row[1]) / 4.0).abs() < 1e-15);
        }
        let ss: f64 = h.h.iter().map(|x| x * x).sum();
        assert!((h.squared_norm - ss).abs() <= 1e-12 * ss);

        let c = 2.5;
        let single = SparseMeasurementMatrix::from_dense(
            &[vec![c, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]],
            1.0,
            Convention::Standard,
        )
        .unwrap();
        let s1 = make_signal(2, 1, 1.0, SignPattern::AllPlus).unwrap();
        let h1 = h_vector(&single, &s1).unwrap();
        assert!((h1.h[0] - 1.0 / c).abs() < 1e-15);
        assert_eq!(&h1.h[1..], &[0.0, 0.0]);
    }

    #[test]
    fn dimension_errors() {
        let m = orthonormal_design();
        let s = make_signal(6, 2, 1.0, SignPattern::AllPlus).unwrap();
        assert!(matches!(build(&m, &s, &[0.0; 4], 0.1), Err(Error::Parameter(_))));
        let s = make_signal(4, 2, 1.0, SignPattern::AllPlus).unwrap();
        assert!(matches!(build(&m, &s, &[0.0; 3], 0.1), Err(Error::Parameter(_))));
        assert!(build(&m, &s, &[0.0; 4], 0.0).is_err());
    }

    #[test]
    fn thinning_keeps_about_gamma() {
        let h = vec![1.0; 10_000];
        let t = thinned_squared_norm(&h, 0.3, 5);
        assert!((t / 10_000.0 - 0.3).abs() < 0.02);
        assert_eq!(thinned_squared_norm(&h, 1.0, 5), 10_000.0);
    }
}
