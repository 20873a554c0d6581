//! Scalar formulas of the sparsified-Lasso analysis, all with natural logs.
//!
//! The asymptotic conditions are returned as raw numbers meant for trend
//! inspection; none of them has a finite-sample pass/fail meaning.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ensemble::SparseMeasurementMatrix;
use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::rng::{derive_seed, Stream, StreamLabel};

fn log_gap(p: usize, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    if p < k + 2 {
        return Err(Error::domain(format!(
            "need p - k >= 2 for log(p - k) > 0, got p = {p}, k = {k}"
        )));
    }
    Ok(((p - k) as f64).ln())
}

/// log(p−k) together with log log(p−k); requires p − k > e.
fn log_loglog(p: usize, k: usize) -> Result<(f64, f64)> {
    let l = log_gap(p, k)?;
    let ll = l.ln();
    if !(ll > 0.0) {
        return Err(Error::domain(format!(
            "need p - k > e for log log(p - k) > 0, got p - k = {}",
            p.saturating_sub(k)
        )));
    }
    Ok((l, ll))
}

/// θ = n / (2k log(p−k)).
pub fn control_parameter(n: usize, p: usize, k: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    let l = log_gap(p, k)?;
    Ok(n as f64 / (2.0 * k as f64 * l))
}

/// Smallest integer strictly above (2 + eps)·k·log(p−k).
pub fn required_sample_size(p: usize, k: usize, eps: f64) -> Result<usize> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::domain(format!("eps must be finite and >= 0, got {eps}")));
    }
    let bound = (2.0 + eps) * k as f64 * log_gap(p, k)?;
    Ok(bound.floor() as usize + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaKind {
    /// (log log(p−k) / log(p−k))^{1/6}
    TheoremEq9,
    /// 0.5·log(p−k) / √(p−k)
    Figure1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaValue {
    pub gamma: f64,
    /// True when the formula exceeded 1 and was clamped.
    pub clamped: bool,
}

pub fn gamma_schedule(p: usize, k: usize, kind: GammaKind) -> Result<GammaValue> {
    let raw = match kind {
        GammaKind::TheoremEq9 => {
            let (l, ll) = log_loglog(p, k)?;
            (ll / l).powf(1.0 / 6.0)
        }
        GammaKind::Figure1 => {
            let l = log_gap(p, k)?;
            0.5 * l / ((p - k) as f64).sqrt()
        }
    };
    Ok(clamp_gamma(raw))
}

fn clamp_gamma(raw: f64) -> GammaValue {
    GammaValue {
        gamma: raw.min(1.0),
        clamped: raw > 1.0,
    }
}

/// λ = sqrt( (log(p−k)/n) · sqrt(log(p−k) / log log(p−k)) ).
pub fn lambda_schedule(n: usize, p: usize, k: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    let (l, ll) = log_loglog(p, k)?;
    Ok((l / n as f64 * (l / ll).sqrt()).sqrt())
}

/// The three quantities whose limits drive the main sufficiency result:
/// `q1` and `q3` should diverge, `q2` should vanish.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Conditions {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

pub fn theorem_conditions(
    n: usize,
    p: usize,
    k: usize,
    gamma: f64,
    lambda: f64,
    beta_min: f64,
) -> Result<Conditions> {
    let (l, ll) = log_loglog(p, k)?;
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::domain(format!("gamma must lie in (0, 1], got {gamma}")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) || !(beta_min > 0.0 && beta_min.is_finite()) {
        return Err(Error::domain("lambda and beta_min must be positive"));
    }
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    let kf = k as f64;
    Ok(Conditions {
        q1: n as f64 * lambda * lambda * gamma / l,
        q2: lambda / beta_min * (1.0 + kf.sqrt() / gamma * (ll / l).sqrt()),
        q3: gamma.powi(3) * kf.min(l / ll),
    })
}

/// γ·n·β_min², which must diverge for any method to recover the signed support.
pub fn snr_diagnostic(gamma: f64, n: usize, beta_min: f64) -> f64 {
    gamma * n as f64 * beta_min * beta_min
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailBound {
    /// P(|Z − γn| ≥ δn) for Z ~ Bin(n, γ); the bound does not involve γ.
    Hoeffding { n: usize, gamma: f64, delta: f64 },
    /// P(X − m ≥ δm) for X ~ χ²_m, with 0 ≤ δ < 1/2.
    Chi2 { m: usize, delta: f64 },
    /// P(|V| > δ) for V ~ N(0, σ²).
    Gaussian { sigma2: f64, delta: f64 },
}

impl TailBound {
    pub fn name(&self) -> &'static str {
        match self {
            TailBound::Hoeffding { .. } => "hoeffding",
            TailBound::Chi2 { .. } => "chi2",
            TailBound::Gaussian { .. } => "gaussian",
        }
    }

    /// The bound's value; may exceed 1, in which case it is vacuous.
    pub fn value(&self) -> Result<f64> {
        match *self {
            TailBound::Hoeffding { n, gamma, delta } => {
                if n == 0 || !(delta > 0.0) || !(0.0..=1.0).contains(&gamma) {
                    return Err(Error::domain(
                        "hoeffding needs n >= 1, delta > 0 and gamma in [0, 1]",
                    ));
                }
                Ok(2.0 * (-2.0 * n as f64 * delta * delta).exp())
            }
            TailBound::Chi2 { m, delta } => {
                if m == 0 || !(0.0..0.5).contains(&delta) {
                    return Err(Error::domain(format!(
                        "chi2 needs m >= 1 and 0 <= delta < 1/2, got m = {m}, delta = {delta}"
                    )));
                }
                Ok((-3.0 * m as f64 * delta * delta / 16.0).exp())
            }
            TailBound::Gaussian { sigma2, delta } => {
                if !(sigma2 > 0.0) || !(delta >= 0.0) {
                    return Err(Error::domain("gaussian needs sigma2 > 0 and delta >= 0"));
                }
                Ok(2.0 * (-delta * delta / (2.0 * sigma2)).exp())
            }
        }
    }

    /// Draw one sample of the underlying variate and report whether the
    /// bounded event happened. `stream` is consumed from `offset` on.
    fn exceeds(&self, stream: &Stream, offset: u64) -> bool {
        match *self {
            TailBound::Hoeffding { n, gamma, delta } => {
                let z = (0..n as u64)
                    .filter(|&j| stream.bernoulli(offset + j, gamma))
                    .count() as f64;
                (z - gamma * n as f64).abs() >= delta * n as f64
            }
            TailBound::Chi2 { m, delta } => {
                let x: f64 = (0..m as u64)
                    .map(|j| {
                        let g = stream.normal(offset + j);
                        g * g
                    })
                    .sum();
                x - m as f64 >= delta * m as f64
            }
            TailBound::Gaussian { sigma2, delta } => {
                (sigma2.sqrt() * stream.normal(offset)).abs() > delta
            }
        }
    }

    fn draws_per_sample(&self) -> u64 {
        match *self {
            TailBound::Hoeffding { n, .. } => n as u64,
            TailBound::Chi2 { m, .. } => m as u64,
            TailBound::Gaussian { .. } => 1,
        }
    }
}

/// One Monte Carlo domination check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub bound: TailBound,
    pub value: f64,
    pub samples: usize,
    pub exceedances: usize,
    pub empirical: f64,
    /// value + 3 binomial standard errors
    pub threshold: f64,
    pub pass: bool,
}

/// Estimate the exceedance frequency of `bound` from `samples` draws.
pub fn monte_carlo_bound(
    bound: TailBound,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<BoundCheck> {
    let value = bound.value()?;
    if samples == 0 {
        return Err(Error::parameter("samples must be at least 1"));
    }
    let stream = Stream::new(seed, StreamLabel::Auxiliary(0xB0D));
    let per = bound.draws_per_sample();
    let hits = map_indexed(exec, samples, |i| bound.exceeds(&stream, i as u64 * per));
    let exceedances = hits.into_iter().filter(|&h| h).count();
    let empirical = exceedances as f64 / samples as f64;
    let b = value.min(1.0);
    let threshold = value + 3.0 * (b * (1.0 - b) / samples as f64).sqrt();
    Ok(BoundCheck {
        bound,
        value,
        samples,
        exceedances,
        empirical,
        threshold,
        pass: empirical <= threshold,
    })
}

/// Parameter grid on which every bound is below 1.
pub fn default_bound_grid() -> Vec<TailBound> {
    vec![
        TailBound::Hoeffding { n: 100, gamma: 0.3, delta: 0.1 },
        TailBound::Hoeffding { n: 200, gamma: 0.5, delta: 0.08 },
        TailBound::Hoeffding { n: 50, gamma: 0.1, delta: 0.15 },
        TailBound::Chi2 { m: 100, delta: 0.3 },
        TailBound::Chi2 { m: 400, delta: 0.2 },
        TailBound::Chi2 { m: 50, delta: 0.45 },
        TailBound::Gaussian { sigma2: 1.0, delta: 1.5 },
        TailBound::Gaussian { sigma2: 1.0, delta: 2.0 },
        TailBound::Gaussian { sigma2: 2.0, delta: 2.5 },
    ]
}

/// Run [`monte_carlo_bound`] over `grid`, each point on its own stream.
pub fn run_bound_suite(
    grid: &[TailBound],
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<BoundCheck>> {
    grid.iter()
        .enumerate()
        .map(|(i, b)| {
            monte_carlo_bound(*b, samples, derive_seed(seed, i as u64), exec)
                .map_err(|e| e.context(format!("{} bound #{i}", b.name())))
        })
        .collect()
}

/// T = (1/γ)·sqrt(max{ log t / (θ k log(p−k)), log(θ log(p−k)) / (θ log(p−k)) })
/// where θ ∈ (0, 1] is the fraction `theta_frac` (not the control parameter).
pub fn sv_deviation(gamma: f64, k: usize, p: usize, theta_frac: f64, t: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::domain(format!("gamma must lie in (0, 1], got {gamma}")));
    }
    if !(theta_frac > 0.0 && theta_frac <= 1.0) {
        return Err(Error::domain(format!(
            "theta_frac must lie in (0, 1], got {theta_frac}"
        )));
    }
    if !(t >= 2.0) {
        return Err(Error::domain(format!("t must be at least 2, got {t}")));
    }
    let l = log_gap(p, k)?;
    let tl = theta_frac * l;
    if !(tl > 1.0) {
        return Err(Error::domain(format!(
            "need theta_frac * log(p - k) > 1, got {tl}"
        )));
    }
    let first = t.ln() / (tl * k as f64);
    let second = tl.ln() / tl;
    Ok(first.max(second).sqrt() / gamma)
}

/// Smallest and largest singular values of the columns `col_subset` of `m`,
/// each divided by √n.
pub fn singular_extremes(m: &SparseMeasurementMatrix, col_subset: &[usize]) -> Result<(f64, f64)> {
    let k = col_subset.len();
    if k == 0 || k > m.n() {
        return Err(Error::parameter(format!(
            "column subset size {k} must lie in 1..=n = {}",
            m.n()
        )));
    }
    if let Some(&bad) = col_subset.iter().find(|&&j| j >= m.p()) {
        return Err(Error::parameter(format!("column {bad} out of range")));
    }
    let mut dense = DMatrix::<f64>::zeros(m.n(), k);
    let mut position = vec![usize::MAX; m.p()];
    for (c, &j) in col_subset.iter().enumerate() {
        position[j] = c;
    }
    for (i, (cols, vals)) in m.rows().enumerate() {
        for (&j, &v) in cols.iter().zip(vals) {
            if position[j] != usize::MAX {
                dense[(i, position[j])] = v;
            }
        }
    }
    let sv = dense.singular_values();
    let root_n = (m.n() as f64).sqrt();
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let max = sv.iter().copied().fold(0.0, f64::max);
    Ok((min / root_n, max / root_n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::Convention;

    const LOG_992: f64 = 6.899723107284872;

    #[test]
    fn control_parameter_values() {
        let th = control_parameter(442, 1024, 32).unwrap();
        assert!((th - 442.0 / (64.0 * LOG_992)).abs() < 1e-14);
        assert!((th - 1.000945964441419).abs() < 1e-12);
        assert!(matches!(control_parameter(10, 33, 32), Err(Error::Domain(_))));
    }

    #[test]
    fn required_sizes() {
        assert_eq!(required_sample_size(10, 2, 0.0).unwrap(), 9);
        assert_eq!(required_sample_size(10, 2, 1.0).unwrap(), 13);
        assert!(required_sample_size(10, 2, -0.1).is_err());
    }

    #[test]
    fn gamma_values() {
        let g = gamma_schedule(1024, 32, GammaKind::Figure1).unwrap();
        assert!((g.gamma - 0.10953321386141597).abs() < 1e-14);
        assert!(!g.clamped);
        let g = gamma_schedule(1024, 32, GammaKind::TheoremEq9).unwrap();
        assert!((g.gamma - 0.8088037202322862).abs() < 1e-12);
        assert!(gamma_schedule(4, 2, GammaKind::TheoremEq9).is_err());
    }

    #[test]
    fn clamp_rule() {
        assert_eq!(clamp_gamma(1.3), GammaValue { gamma: 1.0, clamped: true });
        assert_eq!(clamp_gamma(1.0), GammaValue { gamma: 1.0, clamped: false });
        // both formulas stay below 1 on their domains
        for p in [5usize, 8, 12, 40, 1000] {
            for kind in [GammaKind::Figure1, GammaKind::TheoremEq9] {
                assert!(!gamma_schedule(p, 1, kind).unwrap().clamped);
            }
        }
    }

    #[test]
    fn lambda_values() {
        let l = lambda_schedule(442, 1024, 32).unwrap();
        assert!((l - 0.17176710112966814).abs() < 1e-13);
        let quarter = lambda_schedule(4 * 442, 1024, 32).unwrap();
        assert!((quarter - l / 2.0).abs() < 1e-15);
        assert!(matches!(lambda_schedule(10, 4, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn conditions_unit_gamma() {
        let c = theorem_conditions(500, 1024, 32, 1.0, 0.1, 1.0).unwrap();
        let ll = LOG_992.ln();
        assert!((c.q3 - 32f64.min(LOG_992 / ll)).abs() < 1e-14);
    }

    #[test]
    fn snr_values() {
        assert_eq!(snr_diagnostic(1.0, 100, 1.0), 100.0);
        for n in [10, 100, 1000] {
            assert!((snr_diagnostic(5.0 / n as f64, n, 1.0) - 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tail_values() {
        let h = TailBound::Hoeffding { n: 100, gamma: 0.5, delta: 0.1 };
        assert!((h.value().unwrap() - 0.2706705664732254).abs() < 1e-15);
        let g = TailBound::Gaussian { sigma2: 1.0, delta: 0.0 };
        assert_eq!(g.value().unwrap(), 2.0);
        let c = TailBound::Chi2 { m: 10, delta: 0.5 };
        assert!(matches!(c.value(), Err(Error::Domain(_))));
        let c = TailBound::Chi2 { m: 16, delta: 0.25 };
        assert!((c.value().unwrap() - (-0.1875f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn sv_deviation_values() {
        let t = sv_deviation(1.0, 40, 1032, 1.0, 992.0).unwrap();
        assert!((t - 0.5290898383584673).abs() < 1e-12);
        let half = sv_deviation(0.5, 40, 1032, 1.0, 992.0).unwrap();
        assert!((half - 2.0 * t).abs() < 1e-12);
        assert!(sv_deviation(1.0, 40, 42, 1.0, 992.0).is_err());
    }

    #[test]
    fn orthogonal_columns_have_unit_extremes() {
        let dense = vec![
            vec![1.0, 1.0, 7.0],
            vec![1.0, -1.0, 0.0],
            vec![-1.0, 1.0, 0.0],
            vec![-1.0, -1.0, 0.0],
        ];
        let m = SparseMeasurementMatrix::from_dense(&dense, 1.0, Convention::Standard).unwrap();
        let (lo, hi) = singular_extremes(&m, &[0, 1]).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
        assert!(matches!(singular_extremes(&m, &[0, 1, 2, 0, 1]), Err(Error::Parameter(_))));
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let b = TailBound::Gaussian { sigma2: 1.0, delta: 2.0 };
        let a = monte_carlo_bound(b, 2000, 3, Execution::Sequential).unwrap();
        let c = monte_carlo_bound(b, 2000, 3, Execution::Parallel).unwrap();
        assert_eq!(a, c);
        assert!(a.pass);
    }
}
