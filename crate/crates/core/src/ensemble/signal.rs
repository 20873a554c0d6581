use serde::{Deserialize, Serialize};

use super::matrix::{Convention, SparseMeasurementMatrix};
use crate::error::{Error, Result};
use crate::rng::{Stream, StreamLabel};

/// A k-sparse vector β* in R^p.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    p: usize,
    support: Vec<usize>,
    values: Vec<f64>,
    beta_min: f64,
}

/// How signs are assigned on the support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignPattern {
    #[default]
    AllPlus,
    Alternating,
    SeededRandom(u64),
}

impl SignalSpec {
    pub fn new(p: usize, support: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let k = support.len();
        if k == 0 {
            return Err(Error::parameter("support must be non-empty"));
        }
        if 2 * k > p {
            return Err(Error::parameter(format!(
                "support size k = {k} exceeds p/2 for p = {p}"
            )));
        }
        if values.len() != k {
            return Err(Error::parameter("support and values differ in length"));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) || support[k - 1] >= p {
            return Err(Error::parameter(
                "support indices must be sorted, unique and below p",
            ));
        }
        if values.iter().any(|v| !v.is_finite() || *v == 0.0) {
            return Err(Error::parameter(
                "support values must be finite and non-zero",
            ));
        }
        let beta_min = values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        Ok(SignalSpec {
            p,
            support,
            values,
            beta_min,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn k(&self) -> usize {
        self.support.len()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn beta_min(&self) -> f64 {
        self.beta_min
    }

    /// Signs of β* on the support, as ±1.0.
    pub fn support_signs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.signum()).collect()
    }

    /// β* as a dense vector of length p.
    pub fn dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.p];
        for (&i, &v) in self.support.iter().zip(&self.values) {
            out[i] = v;
        }
        out
    }

    /// Signed support in {-1, 0, +1}^p.
    pub fn signed_support(&self) -> Vec<i8> {
        let mut out = vec![0i8; self.p];
        for (&i, &v) in self.support.iter().zip(&self.values) {
            out[i] = if v > 0.0 { 1 } else { -1 };
        }
        out
    }

    /// Membership mask of the support.
    pub fn support_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.p];
        for &i in &self.support {
            mask[i] = true;
        }
        mask
    }

    /// Indices outside the support, increasing.
    pub fn complement(&self) -> Vec<usize> {
        let mask = self.support_mask();
        (0..self.p).filter(|&j| !mask[j]).collect()
    }
}

/// β* with support {0, …, k-1} and every magnitude equal to `beta_min`.
pub fn make_signal(
    p: usize,
    k: usize,
    beta_min: f64,
    sign_pattern: SignPattern,
) -> Result<SignalSpec> {
    if k == 0 || 2 * k > p {
        return Err(Error::parameter(format!(
            "need 1 <= k <= p/2, got k = {k}, p = {p}"
        )));
    }
    if !(beta_min > 0.0 && beta_min.is_finite()) {
        return Err(Error::parameter(format!(
            "beta_min must be positive, got {beta_min}"
        )));
    }
    let values = match sign_pattern {
        SignPattern::AllPlus => vec![beta_min; k],
        SignPattern::Alternating => (0..k)
            .map(|i| if i % 2 == 0 { beta_min } else { -beta_min })
            .collect(),
        SignPattern::SeededRandom(seed) => {
            let stream = Stream::new(seed, StreamLabel::Signs);
            (0..k as u64)
                .map(|i| if stream.bits(i) >> 63 == 0 { beta_min } else { -beta_min })
                .collect()
        }
    };
    SignalSpec::new(p, (0..k).collect(), values)
}

/// Measurements y = Xβ* + w, with the noise kept for witness computations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSet {
    pub y: Vec<f64>,
    pub w: Vec<f64>,
    /// Noise variance as requested, in the standard-ensemble model.
    pub sigma2: f64,
    /// Variance actually used for `w`.
    pub noise_variance: f64,
    pub seed: u64,
}

/// Observe `s` through `m` with N(0, σ²) noise in the standard model.
///
/// For a rescaled matrix the noise variance becomes σ²/γ, which keeps the
/// observation model equivalent to the standard one.
pub fn observe(
    m: &SparseMeasurementMatrix,
    s: &SignalSpec,
    sigma2: f64,
    seed: u64,
) -> Result<ObservationSet> {
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(Error::parameter(format!(
            "sigma2 must be finite and non-negative, got {sigma2}"
        )));
    }
    let variance = match m.convention() {
        Convention::Standard => sigma2,
        Convention::Rescaled => sigma2 / m.gamma(),
    };
    let mut obs = observe_with_variance(m, s, variance, seed)?;
    obs.sigma2 = sigma2;
    Ok(obs)
}

/// Observe with noise of exactly `noise_variance`, whatever the convention.
pub fn observe_with_variance(
    m: &SparseMeasurementMatrix,
    s: &SignalSpec,
    noise_variance: f64,
    seed: u64,
) -> Result<ObservationSet> {
    if m.p() != s.p() {
        return Err(Error::parameter(format!(
            "matrix has p = {} but signal has p = {}",
            m.p(),
            s.p()
        )));
    }
    if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
        return Err(Error::parameter(format!(
            "noise variance must be finite and non-negative, got {noise_variance}"
        )));
    }
    let w = noise_vector(m.n(), noise_variance, seed);
    let mut y = m.mul_vec(&s.dense());
    for (yi, wi) in y.iter_mut().zip(&w) {
        *yi += wi;
    }
    Ok(ObservationSet {
        y,
        w,
        sigma2: noise_variance,
        noise_variance,
        seed,
    })
}

/// `n` i.i.d. N(0, variance) draws from the noise stream of `seed`.
pub fn noise_vector(n: usize, variance: f64, seed: u64) -> Vec<f64> {
    let sd = variance.sqrt();
    let stream = Stream::new(seed, StreamLabel::Noise);
    (0..n as u64).map(|i| sd * stream.normal(i)).collect()
}
