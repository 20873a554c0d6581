//! Monte Carlo phase-transition experiments.
//!
//! A sweep runs independent trials on every (p, θ) grid point. Each trial
//! draws a fresh matrix and noise vector from a seed derived from
//! `(base_seed, p index, θ index, trial index)` and records whether the
//! signed support is recovered, through the witness construction, the full
//! solver, or both.

use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::ensemble::{
    make_signal, observe, observe_with_variance, sample_matrix, Convention, EnsembleSpec,
    SignPattern,
};
use crate::error::{Error, Result};
use crate::lasso::{self, LassoConfig};
use crate::par::{map_indexed, Execution};
use crate::rng::{derive_seed, mix64};
use crate::theory::{self, GammaKind};
use crate::witness;

/// Margin below which a witness verdict is treated as numerically undecided.
pub const BOUNDARY_EPS: f64 = 1e-6;

pub const CSV_HEADER: [&str; 12] = [
    "theta",
    "n",
    "p",
    "k",
    "gamma",
    "lambda",
    "sigma2",
    "mode",
    "trials",
    "successes",
    "success_rate",
    "base_seed",
];

fn parse_real(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parameter(format!("cannot parse {what} from `{s}`")))
}

/// How k is derived from p.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SparsityRule {
    /// k = ⌈α p⌉
    Linear(f64),
    /// k = ⌈p^c⌉
    Polynomial(f64),
    /// One k per entry of the p list.
    Explicit(Vec<usize>),
}

impl SparsityRule {
    pub fn k_for(&self, p: usize, p_idx: usize) -> Result<usize> {
        let k = match self {
            SparsityRule::Linear(alpha) => ceil_snapped(alpha * p as f64),
            SparsityRule::Polynomial(c) => ceil_snapped((p as f64).powf(*c)),
            SparsityRule::Explicit(ks) => *ks.get(p_idx).ok_or_else(|| {
                Error::parameter(format!("explicit k list has no entry for p index {p_idx}"))
            })?,
        };
        if k == 0 || 2 * k > p {
            return Err(Error::parameter(format!(
                "derived k = {k} violates 1 <= k <= p/2 for p = {p}"
            )));
        }
        Ok(k)
    }
}

/// Ceiling that ignores floating-point noise just above an integer.
fn ceil_snapped(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

impl fmt::Display for SparsityRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SparsityRule::Linear(a) => write!(f, "linear:{a}"),
            SparsityRule::Polynomial(c) => write!(f, "polynomial:{c}"),
            SparsityRule::Explicit(ks) => {
                let parts: Vec<String> = ks.iter().map(|k| k.to_string()).collect();
                write!(f, "explicit:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for SparsityRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        match kind.trim() {
            "linear" => {
                let a = parse_real(arg, "linear alpha")?;
                if !(a > 0.0 && a <= 0.5) {
                    return Err(Error::parameter(format!("alpha must lie in (0, 0.5], got {a}")));
                }
                Ok(SparsityRule::Linear(a))
            }
            "polynomial" => {
                let c = parse_real(arg, "polynomial exponent")?;
                if !(c > 0.0 && c < 1.0) {
                    return Err(Error::parameter(format!("exponent must lie in (0, 1), got {c}")));
                }
                Ok(SparsityRule::Polynomial(c))
            }
            "explicit" => arg
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::parameter(format!("cannot parse k from `{t}`")))
                })
                .collect::<Result<Vec<_>>>()
                .map(SparsityRule::Explicit),
            other => Err(Error::parameter(format!(
                "unknown sparsity rule `{other}` (expected linear:α, polynomial:c or explicit:k,…)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GammaRule {
    Constant(f64),
    Figure1,
    TheoremEq9,
}

impl fmt::Display for GammaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaRule::Constant(g) => write!(f, "constant:{g}"),
            GammaRule::Figure1 => f.write_str("figure1"),
            GammaRule::TheoremEq9 => f.write_str("theorem_eq9"),
        }
    }
}

impl GammaRule {
    /// γ for dimension `p` and sparsity `k`, with the clamp flag.
    pub fn resolve(&self, p: usize, k: usize) -> Result<(f64, bool)> {
        let kind = match *self {
            GammaRule::Constant(g) => return Ok((g, false)),
            GammaRule::Figure1 => GammaKind::Figure1,
            GammaRule::TheoremEq9 => GammaKind::TheoremEq9,
        };
        let g = theory::gamma_schedule(p, k, kind)?;
        Ok((g.gamma, g.clamped))
    }
}

impl FromStr for GammaRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some(("constant", g)) => {
                let g = parse_real(g, "gamma")?;
                if !(g > 0.0 && g <= 1.0) {
                    return Err(Error::parameter(format!("gamma must lie in (0, 1], got {g}")));
                }
                Ok(GammaRule::Constant(g))
            }
            None if s.trim() == "figure1" => Ok(GammaRule::Figure1),
            None if s.trim() == "theorem_eq9" => Ok(GammaRule::TheoremEq9),
            _ => Err(Error::parameter(format!(
                "unknown gamma rule `{s}` (expected figure1, theorem_eq9 or constant:γ)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum LambdaRule {
    RemarkB,
    Constant(f64),
}

impl fmt::Display for LambdaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaRule::RemarkB => f.write_str("remark_b"),
            LambdaRule::Constant(l) => write!(f, "constant:{l}"),
        }
    }
}

impl FromStr for LambdaRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some(("constant", l)) => {
                let l = parse_real(l, "lambda")?;
                if !(l > 0.0) {
                    return Err(Error::parameter(format!("lambda must be positive, got {l}")));
                }
                Ok(LambdaRule::Constant(l))
            }
            None if s.trim() == "remark_b" => Ok(LambdaRule::RemarkB),
            _ => Err(Error::parameter(format!(
                "unknown lambda rule `{s}` (expected remark_b or constant:λ)"
            ))),
        }
    }
}

macro_rules! string_serde {
    ($($t:ty),*) => {$(
        impl TryFrom<String> for $t {
            type Error = Error;
            fn try_from(s: String) -> Result<Self> {
                s.parse()
            }
        }
        impl From<$t> for String {
            fn from(v: $t) -> String {
                v.to_string()
            }
        }
    )*};
}
string_serde!(SparsityRule, GammaRule, LambdaRule);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Witness,
    Full,
    Both,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Witness => "witness",
            Mode::Full => "full",
            Mode::Both => "both",
        }
    }

    fn runs_witness(self) -> bool {
        self != Mode::Full
    }

    fn runs_full(self) -> bool {
        self != Mode::Witness
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "witness" => Ok(Mode::Witness),
            "full" => Ok(Mode::Full),
            "both" => Ok(Mode::Both),
            other => Err(Error::parameter(format!(
                "unknown mode `{other}` (expected witness, full or both)"
            ))),
        }
    }
}

/// Which model `sigma2` refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseReference {
    /// The noise has variance `sigma2` in the convention the trials run in.
    #[default]
    Working,
    /// `sigma2` is the variance of the standard-ensemble model; a rescaled
    /// run inflates it to `sigma2 / γ` so both conventions describe the same
    /// observations.
    Original,
}

impl fmt::Display for NoiseReference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseReference::Working => "working",
            NoiseReference::Original => "original",
        })
    }
}

impl FromStr for NoiseReference {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "working" => Ok(NoiseReference::Working),
            "original" => Ok(NoiseReference::Original),
            other => Err(Error::parameter(format!(
                "unknown noise reference `{other}` (expected working or original)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub p_list: Vec<usize>,
    pub sparsity: SparsityRule,
    pub theta_grid: Vec<f64>,
    pub gamma_rule: GammaRule,
    pub lambda_rule: LambdaRule,
    pub sigma2: f64,
    pub beta_min: f64,
    pub trials: usize,
    pub mode: Mode,
    pub base_seed: u64,
    pub convention: Convention,
    pub noise_reference: NoiseReference,
    /// Solver settings for full mode; its λ is replaced per grid point.
    pub lasso: LassoConfig,
    /// Keep every trial record in the table (and its JSON mirror).
    pub retain_trials: bool,
    /// Measure per-trial wall time. Off by default because timings make
    /// otherwise identical outputs differ.
    pub record_timing: bool,
}

impl SweepConfig {
    /// A witness-mode sweep with the standard defaults: k = ⌈√p⌉, the
    /// `figure1` γ rule, the `remark_b` λ rule, σ² = 0.0625, β_min = 1,
    /// 100 trials, rescaled convention.
    pub fn new(p_list: Vec<usize>, theta_grid: Vec<f64>, base_seed: u64) -> Self {
        SweepConfig {
            p_list,
            sparsity: SparsityRule::Polynomial(0.5),
            theta_grid,
            gamma_rule: GammaRule::Figure1,
            lambda_rule: LambdaRule::RemarkB,
            sigma2: 0.0625,
            beta_min: 1.0,
            trials: 100,
            mode: Mode::Witness,
            base_seed,
            convention: Convention::Rescaled,
            noise_reference: NoiseReference::Working,
            lasso: LassoConfig::default(),
            retain_trials: false,
            record_timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::parameter("trials must be at least 1"));
        }
        if self.trials > u32::MAX as usize {
            return Err(Error::Capacity(format!(
                "at most {} trials per grid point",
                u32::MAX
            )));
        }
        if self.p_list.len() > u16::MAX as usize + 1 || self.theta_grid.len() > u16::MAX as usize + 1
        {
            return Err(Error::Capacity(
                "p list and theta grid are limited to 65536 entries each".into(),
            ));
        }
        if let Some(t) = self.theta_grid.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(Error::parameter(format!("theta values must be positive, got {t}")));
        }
        if !(self.sigma2 >= 0.0 && self.sigma2.is_finite()) {
            return Err(Error::parameter(format!(
                "sigma2 must be non-negative, got {}",
                self.sigma2
            )));
        }
        if !(self.beta_min > 0.0 && self.beta_min.is_finite()) {
            return Err(Error::parameter(format!(
                "beta_min must be positive, got {}",
                self.beta_min
            )));
        }
        if let SparsityRule::Explicit(ks) = &self.sparsity {
            if ks.len() != self.p_list.len() {
                return Err(Error::parameter(format!(
                    "explicit sparsity lists {} k values for {} p values",
                    ks.len(),
                    self.p_list.len()
                )));
            }
        }
        LassoConfig {
            lambda: 1.0,
            ..self.lasso
        }
        .validate()
    }
}

/// Fully resolved parameters of one (p, θ) grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub p_index: usize,
    pub theta_index: usize,
    pub p: usize,
    pub k: usize,
    /// Nominal θ from the grid.
    pub theta: f64,
    /// n / (2k log(p−k)) for the integer n actually used.
    pub theta_realized: f64,
    pub n: usize,
    pub gamma: f64,
    pub gamma_clamped: bool,
    pub lambda: f64,
}

fn resolve_point(cfg: &SweepConfig, p_index: usize, theta_index: usize) -> Result<GridPoint> {
    let p = cfg.p_list[p_index];
    let theta = cfg.theta_grid[theta_index];
    let k = cfg.sparsity.k_for(p, p_index)?;
    let unit = theory::control_parameter(1, p, k)?;
    let n = ceil_snapped(theta / unit);
    if n == 0 {
        return Err(Error::parameter("derived n is zero"));
    }
    let (gamma, gamma_clamped) = cfg.gamma_rule.resolve(p, k)?;
    let lambda = match cfg.lambda_rule {
        LambdaRule::RemarkB => theory::lambda_schedule(n, p, k)?,
        LambdaRule::Constant(l) => l,
    };
    EnsembleSpec::new(n, p, gamma, cfg.convention)?;
    Ok(GridPoint {
        p_index,
        theta_index,
        p,
        k,
        theta,
        theta_realized: theory::control_parameter(n, p, k)?,
        n,
        gamma,
        gamma_clamped,
        lambda,
    })
}

/// Resolve every grid point (p-major order), failing on the first point
/// whose schedules are out of domain.
pub fn resolve_grid(cfg: &SweepConfig) -> Result<Vec<GridPoint>> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(cfg.p_list.len() * cfg.theta_grid.len());
    for pi in 0..cfg.p_list.len() {
        for ti in 0..cfg.theta_grid.len() {
            out.push(resolve_point(cfg, pi, ti).map_err(|e| {
                e.context(format!(
                    "grid point p = {}, theta = {}",
                    cfg.p_list[pi], cfg.theta_grid[ti]
                ))
            })?);
        }
    }
    Ok(out)
}

/// Seed of one trial: a bijective mix of the packed indices keyed by the
/// base seed, so distinct grid positions never share a seed.
pub fn trial_seed(base_seed: u64, p_index: usize, theta_index: usize, trial_index: usize) -> u64 {
    let packed = ((p_index as u64 & 0xffff) << 48)
        | ((theta_index as u64 & 0xffff) << 32)
        | (trial_index as u64 & 0xffff_ffff);
    mix64(mix64(base_seed) ^ packed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialDiagnostics {
    /// max_j |V^a_j + V^b_j| / λ
    pub dual_ratio: Option<f64>,
    /// max_i |U_i| / β_min
    pub error_ratio: Option<f64>,
    /// Whether Σ̂_SS was invertible; `None` when the witness was not run.
    pub invertible: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub p: usize,
    pub k: usize,
    pub n: usize,
    pub theta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub trial_index: usize,
    pub seed: u64,
    pub witness_success: Option<bool>,
    pub full_success: Option<bool>,
    pub agreement: Option<bool>,
    /// The witness verdict is not certified: a decisive margin is within
    /// [`BOUNDARY_EPS`] of zero, or Σ̂_SS is singular.
    pub boundary: bool,
    pub diagnostics: TrialDiagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_secs: Option<f64>,
}

impl TrialRecord {
    /// The verdict counted for the sweep: the witness verdict whenever the
    /// witness ran, otherwise the full solver's.
    pub fn success(&self, mode: Mode) -> bool {
        match mode {
            Mode::Full => self.full_success.unwrap_or(false),
            _ => self.witness_success.unwrap_or(false),
        }
    }
}

fn run_point_trial(cfg: &SweepConfig, pt: &GridPoint, trial_index: usize) -> Result<TrialRecord> {
    let start = cfg.record_timing.then(Instant::now);
    let seed = trial_seed(cfg.base_seed, pt.p_index, pt.theta_index, trial_index);
    let spec = EnsembleSpec::new(pt.n, pt.p, pt.gamma, cfg.convention)?;
    let m = sample_matrix(&spec, derive_seed(seed, 1))?;
    let s = make_signal(pt.p, pt.k, cfg.beta_min, SignPattern::AllPlus)?;
    let noise_seed = derive_seed(seed, 2);
    let obs = match cfg.noise_reference {
        NoiseReference::Working => observe_with_variance(&m, &s, cfg.sigma2, noise_seed)?,
        NoiseReference::Original => observe(&m, &s, cfg.sigma2, noise_seed)?,
    };

    let mut witness_success = None;
    let mut boundary = false;
    let mut diagnostics = TrialDiagnostics {
        dual_ratio: None,
        error_ratio: None,
        invertible: None,
    };
    if cfg.mode.runs_witness() {
        let report = witness::build(&m, &s, &obs.w, pt.lambda)?;
        witness_success = Some(report.success);
        boundary = !report.invertible || report.is_boundary(BOUNDARY_EPS);
        diagnostics = TrialDiagnostics {
            dual_ratio: report.max_dual().map(|v| v / pt.lambda),
            error_ratio: report.max_error().map(|v| v / cfg.beta_min),
            invertible: Some(report.invertible),
        };
    }

    let mut full_success = None;
    if cfg.mode.runs_full() {
        let lcfg = LassoConfig {
            lambda: pt.lambda,
            ..cfg.lasso
        };
        let sol = lasso::solve(&m, &obs.y, &lcfg)?;
        full_success = Some(lasso::signed_support(&sol.beta_hat, lcfg.zero_tol) == s.signed_support());
    }

    let agreement = match (witness_success, full_success) {
        (Some(a), Some(b)) => Some(a == b),
        _ => None,
    };
    Ok(TrialRecord {
        p: pt.p,
        k: pt.k,
        n: pt.n,
        theta: pt.theta,
        gamma: pt.gamma,
        lambda: pt.lambda,
        trial_index,
        seed,
        witness_success,
        full_success,
        agreement,
        boundary,
        diagnostics,
        elapsed_secs: start.map(|t| t.elapsed().as_secs_f64()),
    })
}

/// Run one trial at grid values `p` and `theta`, which must appear in the
/// config's lists.
pub fn run_trial(cfg: &SweepConfig, p: usize, theta: f64, trial_index: usize) -> Result<TrialRecord> {
    cfg.validate()?;
    let pi = cfg
        .p_list
        .iter()
        .position(|&x| x == p)
        .ok_or_else(|| Error::parameter(format!("p = {p} is not in the p list")))?;
    let ti = cfg
        .theta_grid
        .iter()
        .position(|&x| x == theta)
        .ok_or_else(|| Error::parameter(format!("theta = {theta} is not in the theta grid")))?;
    let pt = resolve_point(cfg, pi, ti)
        .map_err(|e| e.context(format!("grid point p = {p}, theta = {theta}")))?;
    run_point_trial(cfg, &pt, trial_index)
        .map_err(|e| e.context(format!("trial {trial_index} at p = {p}, theta = {theta}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta: f64,
    pub theta_realized: f64,
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub gamma: f64,
    pub gamma_clamped: bool,
    pub lambda: f64,
    pub sigma2: f64,
    pub mode: Mode,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub witness_successes: Option<usize>,
    pub full_successes: Option<usize>,
    pub agreements: Option<usize>,
    pub boundary_trials: usize,
    pub singular_trials: usize,
    pub mean_dual_ratio: Option<f64>,
    pub mean_error_ratio: Option<f64>,
    pub base_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<Vec<TrialRecord>>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Fold the records of one grid point into its row.
pub fn aggregate(cfg: &SweepConfig, pt: &GridPoint, records: &[TrialRecord]) -> SweepRow {
    let count = |f: &dyn Fn(&TrialRecord) -> Option<bool>| -> Option<usize> {
        records
            .iter()
            .map(f)
            .try_fold(0, |acc, v| v.map(|b| acc + b as usize))
    };
    let successes = records.iter().filter(|r| r.success(cfg.mode)).count();
    let trials = records.len();
    SweepRow {
        theta: pt.theta,
        theta_realized: pt.theta_realized,
        n: pt.n,
        p: pt.p,
        k: pt.k,
        gamma: pt.gamma,
        gamma_clamped: pt.gamma_clamped,
        lambda: pt.lambda,
        sigma2: cfg.sigma2,
        mode: cfg.mode,
        trials,
        successes,
        success_rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
        witness_successes: count(&|r| r.witness_success).filter(|_| cfg.mode.runs_witness()),
        full_successes: count(&|r| r.full_success).filter(|_| cfg.mode.runs_full()),
        agreements: count(&|r| r.agreement).filter(|_| cfg.mode == Mode::Both),
        boundary_trials: records.iter().filter(|r| r.boundary).count(),
        singular_trials: records
            .iter()
            .filter(|r| r.diagnostics.invertible == Some(false))
            .count(),
        mean_dual_ratio: mean(records.iter().filter_map(|r| r.diagnostics.dual_ratio)),
        mean_error_ratio: mean(records.iter().filter_map(|r| r.diagnostics.error_ratio)),
        base_seed: cfg.base_seed,
    }
}

/// Run every trial of every grid point. The result does not depend on
/// `exec`: trials are collected in index order and folded sequentially.
pub fn run_sweep(cfg: &SweepConfig, exec: Execution) -> Result<SweepTable> {
    let grid = resolve_grid(cfg)?;
    let trials = cfg.trials;
    let results = map_indexed(exec, grid.len() * trials, |unit| {
        let pt = &grid[unit / trials];
        let t = unit % trials;
        run_point_trial(cfg, pt, t)
            .map_err(|e| e.context(format!("trial {t} at p = {}, theta = {}", pt.p, pt.theta)))
    });
    let records = results.into_iter().collect::<Result<Vec<_>>>()?;
    let rows = grid
        .iter()
        .zip(records.chunks(trials.max(1)))
        .map(|(pt, recs)| aggregate(cfg, pt, recs))
        .collect();
    Ok(SweepTable {
        config: cfg.clone(),
        rows,
        trials: cfg.retain_trials.then_some(records),
    })
}

/// Format with 10 significant digits in the style of C's `%.10g`.
pub fn format_g10(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..10).contains(&exp) {
        trim_zeros(format!("{:.*}", (9 - exp) as usize, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), sign, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// One CSV row as read back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub theta: f64,
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub gamma: f64,
    pub lambda: f64,
    pub sigma2: f64,
    pub mode: Mode,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub base_seed: u64,
}

pub fn write_csv<W: Write>(table: &SweepTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &table.rows {
        w.write_record([
            format_g10(r.theta),
            r.n.to_string(),
            r.p.to_string(),
            r.k.to_string(),
            format_g10(r.gamma),
            format_g10(r.lambda),
            format_g10(r.sigma2),
            r.mode.to_string(),
            r.trials.to_string(),
            r.successes.to_string(),
            format_g10(r.success_rate),
            r.base_seed.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}

pub fn csv_string(table: &SweepTable) -> String {
    let mut buf = Vec::new();
    write_csv(table, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv is UTF-8")
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Parse(format!("unexpected CSV header {header:?}")));
    }
    rdr.deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// Write the CSV summary and its JSON mirror (config, rows and, when
/// retained, every trial record).
pub fn write_outputs(table: &SweepTable, path_csv: &Path, path_json: &Path) -> Result<()> {
    let csv_file = File::create(path_csv).map_err(|e| Error::io(path_csv, e))?;
    write_csv(table, csv_file).map_err(|e| e.context(path_csv.display().to_string()))?;
    let mut json = serde_json::to_string_pretty(table)?;
    json.push('\n');
    std::fs::write(path_json, json).map_err(|e| Error::io(path_json, e))
}
