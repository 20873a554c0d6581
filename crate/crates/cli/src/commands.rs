use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};

use serde_json::Value;
use sparsified_lasso::ensemble::{
    format, make_signal, noise_vector, sample_matrix, Convention, EnsembleSpec, SignPattern,
    SignalSpec, SparseMeasurementMatrix,
};
use sparsified_lasso::lasso::{self, LassoConfig};
use sparsified_lasso::sweep::{
    self, format_g10, GammaRule, LambdaRule, Mode, NoiseReference, SparsityRule, SweepConfig,
};
use sparsified_lasso::theory::{self, TailBound};
use sparsified_lasso::{witness, Execution};

use crate::config::{CliConfig, CliError, CliResult};

fn io_err(what: &str, path: &str, e: io::Error) -> CliError {
    CliError::Runtime(format!("cannot {what} {path}: {e}"))
}

/// Run `f` against stdout (`-`) or a freshly created file.
fn write_to(path: &str, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> CliResult<()> {
    if path == "-" {
        let stdout = io::stdout();
        let mut lock = stdout.lock();
        f(&mut lock).and_then(|_| lock.flush())
    } else {
        let file = File::create(path).map_err(|e| io_err("create", path, e))?;
        let mut w = BufWriter::new(file);
        f(&mut w).and_then(|_| w.flush())
    }
    .map_err(|e| io_err("write", path, e))
}

fn open(path: &str) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| io_err("open", path, e))
}

fn read_matrix(cfg: &CliConfig) -> CliResult<SparseMeasurementMatrix> {
    let path = cfg.require("matrix")?;
    format::read_matrix(open(path)?)
        .map_err(|e| CliError::Runtime(format!("{path}: {e}")))
}

fn sign_pattern(raw: &str) -> CliResult<SignPattern> {
    match raw.trim().split_once(':') {
        None if raw.trim() == "all_plus" => Ok(SignPattern::AllPlus),
        None if raw.trim() == "alternating" => Ok(SignPattern::Alternating),
        Some(("seeded_random", seed)) => seed
            .trim()
            .parse()
            .map(SignPattern::SeededRandom)
            .map_err(|e| CliError::Usage(format!("invalid sign seed `{seed}`: {e}"))),
        _ => Err(CliError::Usage(format!(
            "unknown sign pattern `{raw}` (expected all_plus, alternating or seeded_random:SEED)"
        ))),
    }
}

fn signal(cfg: &CliConfig, p: usize) -> CliResult<SignalSpec> {
    let k: usize = cfg.parse("k")?;
    let beta_min: f64 = cfg.parse("beta_min")?;
    let pattern = sign_pattern(cfg.require("sign_pattern")?)?;
    Ok(make_signal(p, k, beta_min, pattern)?)
}

/// Noise from the noise stream of `base_seed`. With the working reference
/// σ² is the variance of w itself; with the original reference σ² refers to
/// the standard model, so a rescaled matrix gets σ²/γ.
fn noise(cfg: &CliConfig, m: &SparseMeasurementMatrix) -> CliResult<Vec<f64>> {
    let sigma2: f64 = cfg.parse("sigma2")?;
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(CliError::Usage(format!(
            "sigma2 must be finite and non-negative, got {sigma2}"
        )));
    }
    let reference: NoiseReference = cfg.parse("noise_reference")?;
    let variance = match (reference, m.convention()) {
        (NoiseReference::Original, Convention::Rescaled) => sigma2 / m.gamma(),
        _ => sigma2,
    };
    Ok(noise_vector(m.n(), variance, cfg.parse("base_seed")?))
}

fn print_json(mut value: Value, cfg: &CliConfig) -> CliResult<()> {
    if let Value::Object(map) = &mut value {
        map.insert("resolved_config".into(), cfg.to_json());
    }
    let text = serde_json::to_string_pretty(&value).expect("JSON values always serialize");
    println!("{text}");
    Ok(())
}

fn execution(cfg: &CliConfig) -> CliResult<Execution> {
    Ok(Execution::from_threads(Some(cfg.parse("threads")?)))
}

pub fn gen(cfg: &CliConfig) -> CliResult<i32> {
    let spec = EnsembleSpec::new(
        cfg.parse("n")?,
        cfg.parse("p")?,
        cfg.parse("gamma")?,
        cfg.parse("convention")?,
    )?;
    let m = sample_matrix(&spec, cfg.parse("base_seed")?)?;
    if let Some(path) = cfg.get("y_output") {
        let s = signal(cfg, m.p())?;
        let w = noise(cfg, &m)?;
        let mut y = m.mul_vec(&s.dense());
        for (yi, wi) in y.iter_mut().zip(&w) {
            *yi += wi;
        }
        write_to(path, |out| format::write_vector(&y, out))?;
    }
    write_to(cfg.require("output")?, |out| format::write_matrix(&m, out))?;
    Ok(0)
}

pub fn solve(cfg: &CliConfig) -> CliResult<i32> {
    let m = read_matrix(cfg)?;
    let y_path = cfg.require("y")?;
    let y = format::read_vector(open(y_path)?)
        .map_err(|e| CliError::Runtime(format!("{y_path}: {e}")))?;
    let lc = LassoConfig {
        lambda: cfg.parse("lambda")?,
        tol: cfg.parse("tol")?,
        max_iter: cfg.parse("max_iter")?,
        zero_tol: cfg.parse("zero_tol")?,
    };
    let sol = lasso::solve(&m, &y, &lc)?;
    if !sol.converged {
        eprintln!(
            "warning: no convergence after {} sweeps (KKT residual {:e})",
            sol.iterations, sol.kkt_residual
        );
    }
    print_json(
        serde_json::json!({
            "beta_hat": sol.beta_hat,
            "objective": sol.objective,
            "kkt_residual": sol.kkt_residual,
            "iterations": sol.iterations,
            "converged": sol.converged,
            "signed_support": lasso::signed_support(&sol.beta_hat, lc.zero_tol),
        }),
        cfg,
    )?;
    Ok(0)
}

pub fn witness(cfg: &CliConfig) -> CliResult<i32> {
    let m = read_matrix(cfg)?;
    let s = signal(cfg, m.p())?;
    let w = noise(cfg, &m)?;
    let lambda: f64 = cfg.parse("lambda")?;
    let report = witness::build(&m, &s, &w, lambda)?;
    let value = serde_json::to_value(&report).expect("reports always serialize");
    print_json(value, cfg)?;
    Ok(0)
}

fn sweep_config(cfg: &CliConfig) -> CliResult<SweepConfig> {
    let mut sc = SweepConfig::new(
        cfg.parse_list("p_list")?,
        cfg.parse_list("theta_grid")?,
        cfg.parse("base_seed")?,
    );
    sc.sparsity = cfg.parse::<SparsityRule>("sparsity")?;
    sc.gamma_rule = cfg.parse::<GammaRule>("gamma_rule")?;
    sc.lambda_rule = cfg.parse::<LambdaRule>("lambda_rule")?;
    sc.sigma2 = cfg.parse("sigma2")?;
    sc.beta_min = cfg.parse("beta_min")?;
    sc.trials = cfg.parse("trials")?;
    sc.mode = cfg.parse::<Mode>("mode")?;
    sc.convention = cfg.parse("convention")?;
    sc.noise_reference = cfg.parse("noise_reference")?;
    sc.retain_trials = cfg.parse("retain_trials")?;
    sc.record_timing = cfg.parse("record_timing")?;
    sc.validate()?;
    Ok(sc)
}

pub fn sweep(cfg: &CliConfig, dry_run: bool) -> CliResult<i32> {
    let sc = sweep_config(cfg)?;
    let exec = execution(cfg)?;
    if dry_run {
        let grid = sweep::resolve_grid(&sc)?;
        let mut out = cfg.comment_lines();
        out.push_str("p\tk\ttheta\ttheta_realized\tn\tgamma\tgamma_clamped\tlambda\ttrials\n");
        for g in &grid {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                g.p,
                g.k,
                format_g10(g.theta),
                format_g10(g.theta_realized),
                g.n,
                format_g10(g.gamma),
                g.gamma_clamped,
                format_g10(g.lambda),
                sc.trials
            ));
        }
        out.push_str(&format!(
            "# {} grid points, {} trials in total; no files written\n",
            grid.len(),
            grid.len() * sc.trials
        ));
        print!("{out}");
        return Ok(0);
    }

    let table = sweep::run_sweep(&sc, exec)?;
    let csv_path = cfg.require("output_csv")?;
    let json_path = cfg.require("output_json")?;
    let file = File::create(csv_path).map_err(|e| io_err("create", csv_path, e))?;
    sweep::write_csv(&table, BufWriter::new(file))?;
    let mut value = serde_json::to_value(&table).expect("tables always serialize");
    if let Value::Object(map) = &mut value {
        map.insert("resolved_config".into(), cfg.to_json());
    }
    let text = serde_json::to_string_pretty(&value).expect("JSON values always serialize");
    write_to(json_path, |out| writeln!(out, "{text}"))?;

    for r in &table.rows {
        println!(
            "p = {:>7}  theta = {:<6} n = {:>7}  success = {}/{} ({})",
            r.p,
            format_g10(r.theta),
            r.n,
            r.successes,
            r.trials,
            format_g10(r.success_rate)
        );
    }
    println!("wrote {csv_path} and {json_path}");
    Ok(0)
}

fn bound_parameters(b: &TailBound) -> String {
    match *b {
        TailBound::Hoeffding { n, gamma, delta } => format!("n={n} gamma={gamma} delta={delta}"),
        TailBound::Chi2 { m, delta } => format!("m={m} delta={delta}"),
        TailBound::Gaussian { sigma2, delta } => format!("sigma2={sigma2} delta={delta}"),
    }
}

pub fn bounds(cfg: &CliConfig) -> CliResult<i32> {
    let samples: usize = cfg.parse("samples")?;
    let checks = theory::run_bound_suite(
        &theory::default_bound_grid(),
        samples,
        cfg.parse("base_seed")?,
        execution(cfg)?,
    )?;
    let mut out = cfg.comment_lines();
    out.push_str("bound\tparameters\tvalue\tempirical\tthreshold\tresult\n");
    for c in &checks {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            c.bound.name(),
            bound_parameters(&c.bound),
            format_g10(c.value),
            format_g10(c.empirical),
            format_g10(c.threshold),
            if c.pass { "PASS" } else { "FAIL" }
        ));
    }
    print!("{out}");
    let failed = checks.iter().filter(|c| !c.pass).count();
    if failed > 0 {
        eprintln!("error: {failed} of {} bounds exceeded", checks.len());
        return Ok(1);
    }
    Ok(0)
}

pub fn check_conditions(cfg: &CliConfig) -> CliResult<i32> {
    let p_list: Vec<usize> = cfg.parse_list("p_list")?;
    let sparsity: SparsityRule = cfg.parse("sparsity")?;
    let gamma_rule: GammaRule = cfg.parse("gamma_rule")?;
    let eps: f64 = cfg.parse("eps")?;
    let beta_min: f64 = cfg.parse("beta_min")?;
    let mut out = cfg.comment_lines();
    out.push_str("p\tk\tn\tgamma\tlambda\tQ1\tQ2\tQ3\tsnr\n");
    for (i, &p) in p_list.iter().enumerate() {
        let k = sparsity.k_for(p, i)?;
        let n = theory::required_sample_size(p, k, eps)?;
        let (gamma, _) = gamma_rule.resolve(p, k)?;
        let lambda = theory::lambda_schedule(n, p, k)?;
        let q = theory::theorem_conditions(n, p, k, gamma, lambda, beta_min)?;
        out.push_str(&format!(
            "{p}\t{k}\t{n}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            format_g10(gamma),
            format_g10(lambda),
            format_g10(q.q1),
            format_g10(q.q2),
            format_g10(q.q3),
            format_g10(theory::snr_diagnostic(gamma, n, beta_min)),
        ));
    }
    print!("{out}");
    Ok(0)
}
