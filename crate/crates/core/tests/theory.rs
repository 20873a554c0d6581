use proptest::prelude::*;
use sparsified_lasso::ensemble::{sample_matrix, Convention, EnsembleSpec};
use sparsified_lasso::theory::*;
use sparsified_lasso::Error;

/// k = √p, n from the sample-size threshold, γ and λ from their schedules.
fn schedule(p: usize) -> (usize, usize, f64, f64) {
    let k = (p as f64).sqrt() as usize;
    let n = required_sample_size(p, k, 0.0).unwrap();
    let gamma = gamma_schedule(p, k, GammaKind::TheoremEq9).unwrap().gamma;
    let lambda = lambda_schedule(n, p, k).unwrap();
    (k, n, gamma, lambda)
}

const GRID: [usize; 3] = [1 << 10, 1 << 14, 1 << 18];

#[test]
fn schedule_points() {
    let want = [
        (32, 442, 0.808_803_720_232_286_2, 0.171_767_101_129_668_14),
        (128, 2483, 0.78516, 0.089820),
        (512, 12775, 0.76619, 0.046594),
    ];
    for (p, (k, n, g, l)) in GRID.into_iter().zip(want) {
        let got = schedule(p);
        assert_eq!((got.0, got.1), (k, n));
        assert!((got.2 - g).abs() < 1e-5, "{}", got.2);
        assert!((got.3 - l).abs() < 1e-6, "{}", got.3);
    }
}

#[test]
fn q1_grows_and_q2_shrinks_along_schedule() {
    let qs: Vec<Conditions> = GRID
        .iter()
        .map(|&p| {
            let (k, n, g, l) = schedule(p);
            theorem_conditions(n, p, k, g, l, 1.0).unwrap()
        })
        .collect();
    let want = [(1.52867, 0.80739), (1.62211, 0.71629), (1.70345, 0.66552)];
    for (q, (q1, q2)) in qs.iter().zip(want) {
        assert!((q.q1 - q1).abs() < 1e-4 && (q.q2 - q2).abs() < 1e-4, "{q:?}");
    }
    assert!(qs.windows(2).all(|w| w[1].q1 > w[0].q1));
    assert!(qs.windows(2).all(|w| w[1].q2 < w[0].q2));
}

#[test]
fn snr_grows_along_schedule() {
    let snr: Vec<f64> = GRID
        .iter()
        .map(|&p| {
            let (_, n, g, _) = schedule(p);
            snr_diagnostic(g, n, 1.0)
        })
        .collect();
    assert!(snr.windows(2).all(|w| w[1] > w[0]), "{snr:?}");
    assert!((snr[0] - 357.49).abs() < 0.01);
}

#[test]
fn required_size_is_linear_in_k() {
    let one = 2.0 * 3.0 * (100f64 - 3.0).ln();
    let two = 2.0 * 6.0 * (100f64 - 3.0).ln();
    assert!((two - 2.0 * one).abs() < 1e-12);
    assert_eq!(required_sample_size(100, 3, 0.0).unwrap(), one.floor() as usize + 1);
}

#[test]
fn control_parameter_at_threshold_is_one() {
    // θ is linear in n, so θ(1)·2k log(p−k) recovers 1
    let (p, k) = (1024usize, 32usize);
    let exact = 2.0 * k as f64 * ((p - k) as f64).ln();
    let theta = control_parameter(1, p, k).unwrap() * exact;
    assert!((theta - 1.0).abs() < 1e-15);
}

#[test]
fn sv_deviation_decreases_in_k_on_first_branch() {
    // small θ·log(p−k)·k makes the log t branch dominant
    let a = sv_deviation(0.5, 2, 1000, 1.0, 1e6).unwrap();
    let b = sv_deviation(0.5, 3, 1000, 1.0, 1e6).unwrap();
    assert!(b < a);
}

#[test]
fn domain_errors() {
    assert!(matches!(control_parameter(10, 11, 10), Err(Error::Domain(_))));
    assert!(matches!(lambda_schedule(10, 12, 10), Err(Error::Domain(_))));
    assert!(matches!(gamma_schedule(12, 10, GammaKind::TheoremEq9), Err(Error::Domain(_))));
    assert!(matches!(sv_deviation(1.0, 1, 3, 1.0, 2.0), Err(Error::Domain(_))));
    assert!(matches!(sv_deviation(1.0, 40, 1032, 1.0, 1.5), Err(Error::Domain(_))));
}

#[test]
fn bound_suite_dominates() {
    let checks = run_bound_suite(&default_bound_grid(), 20_000, 1, sparsified_lasso::Execution::Parallel).unwrap();
    for c in checks {
        assert!(c.value < 1.0);
        assert!(c.pass, "{c:?}");
    }
}

#[test]
fn singular_extremes_concentrate() {
    let spec = EnsembleSpec::new(4000, 40, 0.5, Convention::Rescaled).unwrap();
    let m = sample_matrix(&spec, 1).unwrap();
    let cols: Vec<usize> = (0..40).collect();
    let (lo, hi) = singular_extremes(&m, &cols).unwrap();
    assert!(lo <= hi);
    assert!((lo - 1.0).abs() <= 0.5 && (hi - 1.0).abs() <= 0.5);
}

proptest! {
    #[test]
    fn sv_deviation_decreases_in_gamma(g in 0.05f64..0.95, bump in 0.01f64..0.05, k in 1usize..50, t in 2.0f64..1e4) {
        let p = 2000;
        let a = sv_deviation(g, k, p, 1.0, t).unwrap();
        let b = sv_deviation((g + bump).min(1.0), k, p, 1.0, t).unwrap();
        prop_assert!(b < a);
    }

    #[test]
    fn schedules_are_continuous_in_n(n in 1usize..100_000, p in 100usize..10_000) {
        let k = 10;
        let a = lambda_schedule(n, p, k).unwrap();
        let b = lambda_schedule(n + 1, p, k).unwrap();
        prop_assert!(b < a && (a - b) / a < 1.0 / n as f64);
        let g = gamma_schedule(p, k, GammaKind::Figure1).unwrap().gamma;
        prop_assert!(g > 0.0 && g <= 1.0);
    }

    #[test]
    fn tail_bounds_are_non_negative(n in 1usize..1000, delta in 0.0f64..0.499, s2 in 0.01f64..10.0) {
        let chi2 = TailBound::Chi2 { m: n, delta }.value().unwrap();
        let gauss = TailBound::Gaussian { sigma2: s2, delta }.value().unwrap();
        prop_assert!(chi2 > 0.0 && chi2 <= 1.0);
        prop_assert!(gauss > 0.0 && gauss <= 2.0);
        if delta > 0.0 {
            let hoeff = TailBound::Hoeffding { n, gamma: 0.5, delta }.value().unwrap();
            prop_assert!(hoeff > 0.0 && hoeff < 2.0);
        }
    }
}
